"""Exact Cech computations on the threefolds W_k and their deformations."""

from .series import MultiSeries, TruncationPolicy, parse_series
from .geometry import ThreefoldSpec, W, W2_tau, W2_y, W3_j, tangent_jacobian, line_bundle_transition
from .cech import DEFAULT_POLICY, WindowTooSmall, h0_basis, h1_basis, is_coboundary, reduce_representative
from .bundles import distinguish_bundles, first_neighborhood_moduli, shift_equivalent, splitting_type_on_line
from .deform import affine_bundle_iso, classify_rigidity, integrate_cocycle, verify_map_holomorphic

__version__ = "0.1.0"

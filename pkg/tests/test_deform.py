import pytest
from hypothesis import given
import hypothesis.strategies as st

from wkcech.deform import (
    AffineIsoProblem,
    MapSpec,
    NotIntegrable,
    affine_bundle_iso,
    check_relaxed,
    classify_rigidity,
    integrate_cocycle,
    verify_map_holomorphic,
)
from wkcech.geometry import W, W2_tau, transition_of
from wkcech.series import MultiSeries, TruncationPolicy, parse_series

P = parse_series
ZERO = MultiSeries.zero()


@given(st.integers(-4, -1), st.integers(0, 3), st.sampled_from([1, 2]))
def test_integrability_rule(l, e, slot):
    comps = [ZERO, ZERO, ZERO]
    comps[slot] = MultiSeries.monomial(l, e if slot == 1 else 0, e if slot == 2 else 0)
    res = integrate_cocycle(W(3), comps)
    assert bool(res) == (e == 0)


def test_base_direction_not_integrable():
    res = integrate_cocycle(W(2), [P("z^-1"), ZERO, ZERO])
    assert isinstance(res, NotIntegrable) and res.variable == "xi"


def test_integration_twists_by_fiber_degree():
    new = integrate_cocycle(W(2), [ZERO, P("z^-1 u2"), ZERO])
    assert transition_of(new).forward[1] == P("z^2 u1 + z u2")
    new = integrate_cocycle(W(3), [ZERO, ZERO, P("z^-2")])
    assert transition_of(new).forward[2] == P("z^-1 u2 + z^-3")


def test_integration_needs_three_components():
    with pytest.raises(ValueError):
        integrate_cocycle(W(2), [ZERO, ZERO])


@pytest.mark.parametrize("k1, k2, kind", [(0, 0, "zero"), (2, 1, "finite"), (2, -1, "growingPattern")])
def test_rigidity_classes(k1, k2, kind):
    rep = classify_rigidity(k1, k2, TruncationPolicy(4, -8, 8))
    assert rep.kind == kind


def test_finite_label():
    rep = classify_rigidity(2, 1, TruncationPolicy(4, -8, 8))
    assert rep.label() == "finite(1)"


@pytest.mark.parametrize("j1, j2", [(1, 2), (1, 3), (2, 3)])
def test_affine_not_isomorphic(j1, j2):
    v = affine_bundle_iso(AffineIsoProblem(j1, j2, j2))
    assert v.verdict == "NotIsomorphic"
    assert v.forced_A == MultiSeries.monomial(0, 0, j2 - j1)
    assert check_relaxed(j1, j2, v.forced_A)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_affine_same_is_isomorphic(j):
    assert affine_bundle_iso(AffineIsoProblem(j, j)).verdict == "Isomorphic"


def test_maps_commute_with_gluing():
    phi = MapSpec.parse(["z", "z u1^2", "u2"], ["xi", "v1^2", "xi v2"])
    psi = MapSpec.parse(["z", "u1", "z^2 u1 u2"], ["xi", "xi v1", "v1 v2"])
    assert verify_map_holomorphic(phi, W(2), W(3))
    assert verify_map_holomorphic(psi, W(3), W(2))


def test_map_mismatch_is_reported():
    bad = MapSpec.parse(["z", "u1", "u2"], ["xi", "v1", "v2"])
    res = verify_map_holomorphic(bad, W(2), W(3))
    assert not res and any(m.startswith("component 2") for m in res.mismatches)


def test_map_pole_is_reported():
    bad = MapSpec.parse(["z^-1", "u1", "u2"], ["xi", "v1", "v2"])
    res = verify_map_holomorphic(bad, W(2), W(2))
    assert not res and "pole" in res.mismatches[0]


def test_identity_on_deformed_geometry():
    ident = MapSpec.parse(["z", "u1", "u2"], ["xi", "v1", "v2"])
    spec = W2_tau("u2 + u2^2")
    assert verify_map_holomorphic(ident, spec, spec)


@pytest.mark.parametrize("ts, ok", [({0: 1}, True), ({0: 3}, True), ({0: 1, 1: 2}, False), ({1: 1}, False)])
def test_deformed_map_needs_constant_tau(ts, ok):
    from fractions import Fraction

    from wkcech.suite import phi_bar_pair

    m, source, target = phi_bar_pair({k: Fraction(v) for k, v in ts.items()})
    assert bool(verify_map_holomorphic(m, source, target)) == ok

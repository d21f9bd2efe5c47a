"""Engine results against the independent sympy computations."""

import pytest
import sympy as sp

import oracles as o
from wkcech.bundles import extension_bundle, formal_section_dimension, splitting_type_on_line
from wkcech.cech import h1_basis
from wkcech.geometry import W, W2_tau, W2_y, tangent_jacobian
from wkcech.series import TruncationPolicy

z, xi, u1, u2, v1, v2 = o.z, o.xi, o.u1, o.u2, o.v1, o.v2
W2U2_INVERSE = {z: 1 / xi, u1: xi**2 * v1 - xi * v2, u2: v2}


@pytest.mark.parametrize("p_engine, p_sym", [("z u1", z * u1), ("z u2", z * u2)])
@pytest.mark.parametrize("n", [0, 1])
def test_formal_sections_match_brute_force(p_engine, p_sym, n):
    M = sp.Matrix([[z**2, p_sym], [0, z**-2]])
    expected = o.h0_formal(M, W2U2_INVERSE, n, 8)
    assert o.h0_formal(M, W2U2_INVERSE, n, 11) == expected
    got, _ = formal_section_dimension(extension_bundle(2, p_engine, W2_tau("u2")), n)
    assert got == expected


@pytest.mark.parametrize(
    "p_engine, p_sym",
    [("z^-1", z**-1), ("z^3", z**3), ("0", 0), ("z^-1 + z^3", z**-1 + z**3), ("z^2", z**2)],
)
def test_splitting_type_matches_h0_counts(p_engine, p_sym):
    M = sp.Matrix([[z**2, p_sym], [0, z**-2]])
    a, b = o.splitting_by_counts(M, span=5)
    st = splitting_type_on_line(extension_bundle(2, p_engine, W(2)))
    # sections satisfy s_V = M s_U, so a transition exponent e is the line bundle O(-e)
    assert sorted((-st.a1, -st.a2), reverse=True) == [a, b]


@pytest.mark.parametrize("k, q", [(3, 1), (3, 2), (4, 1)])
def test_wq_block_matches_h0_counts(k, q):
    M = sp.Matrix([[z**k, z**q], [0, z ** (2 - k)]])
    assert o.splitting_by_counts(M, span=5) == tuple(sorted((-q, q - 2), reverse=True))


@pytest.mark.parametrize("y", [2, 3])
def test_w2y_h1_matches_sympy(y):
    expected = o.h1_w2y(y, y, -3)
    got = h1_basis(tangent_jacobian(W2_y(y)), TruncationPolicy(y, -12, 12)).dimension
    assert got == expected == y - 1

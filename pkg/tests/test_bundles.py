from fractions import Fraction

import pytest
from hypothesis import given
import hypothesis.strategies as st

from wkcech.bundles import (
    SplittingType,
    check_shift_witness,
    distinguish_bundles,
    extension_bundle,
    first_neighborhood_moduli,
    formal_section_dimension,
    shift_equivalent,
    splitting_exponents,
    splitting_type_on_line,
    verify_wq_identity,
)
from wkcech.geometry import ExtensionClass, W, W2_tau, W3_j, tangent_jacobian
from wkcech.series import TruncationPolicy, parse_series

P = parse_series
SMALL = TruncationPolicy(3, -8, 8)


def laurent(*pairs):
    return {e: Fraction(c) for e, c in pairs}


@given(st.integers(-5, 5), st.integers(-5, 5))
def test_diagonal_splitting(a, b):
    m = [[laurent((a, 1)), {}], [{}, laurent((b, 1))]]
    assert splitting_exponents(m) == tuple(sorted((a, b), reverse=True))


@pytest.mark.parametrize("k", range(2, 7))
def test_wq_identity_and_splitting(k):
    for q in range(1, k):
        assert verify_wq_identity(k, q)
        m = [[laurent((k, 1)), laurent((q, 1))], [{}, laurent((2 - k, 1))]]
        assert splitting_exponents(m) == tuple(sorted((q, 2 - q), reverse=True))


def test_wq_identity_domain():
    with pytest.raises(ValueError):
        verify_wq_identity(2, 2)


def test_extension_splitting_jumps():
    spec = W(2)
    assert splitting_type_on_line(extension_bundle(2, "z^-1", spec)) == SplittingType(1, -1)
    assert splitting_type_on_line(extension_bundle(2, "z^3", spec)) == SplittingType(2, -2)
    assert splitting_type_on_line(extension_bundle(2, "z u1", spec)) == SplittingType(2, -2)


def test_tangent_splitting():
    assert splitting_type_on_line(tangent_jacobian(W(3))).as_tuple() == (3, -2)


def test_shift_equivalence_over_deformed_w2():
    spec = W2_tau("u2")
    p, q = ExtensionClass(2, P("z^-1 u2")), ExtensionClass(2, P("u1"))
    dec = shift_equivalent(p, q, spec, SMALL)
    assert dec
    assert dec.witness.lam == -1 and not dec.witness.b
    assert dec.witness.beta == P("-v1", "V")
    assert check_shift_witness(p, q, dec.witness, spec)


def test_shift_equivalence_fails_for_distinct_classes():
    spec = W(2)
    dec = shift_equivalent(ExtensionClass(2, P("z u2")), ExtensionClass(2, P("u2")), spec, SMALL)
    assert not dec


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("j", [2, 3])
def test_moduli_counts(k, j):
    rep = first_neighborhood_moduli(j, W(k), SMALL)
    assert rep.count == 4 * (j - 1)
    assert rep.projective_dimension == 4 * j - 5


@pytest.mark.parametrize("k, count", [(1, 0), (2, 1), (3, 2)])
def test_moduli_j1(k, count):
    assert first_neighborhood_moduli(1, W(k), SMALL).count == count


def test_moduli_json_shape():
    out = first_neighborhood_moduli(2, W3_j(1), SMALL).to_json()
    assert set(out) == {"j", "spec_hash", "count", "projective_dimension", "generators"}


def test_distinguish_by_splitting_type():
    spec = W(2)
    v = distinguish_bundles(extension_bundle(2, "z^-1", spec), extension_bundle(2, "z^3", spec), SMALL)
    assert v.verdict == "NotIsomorphic" and v.reason == "splitting type"


def test_distinguish_finds_isomorphism():
    spec = W2_tau("u2")
    v = distinguish_bundles(extension_bundle(2, "z^-1 u2", spec), extension_bundle(2, "u1", spec), SMALL, orders=(0,))
    assert v.verdict == "Isomorphic"


def test_formal_sections_are_monotone():
    b = extension_bundle(2, "z u1", W2_tau("u2"))
    dims = [formal_section_dimension(b, n, SMALL)[0] for n in range(3)]
    assert dims == sorted(dims)


@pytest.mark.parametrize("p", ["z u1", "z u2"])
def test_constant_section_extends_to_first_neighborhood(p):
    from wkcech.bundles import section_extension
    from wkcech.series import MultiSeries

    b = extension_bundle(2, p, W2_tau("u2"))
    ext = section_extension(b, [MultiSeries.zero(), MultiSeries.const(1)], 1)
    assert ext is not None
    t = b.transition
    image = [t.to_V(x).restrict_u_degree(1) for x in b.apply(ext.components)]
    assert all(x.is_holomorphic() for x in image)
    assert all(c.restrict_u_degree(0) == s for c, s in zip(ext.components, [MultiSeries.zero(), MultiSeries.const(1)]))

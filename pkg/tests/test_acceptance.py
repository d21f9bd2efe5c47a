"""Acceptance criteria, one test each.

Every comparison is exact over the rationals: tolerance 0, no floating
point anywhere.  Windows are the defaults (fiber degree 6, z in [-12, 12],
growth cap 4).  Each test records one PASS/FAIL line; the lines are printed
in the pytest terminal summary, and running this file directly prints them
as well.

Criteria the engine contradicts are marked xfail(strict=True): the check
runs in full and is expected to fail, and an unexpected pass is an error.
"""

import sys

import pytest

from wkcech import suite
from wkcech.cech import DEFAULT_POLICY

LINES: list[str] = []

DISAGREES = {
    "8": "the 16 listed monomials u1^i u2^s with 2i + s >= 3, such as z^-1 u2^3, are individually coboundaries",
    "10": "over the u2 deformation four degree-one classes stay independent, so the projective dimension is 3",
    "11": "s0 = (0, 1) also extends for E1 (z u1 = xi v1 - v2), and both bundles have 11 sections on the first neighborhood",
    "12": "the deformed map only commutes with the gluings when tau is constant",
    "14": "for (0, -1) the normal bundle is O + O(1) and H^1 grows with the fiber degree (13, 31, 61)",
    "15": "the position-4 classes z^-1 u1 u2^s are exact coboundaries under the stated fiber convention",
}


def record(key, results):
    results = results if isinstance(results, list) else [results]
    main = results[0]
    status = "PASS" if main.status == "pass" else "FAIL"
    LINES.append(f"{status} criterion {key:>2} [{main.name}] expected: {main.expected} | computed: {main.computed}")
    for extra in results[1:]:
        LINES.append(f"     criterion {key:>2} [{extra.name}] recorded: {extra.computed} (reference {extra.expected})")
    return main


def criterion(key):
    marks = [pytest.mark.acceptance]
    if key in DISAGREES:
        marks.append(pytest.mark.xfail(reason=DISAGREES[key], strict=True))

    def wrap(fn):
        for m in marks:
            fn = m(fn)
        return fn

    return wrap


def run_check(key):
    fn = dict(suite.CHECKS)[key]
    return record(key, fn(DEFAULT_POLICY))


@criterion("1")
def test_w1_rigid():
    assert run_check("1").status == "pass"


@criterion("2")
def test_w2y_dimensions_and_basis():
    assert run_check("2").status == "pass"


@criterion("3")
def test_case_witnesses_recompose():
    assert run_check("3").status == "pass"


@criterion("4")
def test_w3_classes_independent():
    assert run_check("4").status == "pass"


@criterion("5")
def test_integrability_conditions():
    assert run_check("5").status == "pass"


@criterion("6")
def test_family_transition():
    assert run_check("6").status == "pass"


@criterion("7")
def test_wq_identity_and_splitting():
    assert run_check("7").status == "pass"


@criterion("8")
def test_ext_generator_monomials():
    assert run_check("8").status == "pass"


@criterion("9")
def test_moduli_dimensions():
    assert run_check("9").status == "pass"


@criterion("10")
def test_deformed_moduli_drop():
    assert run_check("10").status == "pass"


@criterion("11")
def test_formal_sections_distinguish():
    assert run_check("11").status == "pass"


def test_formal_sections_match_oracle():
    """The recorded absolute counts agree with the brute-force sympy count."""
    import sympy as sp

    import oracles as o

    inverse = {o.z: 1 / o.xi, o.u1: o.xi**2 * o.v1 - o.xi * o.v2, o.u2: o.v2}
    _, _, d1, d2 = suite.section_counts(DEFAULT_POLICY)
    oracle = [o.h0_formal(sp.Matrix([[o.z**2, p], [0, o.z**-2]]), inverse, 1, 8) for p in (o.z * o.u1, o.z * o.u2)]
    LINES.append(
        f"     criterion 11 [sections_oracle] engine ({d1}, {d2}) oracle {tuple(oracle)} "
        f"reported ({suite.REPORTED_H0_E1}, {suite.REPORTED_H0_E2})"
    )
    assert [d1, d2] == oracle


@criterion("12")
def test_maps_holomorphic():
    assert run_check("12").status == "pass"


@criterion("13")
def test_affine_bundles():
    assert run_check("13").status == "pass"


@criterion("14")
def test_rigidity_classification():
    assert run_check("14").status == "pass"


@criterion("15")
def test_end_tangent_classes():
    assert run_check("15").status == "pass"


@criterion("16")
def test_property_suites():
    assert run_check("16").status == "pass"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

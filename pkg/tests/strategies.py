"""Hypothesis strategies for series and cochains."""

from fractions import Fraction

import hypothesis.strategies as st

from wkcech.series import MultiSeries

coefs = st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(bool)


def exponents(zlo=-3, zhi=3, deg=3):
    return st.tuples(st.integers(zlo, zhi), st.integers(0, deg), st.integers(0, deg)).filter(
        lambda e: e[1] + e[2] <= deg
    )


@st.composite
def series(draw, chart="U", zlo=-3, zhi=3, deg=3, max_terms=4):
    terms = draw(st.dictionaries(exponents(zlo, zhi, deg), coefs, max_size=max_terms))
    return MultiSeries(terms, chart)


def holomorphic(chart="U", deg=2, max_terms=3):
    return series(chart, 0, 3, deg, max_terms)


__all__ = ["Fraction", "coefs", "exponents", "series", "holomorphic"]

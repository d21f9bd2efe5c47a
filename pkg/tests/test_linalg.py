from fractions import Fraction

import sympy as sp
from hypothesis import given
import hypothesis.strategies as st

from wkcech.linalg import Echelon, kernel, rank, solve_affine

small = st.integers(-3, 3).map(Fraction)


@st.composite
def sparse_vectors(draw, width=5, count=6):
    n = draw(st.integers(1, count))
    return [
        {k: v for k, v in enumerate(draw(st.lists(small, min_size=width, max_size=width))) if v}
        for _ in range(n)
    ]


def dense(vecs, width=5):
    return sp.Matrix([[v.get(k, 0) for k in range(width)] for v in vecs])


@given(sparse_vectors())
def test_rank_matches_sympy(vecs):
    assert rank(vecs) == dense(vecs).rank()


@given(sparse_vectors())
def test_kernel_relations_vanish(cols):
    rels = kernel(cols)
    assert len(rels) == len(cols) - rank(cols)
    for rel in rels:
        total = {}
        for idx, c in rel.items():
            for k, v in cols[idx].items():
                total[k] = total.get(k, 0) + c * v
        assert not any(total.values())


@given(sparse_vectors(), st.lists(small, min_size=5, max_size=5))
def test_solve_affine(cols, target):
    rhs = {k: v for k, v in enumerate(target) if v}
    sol, _ = solve_affine(cols, rhs)
    consistent = rank(cols + [rhs]) == rank(cols)
    assert (sol is not None) == consistent
    if sol is not None:
        got = {}
        for idx, c in sol.items():
            for k, v in cols[idx].items():
                got[k] = got.get(k, 0) + c * v
        assert {k: v for k, v in got.items() if v} == rhs


def test_echelon_express_tracks_labels():
    e = Echelon(track=True)
    e.add({0: Fraction(1), 1: Fraction(1)}, "a")
    e.add({1: Fraction(1)}, "b")
    combo = e.express({0: Fraction(2), 1: Fraction(5)})
    assert combo == {"a": 2, "b": 3}
    assert e.express({2: Fraction(1)}) is None
    assert e.add({0: Fraction(3)}, "c") is False
    assert e.rank == 2

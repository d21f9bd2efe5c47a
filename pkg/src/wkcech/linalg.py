"""Sparse Gaussian elimination over the rationals.

Vectors are dicts ``key -> Fraction`` with sortable keys.  Each stored row
has as pivot its smallest key, so reduction of a new vector only ever
introduces keys larger than the one being eliminated; a heap walks the keys
in increasing order.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

Vector = dict


class Echelon:
    """Incrementally built row-echelon basis of a span.

    With ``track=True`` every row remembers which inserted vectors (by label)
    it is a combination of, so reductions can return explicit witnesses.
    """

    def __init__(self, track: bool = False):
        self.track = track
        self.rows: dict = {}
        self.prov: dict = {}

    def __len__(self):
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, vec: Mapping, prov: Mapping | None = None):
        """Return ``(residual, provenance)``; residual is zero iff vec is in the span.

        ``provenance`` (when tracking) expresses ``vec - residual`` as a
        combination of inserted labels.
        """
        v = dict(vec)
        p = dict(prov) if (self.track and prov) else {}
        heap = list(v)
        heapq.heapify(heap)
        seen = set()
        while heap:
            k = heapq.heappop(heap)
            if k in seen:
                continue
            seen.add(k)
            c = v.get(k)
            if not c:
                continue
            row = self.rows.get(k)
            if row is None:
                continue
            for kk, rc in row.items():
                nv = v.get(kk, 0) - c * rc
                if nv:
                    if kk not in v:
                        heapq.heappush(heap, kk)
                    v[kk] = nv
                else:
                    v.pop(kk, None)
            if self.track:
                for lab, pc in self.prov[k].items():
                    nv = p.get(lab, 0) - c * pc
                    if nv:
                        p[lab] = nv
                    else:
                        p.pop(lab, None)
        return v, p

    def contains(self, vec: Mapping) -> bool:
        return not self.reduce(vec)[0]

    def add(self, vec: Mapping, label: Hashable = None) -> bool:
        """Insert a vector; returns True if it enlarged the span."""
        start = {label: Fraction(1)} if self.track else None
        v, p = self.reduce(vec, start)
        if not v:
            return False
        k = min(v)
        inv = 1 / v[k]
        self.rows[k] = {kk: c * inv for kk, c in v.items()}
        if self.track:
            self.prov[k] = {lab: c * inv for lab, c in p.items()}
        return True

    def express(self, vec: Mapping):
        """Write ``vec`` as a combination of inserted labels, or return None.

        The returned dict maps label -> coefficient with
        ``vec == sum(coef * inserted[label])``.
        """
        if not self.track:
            raise ValueError("express() needs a tracking echelon")
        v, p = self.reduce(vec, {})
        if v:
            return None
        # reduce() accumulated  -coef * provenance ; flip the sign
        return {lab: -c for lab, c in p.items()}

    def copy(self) -> "Echelon":
        e = Echelon(self.track)
        e.rows = dict(self.rows)
        e.prov = dict(self.prov)
        return e


def rank(vectors: Iterable[Mapping]) -> int:
    e = Echelon()
    for v in vectors:
        e.add(v)
    return e.rank


def kernel(columns: list[Mapping]) -> list[dict[int, Fraction]]:
    """Basis of linear relations among ``columns``: dicts index -> coefficient."""
    e = Echelon(track=True)
    out = []
    for idx, col in enumerate(columns):
        v, p = e.reduce(col, {idx: Fraction(1)})
        if not v:
            out.append(p)
        else:
            k = min(v)
            inv = 1 / v[k]
            e.rows[k] = {kk: c * inv for kk, c in v.items()}
            e.prov[k] = {lab: c * inv for lab, c in p.items()}
    return out


def solve_affine(columns: list[Mapping], rhs: Mapping):
    """Solve ``sum x_i columns[i] = rhs``.

    Returns ``(particular, kernel_basis)`` or ``(None, residual)`` when the
    system is inconsistent.
    """
    e = Echelon(track=True)
    ker = []
    for idx, col in enumerate(columns):
        v, p = e.reduce(col, {idx: Fraction(1)})
        if not v:
            ker.append(p)
        else:
            k = min(v)
            inv = 1 / v[k]
            e.rows[k] = {kk: c * inv for kk, c in v.items()}
            e.prov[k] = {lab: c * inv for lab, c in p.items()}
    sol = e.express(rhs)
    if sol is None:
        return None, e.reduce(rhs)[0]
    return sol, ker

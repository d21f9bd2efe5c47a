"""Rank-2 bundle tools: splitting type, shift-equivalence, moduli counts, invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cech import (
    DEFAULT_POLICY,
    CechSolver,
    VectorCochain,
    h0_basis,
    is_coboundary,
    section_extends,
    solver_for,
)
from .geometry import (
    BundleTransition,
    ExtensionClass,
    ThreefoldSpec,
    extension_to_transition,
    line_bundle_transition,
    mat_mul,
)
from .linalg import Echelon, kernel
from .series import MultiSeries, TruncationPolicy

Poly = dict  # exponent -> Fraction, Laurent in z


# univariate Laurent helpers -------------------------------------------------

def _padd(a: Poly, b: Poly, c=1) -> Poly:
    out = dict(a)
    for e, v in b.items():
        n = out.get(e, 0) + c * v
        if n:
            out[e] = n
        else:
            out.pop(e, None)
    return out


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            n = out.get(e1 + e2, 0) + c1 * c2
            if n:
                out[e1 + e2] = n
            else:
                out.pop(e1 + e2)
    return out


def _pshift(a: Poly, k: int) -> Poly:
    return {e + k: c for e, c in a.items()}


def _pdet(m: list[list[Poly]]) -> Poly:
    n = len(m)
    if n == 1:
        return dict(m[0][0])
    total: Poly = {}
    for j in range(n):
        if not m[0][j]:
            continue
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        total = _padd(total, _pmul(m[0][j], _pdet(minor)), 1 if j % 2 == 0 else -1)
    return total


def laurent_inverse_transpose(m: list[list[Poly]]) -> list[list[Poly]]:
    """(M^-1)^T for a Laurent matrix whose determinant is a monomial."""
    n = len(m)
    det = _pdet(m)
    if len(det) != 1:
        raise ValueError("determinant is not a monomial")
    (d, c), = det.items()
    inv_det = {-d: 1 / Fraction(c)}
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(m) if k != i] if n > 1 else []
            cof = _pdet(minor) if n > 1 else {0: Fraction(1)}
            if (i + j) % 2:
                cof = {e: -v for e, v in cof.items()}
            # adjugate[j][i] = cof_ij, so (M^-1)^T[i][j] = cof_ij / det
            out[i][j] = _pmul(cof, inv_det)
    return out


def splitting_exponents(m: list[list[Poly]]) -> tuple[int, ...]:
    """Exponents e with M ~ diag(z^e), descending.

    Right multiplication by polynomial unimodular matrices makes z^N M
    column reduced; then z^N M diag(z^-d) is a polynomial in 1/z with
    invertible constant term, and the column degrees d give the answer.
    """
    n = len(m)
    shift = -min((e for row in m for p in row for e in p), default=0)
    cols = [[_pshift(m[i][j], shift) for i in range(n)] for j in range(n)]
    for _ in range(10_000):
        degs = []
        for col in cols:
            exps = [e for p in col for e in p]
            if not exps:
                raise ValueError("matrix is singular")
            degs.append(max(exps))
        lead = [{i: col[i].get(degs[j], 0) for i in range(n) if col[i].get(degs[j], 0)} for j, col in enumerate(cols)]
        rel = kernel(lead)
        if not rel:
            return tuple(sorted((d - shift for d in degs), reverse=True))
        w = rel[0]
        jstar = max(w, key=lambda j: (degs[j], j))
        wj = w[jstar]
        new = [dict() for _ in range(n)]
        for j, coef in w.items():
            f = Fraction(coef) / wj
            for i in range(n):
                new[i] = _padd(new[i], _pshift(cols[j][i], degs[jstar] - degs[j]), f)
        cols[jstar] = new
    raise RuntimeError("column reduction did not terminate")


@dataclass(frozen=True)
class SplittingType:
    a1: int
    a2: int

    def as_tuple(self) -> tuple[int, int]:
        return (self.a1, self.a2)


def splitting_type_on_line(b: BundleTransition) -> SplittingType:
    m = [[e.at_zero_section() for e in row] for row in b.matrix]
    ex = splitting_exponents(m)
    return SplittingType(*ex) if len(ex) == 2 else SplittingType(ex[0], ex[-1])


def _z(k: int) -> MultiSeries:
    return MultiSeries.monomial(k)


def _c(k) -> MultiSeries:
    return MultiSeries.const(k)


def verify_wq_identity(k: int, q: int) -> bool:
    """Check the explicit factorization taking the W_k fiber block to diag(z^q, z^(2-q))."""
    if not k > q > 0:
        raise ValueError("need k > q > 0")
    zero = MultiSeries.zero()
    left = [[_c(1), zero], [_z(-k - q + 2), _c(-1)]]
    mid = [[_z(k), _z(q)], [zero, _z(-k + 2)]]
    right = [[zero, _c(1)], [_c(1), -_z(k - q)]]
    prod = mat_mul(mat_mul(left, mid), right)
    target = [[_z(q), zero], [zero, _z(-q + 2)]]
    v_side = all(e.max_z() is None or e.max_z() <= 0 for row in left for e in row)
    u_side = all(e.is_holomorphic() for row in right for e in row)

    def det2(a):
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]

    units = det2(left) == _c(-1) and det2(right) == _c(-1)
    return prod == target and v_side and u_side and units


# shift-equivalence ----------------------------------------------------------

@dataclass
class ShiftWitness:
    lam: Fraction
    b: MultiSeries  # U variables
    beta: MultiSeries  # V variables

    def render(self) -> dict:
        return {"lambda": str(self.lam), "b": self.b.render(), "beta": self.beta.render()}


@dataclass
class ShiftDecision:
    equivalent: bool
    witness: ShiftWitness | None = None
    reason: str = ""

    def __bool__(self):
        return self.equivalent


def _sigma(e: ExtensionClass) -> MultiSeries:
    return e.p.shift(-e.j)


def shift_equivalent(
    p: ExtensionClass,
    q: ExtensionClass,
    spec: ThreefoldSpec,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> ShiftDecision:
    """Search lam != 0, b on U, beta on V with p + z^j b + z^-j beta = lam q.

    Dividing by z^j turns this into ``lam sigma_q - sigma_p`` being a
    coboundary for O(-2j), which is decided on principal parts.
    """
    if p.j != q.j:
        raise ValueError("classes must share the splitting type j")
    j = p.j
    line = line_bundle_transition(-2 * j, spec)
    sp, sq = _sigma(p), _sigma(q)
    deg = max(policy.u_deg_max, sp.u_degree(), sq.u_degree())
    pol = TruncationPolicy(deg, policy.z_min, policy.z_max)
    solver = solver_for(line, deg)
    lows = [s.min_z() for s in (sp, sq) if s]
    z_min = min([policy.z_min, -4] + [2 * x for x in lows]) * 4
    solver.grow(z_min)
    rp, _ = solver.reduce(VectorCochain((sp,), line))
    rq, _ = solver.reduce(VectorCochain((sq,), line))
    if not rp and not rq:
        lam = Fraction(1)
    elif not rq or not rp:
        return ShiftDecision(False, reason="exactly one class is trivial")
    else:
        k0 = min(rq)
        lam = rp.get(k0, Fraction(0)) / rq[k0]
        if not lam or any(rp.get(k, 0) != lam * c for k, c in rq.items()) or set(rp) != set(rq):
            return ShiftDecision(False, reason="reduced classes are not proportional")
    diff = VectorCochain((sq.scale(lam) - sp,), line)
    dec = is_coboundary(diff, line, pol)
    if not dec:
        return ShiftDecision(False, reason="no witness within window")
    b = dec.witness.alpha.components[0]
    beta = dec.witness.beta[0]
    return ShiftDecision(True, ShiftWitness(lam, b, beta))


def check_shift_witness(p: ExtensionClass, q: ExtensionClass, w: ShiftWitness, spec: ThreefoldSpec) -> bool:
    from .geometry import transition_of

    t = transition_of(spec)
    lhs = p.p + w.b.shift(p.j) + t.to_U(w.beta).shift(-p.j)
    return w.b.is_holomorphic() and lhs == q.p.scale(w.lam)


# first-neighborhood moduli --------------------------------------------------

@dataclass
class ModuliReport:
    j: int
    spec: ThreefoldSpec
    count: int
    generators: list[ExtensionClass] = field(default_factory=list)
    window: TruncationPolicy | None = None

    @property
    def projective_dimension(self) -> int:
        return self.count - 1

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "spec_hash": self.spec.digest(),
            "count": self.count,
            "projective_dimension": self.projective_dimension,
            "generators": [g.render() for g in self.generators],
        }


def _degree_first(key):
    r, l, i, s = key
    return (i + s, r, l, i, s)


def _moduli_keys(solver: CechSolver, z_min: int) -> list[tuple]:
    solver.grow(z_min)
    ech = Echelon()
    for vec in solver.images.values():
        cut = {_degree_first(k): c for k, c in vec.items() if k[2] + k[3] <= 1}
        if cut:
            ech.add(cut)
    # rows led by a degree-1 key carry no degree-0 part: they are the relations
    rel = Echelon()
    rel.rows = {k: row for k, row in ech.rows.items() if k[0] == 1}
    chosen = []
    for i, s in ((1, 0), (0, 1)):
        for l in range(-1, z_min - 1, -1):
            key = (1, 0, l, i, s)
            if rel.add({key: Fraction(1)}):
                chosen.append((0, l, i, s))
    return chosen


def first_neighborhood_moduli(
    j: int,
    spec: ThreefoldSpec,
    policy: TruncationPolicy = DEFAULT_POLICY,
    growth_cap: int = 4,
) -> ModuliReport:
    """Extensions of O(j) by O(-j) of order exactly one, up to shift-equivalence and scaling."""
    if j < 1:
        raise ValueError("j must be positive")
    line = line_bundle_transition(-2 * j, spec)
    solver = solver_for(line, 1)
    z_min = min(policy.z_min, -4)
    prev, stable = None, 0
    for _ in range(growth_cap + 1):
        keys = _moduli_keys(solver, z_min)
        stable = stable + 1 if keys == prev else 0
        if stable >= 2:
            break
        prev = keys
        z_min *= 2
    gens = [ExtensionClass(j, MultiSeries.monomial(l + j, i, s)) for (_, l, i, s) in keys]
    window = TruncationPolicy(1, z_min, policy.z_max)
    return ModuliReport(j, spec, len(keys), gens, window)


# invariants -----------------------------------------------------------------

def formal_section_dimension(b: BundleTransition, n: int, policy: TruncationPolicy = DEFAULT_POLICY):
    basis = h0_basis(b, policy, neighborhood=n)
    return basis.dimension, basis


def section_extension(b: BundleTransition, s0: Sequence, n: int):
    """Extension of a section on the line to the n-th neighborhood, or None."""
    comps = [MultiSeries.const(x) if not isinstance(x, MultiSeries) else x for x in s0]
    return section_extends(b, comps, n)


@dataclass
class Verdict:
    verdict: str  # NotIsomorphic | Isomorphic | PossiblyIsomorphic
    reason: str = ""
    invariants: dict = field(default_factory=dict)
    witness: ShiftWitness | None = None

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "reason": self.reason, "invariants": self.invariants}
        if self.witness is not None:
            out["witness"] = self.witness.render()
        return out


def as_extension(b: BundleTransition) -> ExtensionClass | None:
    """Read [[z^j, p], [0, z^-j]] back into an extension class."""
    if b.rank != 2 or b.matrix[1][0]:
        return None
    a, d = b.matrix[0][0], b.matrix[1][1]
    if not (a.is_monomial() and d.is_monomial()):
        return None
    (ea, ca), = a.items()
    (ed, cd), = d.items()
    if ca != 1 or cd != 1 or ea[1:] != (0, 0) or ed[1:] != (0, 0) or ea[0] != -ed[0]:
        return None
    return ExtensionClass(ea[0], b.matrix[0][1])


def distinguish_bundles(
    b1: BundleTransition,
    b2: BundleTransition,
    policy: TruncationPolicy = DEFAULT_POLICY,
    orders: Sequence[int] = (0, 1, 2),
) -> Verdict:
    if b1.rank != b2.rank:
        raise ValueError("ranks differ")
    inv = {}
    t1, t2 = splitting_type_on_line(b1), splitting_type_on_line(b2)
    inv["splitting_type"] = [list(t1.as_tuple()), list(t2.as_tuple())]
    if t1 != t2:
        return Verdict("NotIsomorphic", "splitting type", inv)
    for n in orders:
        d1, _ = formal_section_dimension(b1, n, policy)
        d2, _ = formal_section_dimension(b2, n, policy)
        inv[f"h0_order_{n}"] = [d1, d2]
        if d1 != d2:
            return Verdict("NotIsomorphic", f"sections on neighborhood {n}", inv)
    e1, e2 = as_extension(b1), as_extension(b2)
    if e1 is not None and e2 is not None and e1.j == e2.j and b1.base == b2.base:
        dec = shift_equivalent(e1, e2, b1.base, policy)
        if dec:
            return Verdict("Isomorphic", "shift-equivalence", inv, dec.witness)
    return Verdict("PossiblyIsomorphic", "all computed invariants agree", inv)


def extension_bundle(j: int, p: MultiSeries | str, spec: ThreefoldSpec) -> BundleTransition:
    from .series import parse_series

    if isinstance(p, str):
        p = parse_series(p, "U")
    return extension_to_transition(ExtensionClass(j, p), spec)

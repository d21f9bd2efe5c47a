"""Two-chart models of the threefolds W_{k1,k2} and bundles over them.

A threefold is glued from U = (z, u1, u2) and V = (xi, v1, v2) by

    xi = 1/z,  v1 = z^k1 u1 + P1,  v2 = z^k2 u2 + P2

with the perturbations P1, P2 written in U variables.  W_k is the case
(k1, k2) = (k, 2 - k) with no perturbation.

Bundle transitions are matrices M in U variables acting on fiber
coordinates by ``s_V = M s_U``; O(d) has transition ``z^-d``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .series import EXACT, MultiSeries, NonInvertibleSubstitution, TruncationPolicy, parse_series

Matrix = list[list[MultiSeries]]

SLOTS = ("v1", "v2")


class InversionFailure(ArithmeticError):
    pass


class LineNotPreserved(ValueError):
    pass


@dataclass(frozen=True)
class ThreefoldSpec:
    k1: int
    k2: int
    perturbations: tuple[tuple[str, MultiSeries], ...] = ()
    name: str = ""

    def __post_init__(self):
        for slot, ser in self.perturbations:
            if slot not in SLOTS:
                raise ValueError(f"unknown perturbation slot {slot!r}")
            if ser.chart != "U":
                raise ValueError("perturbations are stored in U-chart variables")

    def perturbation(self, slot: str) -> MultiSeries:
        total = MultiSeries.zero()
        for s, ser in self.perturbations:
            if s == slot:
                total = total + ser
        return total

    def with_perturbation(self, slot: str, ser: MultiSeries) -> "ThreefoldSpec":
        return ThreefoldSpec(self.k1, self.k2, self.perturbations + ((slot, ser),), self.name)

    def label(self) -> str:
        if self.name:
            return self.name
        base = f"W[{self.k1},{self.k2}]"
        extra = ", ".join(f"{s}+={ser.render()}" for s, ser in self.perturbations if ser)
        return f"{base}({extra})" if extra else base

    def to_text(self) -> str:
        from .specfile import dump_spec

        return dump_spec(self)

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    def __hash__(self):
        return hash((self.k1, self.k2, tuple((s, p) for s, p in self.perturbations if p)))

    def __eq__(self, other):
        if not isinstance(other, ThreefoldSpec):
            return NotImplemented
        return (self.k1, self.k2) == (other.k1, other.k2) and all(
            self.perturbation(s) == other.perturbation(s) for s in SLOTS
        )


def W(k: int) -> ThreefoldSpec:
    """The canonical W_k = Tot(O(-k) + O(k-2))."""
    return ThreefoldSpec(k, 2 - k, name=f"W{k}")


def W2_tau(tau: MultiSeries | str, name: str = "") -> ThreefoldSpec:
    """Deformation of W_2 with v1 = z^2 u1 + z tau(u2)."""
    if isinstance(tau, str):
        tau = parse_series(tau, "U")
    if tau.depends_on("z") or tau.depends_on("u1"):
        raise ValueError("tau must be a polynomial in u2")
    return ThreefoldSpec(2, 0, (("v1", tau.shift(1)),), name=name)


def W2_y(y: int) -> ThreefoldSpec:
    return W2_tau(MultiSeries.monomial(0, 0, y), name=f"W2({y})")


def W3_j(j: int) -> ThreefoldSpec:
    """The affine-bundle deformation v1 = z^3 u1 + z^2 u2^j of W_3."""
    return ThreefoldSpec(3, -1, (("v1", MultiSeries.monomial(2, 0, j)),), name=f"W3({j})")


@dataclass(frozen=True)
class NotInvertible:
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Transition:
    forward: tuple[MultiSeries, MultiSeries, MultiSeries]
    inverse: tuple[MultiSeries, MultiSeries, MultiSeries] | NotInvertible

    @property
    def invertible(self) -> bool:
        return not isinstance(self.inverse, NotInvertible)

    def to_V(self, f: MultiSeries) -> MultiSeries:
        """Rewrite a U-chart expression in V variables."""
        if not self.invertible:
            raise NonInvertibleSubstitution(self.inverse.reason)
        return f.substitute(self.inverse)

    def to_U(self, g: MultiSeries) -> MultiSeries:
        """Rewrite a V-chart expression in U variables."""
        return g.substitute(self.forward)


def build_transition(spec: ThreefoldSpec) -> Transition:
    """Forward rules and, when the gluing is invertible, the inverse rules.

    Invertibility is decided structurally: a slot perturbation may not involve
    its own fiber variable, and the two slots may not feed each other.
    """
    z = MultiSeries.var("z")
    u1 = MultiSeries.var("u1")
    u2 = MultiSeries.var("u2")
    p1 = spec.perturbation("v1")
    p2 = spec.perturbation("v2")
    forward = (z ** -1, u1.shift(spec.k1) + p1, u2.shift(spec.k2) + p2)

    if p1.depends_on("u1"):
        return Transition(forward, NotInvertible("v1 perturbation involves u1"))
    if p2.depends_on("u2"):
        return Transition(forward, NotInvertible("v2 perturbation involves u2"))
    if p1.depends_on("u2") and p2.depends_on("u1"):
        return Transition(forward, NotInvertible("v1 and v2 perturbations are circular"))

    xi = MultiSeries.var("xi")
    v1 = MultiSeries.var("v1")
    v2 = MultiSeries.var("v2")
    z_of_v = xi ** -1
    # u_a = xi^{k_a} (v_a - P_a(1/xi, ...)), solved in dependency order
    zero = MultiSeries.zero("V")
    if p2.depends_on("u1"):
        u1_v = _times_xi_pow(v1 - p1.substitute((z_of_v, zero, zero)), spec.k1)
        u2_v = _times_xi_pow(v2 - p2.substitute((z_of_v, u1_v, zero)), spec.k2)
    else:
        u2_v = _times_xi_pow(v2 - p2.substitute((z_of_v, zero, zero)), spec.k2)
        u1_v = _times_xi_pow(v1 - p1.substitute((z_of_v, zero, u2_v)), spec.k1)
    inverse = (z_of_v, u1_v, u2_v)
    return Transition(forward, inverse)


def _times_xi_pow(f: MultiSeries, k: int) -> MultiSeries:
    # multiply by xi^k, i.e. divide by z^k
    return f.shift(k)


def jacobian(rules: Sequence[MultiSeries]) -> Matrix:
    return [[r.diff(c) for c in range(3)] for r in rules]


@dataclass
class BundleTransition:
    rank: int
    matrix: Matrix
    base: ThreefoldSpec
    kind: str = ""
    _inverse: Matrix | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.matrix) != self.rank or any(len(r) != self.rank for r in self.matrix):
            raise ValueError("matrix shape does not match rank")
        if self._inverse is None and self.rank <= 3:
            det = determinant(self.matrix)
            if not is_unit(det):
                raise InversionFailure(f"determinant {det.render()} is not a unit")

    @property
    def transition(self) -> Transition:
        return transition_of(self.base)

    def inverse(self) -> Matrix:
        if self._inverse is None:
            self._inverse = matrix_inverse(self.matrix)
        return self._inverse

    def apply(self, vec: Sequence[MultiSeries]) -> list[MultiSeries]:
        return mat_vec(self.matrix, vec)

    def apply_inverse(self, vec: Sequence[MultiSeries]) -> list[MultiSeries]:
        return mat_vec(self.inverse(), vec)

    def render(self) -> list[list[str]]:
        return [[e.render() for e in row] for row in self.matrix]


_TRANSITIONS: dict = {}


def transition_of(spec: ThreefoldSpec) -> Transition:
    key = spec.to_text()
    t = _TRANSITIONS.get(key)
    if t is None:
        t = _TRANSITIONS[key] = build_transition(spec)
    return t


def mat_vec(m: Matrix, vec: Sequence[MultiSeries]) -> list[MultiSeries]:
    out = []
    for row in m:
        acc = MultiSeries.zero(vec[0].chart if vec else "U")
        for a, b in zip(row, vec):
            if a and b:
                acc = acc + a * b
        out.append(acc)
    return out


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = MultiSeries.zero(a[0][0].chart)
            for t in range(k):
                if a[i][t] and b[t][j]:
                    acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def determinant(m: Matrix) -> MultiSeries:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = MultiSeries.zero(m[0][0].chart)
    for j in range(n):
        if not m[0][j]:
            continue
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        term = m[0][j] * determinant(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def is_unit(f: MultiSeries) -> bool:
    """A nonzero constant times z^l times (1 + terms of positive u-degree)."""
    lead = [e for e, _ in f.items() if e[1] == 0 and e[2] == 0]
    return len(lead) == 1


def matrix_inverse(m: Matrix) -> Matrix:
    n = len(m)
    det = determinant(m)
    try:
        dinv = det.inverse()
    except NonInvertibleSubstitution as exc:
        raise InversionFailure(str(exc)) from exc
    if n == 1:
        return [[dinv]]
    cof = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(m) if k != i]
            c = determinant(minor) if n > 1 else MultiSeries.const(1)
            cof[j][i] = (c if (i + j) % 2 == 0 else -c) * dinv
    return cof


def tangent_jacobian(spec: ThreefoldSpec) -> BundleTransition:
    """Jacobian of the forward gluing with respect to (z, u1, u2)."""
    t = transition_of(spec)
    J = jacobian(t.forward)
    inv = None
    if t.invertible:
        # inverse Jacobian = d(z,u)/d(xi,v) pulled back along the forward map
        Jv = jacobian(t.inverse)
        inv = [[e.substitute(t.forward) for e in row] for row in Jv]
    return BundleTransition(3, J, spec, kind="tangent", _inverse=inv)


def v_side_matrix(b: BundleTransition) -> Matrix:
    """Inverse transition written in V variables (the matrix acting on V-side data)."""
    t = b.transition
    return [[t.to_V(e) for e in row] for row in b.inverse()]


@dataclass(frozen=True)
class ExtensionClass:
    j: int
    p: MultiSeries

    def render(self) -> str:
        return self.p.render()


def extension_to_transition(e: ExtensionClass, base: ThreefoldSpec) -> BundleTransition:
    zj = MultiSeries.monomial(e.j)
    zmj = MultiSeries.monomial(-e.j)
    m = [[zj, e.p], [MultiSeries.zero(), zmj]]
    inv = [[zmj, -e.p], [MultiSeries.zero(), zj]]
    return BundleTransition(2, m, base, kind=f"extension(j={e.j})", _inverse=inv)


def line_bundle_transition(d: int, base: ThreefoldSpec) -> BundleTransition:
    return BundleTransition(
        1, [[MultiSeries.monomial(-d)]], base, kind=f"O({d})", _inverse=[[MultiSeries.monomial(d)]]
    )


def endomorphism_transition(b: BundleTransition, transposed: bool = False) -> BundleTransition:
    """Transition of End(E): g -> M g M^-1 on row-major vectorized g.

    With ``transposed=True`` the fiber matrix is read as acting on row
    vectors, i.e. End of the bundle with transition M^T.
    """
    n = b.rank
    M = b.matrix
    try:
        Minv = b.inverse()
    except NonInvertibleSubstitution as exc:
        raise InversionFailure(str(exc)) from exc
    if transposed:
        M = [list(r) for r in zip(*M)]
        Minv = [list(r) for r in zip(*Minv)]

    def kron(A, B):
        # entry ((a,b),(c,d)) = A[a][c] * B[d][b]
        out = []
        for a in range(n):
            for bb in range(n):
                row = []
                for c in range(n):
                    for d in range(n):
                        x, y = A[a][c], B[d][bb]
                        row.append(x * y if (x and y) else MultiSeries.zero())
                out.append(row)
        return out

    kind = f"End({b.kind}{'^T' if transposed else ''})"
    return BundleTransition(n * n, kron(M, Minv), b.base, kind=kind, _inverse=kron(Minv, M))


def fiber_block_on_line(spec: ThreefoldSpec) -> list[list[dict[int, Fraction]]]:
    """Fiber part of the Jacobian restricted to u1 = u2 = 0 (univariate Laurent entries)."""
    for slot in SLOTS:
        p = spec.perturbation(slot)
        if any(e[1] == 0 and e[2] == 0 for e, _ in p.items()):
            raise LineNotPreserved(f"{slot} perturbation does not vanish on the zero section")
    J = tangent_jacobian(spec).matrix
    return [[J[r][c].at_zero_section() for c in (1, 2)] for r in (1, 2)]


def conormal_on_line(spec: ThreefoldSpec) -> tuple[int, int]:
    """Splitting degrees of the conormal bundle of the zero section."""
    from .bundles import laurent_inverse_transpose, splitting_exponents

    N = fiber_block_on_line(spec)
    dual = laurent_inverse_transpose(N)
    a, b = splitting_exponents(dual)
    # O(d) has transition z^-d
    return tuple(sorted((-a, -b), reverse=True))

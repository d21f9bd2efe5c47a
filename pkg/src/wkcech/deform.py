"""Deformations: integrating cocycles, rigidity, affine bundles, maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cech import DEFAULT_POLICY, VectorCochain, WindowTooSmall, h1_basis
from .geometry import ThreefoldSpec, build_transition, tangent_jacobian, transition_of
from .linalg import solve_affine
from .series import MultiSeries, TruncationPolicy, render_terms


@dataclass(frozen=True)
class NotIntegrable:
    variable: str
    reason: str

    def __bool__(self):
        return False


def _components(c) -> list[MultiSeries]:
    if isinstance(c, VectorCochain):
        return list(c.components)
    return list(c)


def integrate_cocycle(spec: ThreefoldSpec, c) -> ThreefoldSpec | NotIntegrable:
    """Add a tangent cochain to the gluing.

    The entry in fiber slot a is twisted by z^k_a before it is added to the
    rule for v_a, i.e. the cochain is read through diag(z^-2, z^k1, z^k2).
    """
    comps = _components(c)
    if len(comps) != 3:
        raise ValueError("tangent cochains have three components")
    if comps[0]:
        return NotIntegrable("xi", "the base coordinate cannot be perturbed")
    new = spec
    for slot, k, comp in (("v1", spec.k1, comps[1]), ("v2", spec.k2, comps[2])):
        if comp:
            new = new.with_perturbation(slot, new.perturbation(slot) + comp.shift(k))
    t = build_transition(new)
    if not t.invertible:
        return NotIntegrable(t.inverse.reason.split()[0], t.inverse.reason)
    return new


@dataclass
class RigidityReport:
    kind: str  # zero | finite | growingPattern
    counts: dict
    n: int | None = None
    pattern: str | None = None

    def label(self) -> str:
        return f"finite({self.n})" if self.kind == "finite" else self.kind

    def to_json(self) -> dict:
        return {"kind": self.label(), "counts": {str(k): v for k, v in self.counts.items()}, "pattern": self.pattern}


def classify_rigidity(
    k1: int,
    k2: int,
    policy: TruncationPolicy = DEFAULT_POLICY,
    degrees: Sequence[int] | None = None,
    growth_cap: int = 4,
) -> RigidityReport:
    """Tangent H^1 of W_{k1,k2} at three fiber-degree caps."""
    from .cech import family_pattern

    b = tangent_jacobian(ThreefoldSpec(k1, k2))
    degrees = list(degrees or (policy.u_deg_max - 2, policy.u_deg_max - 1, policy.u_deg_max))
    bases = {}
    for d in degrees:
        pol = TruncationPolicy(d, policy.z_min, policy.z_max)
        try:
            bases[d] = h1_basis(b, pol, growth_cap)
        except WindowTooSmall as exc:
            # an unstable count at a cap is itself evidence of growth in z
            bases[d] = exc.partial
    pattern, counts = family_pattern(bases)
    vals = [counts[d] for d in degrees]
    if all(v == 0 for v in vals):
        return RigidityReport("zero", counts)
    if len(set(vals)) == 1 and all(bases[d].stabilized for d in degrees):
        return RigidityReport("finite", counts, n=vals[0])
    return RigidityReport("growingPattern", counts, pattern=pattern)


# affine bundles over the surface Z_-1 ----------------------------------------

@dataclass(frozen=True)
class AffineIsoProblem:
    j1: int
    j2: int
    ansatz_degree: int = 0

    def degree(self) -> int:
        return max(self.ansatz_degree, self.j1, self.j2) + 1


@dataclass
class AffineVerdict:
    verdict: str  # NotIsomorphic | Isomorphic | Inconclusive
    forced_A: MultiSeries | None = None
    A: MultiSeries | None = None
    b: tuple | None = None
    contradiction: str = ""
    ansatz_degree: int = 0
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "ansatz_degree": self.ansatz_degree}
        if self.forced_A is not None:
            out["forced_A"] = self.forced_A.render()
        if self.A is not None:
            out["A"] = self.A.render()
        if self.b is not None:
            out["b"] = [x.render() for x in self.b]
        if self.contradiction:
            out["contradiction"] = self.contradiction
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _assemble(sol: dict, cols_labels: list, name: str) -> MultiSeries:
    terms = {}
    for idx, coef in sol.items():
        lab = cols_labels[idx]
        if lab[0] == name:
            terms[lab[1]] = terms.get(lab[1], 0) + coef
    return MultiSeries(terms)


def _exact_system(j1: int, j2: int, deg: int):
    """Linear and affine matching over the overlap of Z_-1, with v2 = u2 / z.

    Unknown monomials are written directly in (z, u2); a V-side monomial
    xi^m v2^n becomes z^(-m-n) u2^n.  Keys of the equations: (eq, zexp, u2exp).
    """
    labels, cols = [], []
    for m in range(deg + 1):
        for n in range(deg + 1):
            labels.append(("AU", (m, 0, n)))
            cols.append({(1, m, n): Fraction(1)})
            labels.append(("AV", (-m - n, 0, n)))
            # A^V enters the linear part and, times z^2 u2^j1, the affine part
            cols.append({(1, -m - n, n): Fraction(-1), (2, -m - n + 2, n + j1): Fraction(1)})
            labels.append(("bU", (m, 0, n)))
            cols.append({(2, m + 3, n): Fraction(-1)})
            labels.append(("bV", (-m - n, 0, n)))
            cols.append({(2, -m - n, n): Fraction(1)})
    rhs = {(2, 2, j2): Fraction(1)}
    return labels, cols, rhs


def _relaxed_system(j1: int, j2: int, deg: int):
    """The same matching with A a polynomial in u2 alone and v2 read as u2."""
    labels, cols = [], []
    for n in range(deg + 1):
        labels.append(("A", (0, 0, n)))
        cols.append({(2, 2, n + j1): Fraction(1)})
        for m in range(deg + 1):
            labels.append(("bU", (m, 0, n)))
            cols.append({(2, m + 3, n): Fraction(-1)})
            labels.append(("bV", (-m, 0, n)))
            cols.append({(2, -m, n): Fraction(1)})
    rhs = {(2, 2, j2): Fraction(1)}
    return labels, cols, rhs


def affine_bundle_iso(p: AffineIsoProblem) -> AffineVerdict:
    """Decide whether E(j1) and E(j2) are isomorphic as affine bundles.

    The exact matching equations are solved first; a nowhere vanishing A
    gives Isomorphic.  Otherwise the relaxed system, where A depends on u2
    only, pins down the unique candidate A; if that candidate vanishes on
    u2 = 0 it is returned as the certificate.
    """
    deg = p.degree()
    labels, cols, rhs = _exact_system(p.j1, p.j2, deg)
    sol, ker = solve_affine(cols, rhs)
    if sol is not None:
        A = _assemble(sol, labels, "AU")
        bU = _assemble(sol, labels, "bU")
        bV = _assemble(sol, labels, "bV")
        if A.coeff(0, 0, 0) and A.is_monomial():
            return AffineVerdict("Isomorphic", A=A, b=(bU, bV), ansatz_degree=deg)
        return AffineVerdict("Inconclusive", A=A, ansatz_degree=deg, notes=["solution found but A not a unit"])
    notes = [f"exact matching inconsistent: residual {_render_residual(ker)}"]
    rl, rc, rr = _relaxed_system(p.j1, p.j2, deg)
    rsol, rker = solve_affine(rc, rr)
    if rsol is None:
        notes.append("relaxed matching inconsistent as well")
        return AffineVerdict("NotIsomorphic", contradiction=_render_residual(rker), ansatz_degree=deg, notes=notes)
    forced = _assemble(rsol, rl, "A")
    free_A = any(rl[i][0] == "A" for k in rker for i in k)
    if free_A:
        return AffineVerdict("Inconclusive", A=forced, ansatz_degree=deg, notes=notes + ["A not determined"])
    contradiction = ""
    if not forced.coeff(0, 0, 0):
        contradiction = f"A = {forced.render()} vanishes on u2 = 0"
    if not check_relaxed(p.j1, p.j2, forced):
        raise AssertionError("forced A does not satisfy the affine matching")
    return AffineVerdict(
        "NotIsomorphic" if contradiction else "Inconclusive",
        forced_A=forced,
        contradiction=contradiction,
        ansatz_degree=deg,
        notes=notes,
    )


def check_relaxed(j1: int, j2: int, A: MultiSeries) -> bool:
    """Substitute A (with b = 0) into the affine matching: A z^2 u2^j1 == z^2 u2^j2."""
    lhs = A * MultiSeries.monomial(2, 0, j1)
    return lhs == MultiSeries.monomial(2, 0, j2)


def _render_residual(res) -> str:
    if not isinstance(res, dict) or not res:
        return "0"
    terms = [((z, 0, n), c) for (_, z, n), c in res.items()]
    return render_terms(sorted(terms, key=lambda t: (t[0][2], t[0][0])))


# holomorphic maps ------------------------------------------------------------

@dataclass(frozen=True)
class MapSpec:
    on_u: tuple[MultiSeries, MultiSeries, MultiSeries]
    on_v: tuple[MultiSeries, MultiSeries, MultiSeries]

    def __post_init__(self):
        if len(self.on_u) != 3 or len(self.on_v) != 3:
            raise ValueError("a map needs three components on each chart")

    @classmethod
    def parse(cls, on_u: Sequence[str], on_v: Sequence[str]) -> "MapSpec":
        from .series import parse_series

        return cls(tuple(parse_series(x, "U") for x in on_u), tuple(parse_series(x, "V") for x in on_v))


@dataclass
class MapCheck:
    ok: bool
    mismatches: list

    def __bool__(self):
        return self.ok


def verify_map_holomorphic(m: MapSpec, source: ThreefoldSpec, target: ThreefoldSpec) -> MapCheck:
    """Check T_target o onU == onV o T_source exactly, with both pieces chart-holomorphic."""
    ts, tt = transition_of(source), transition_of(target)
    problems = []
    for name, pieces in (("onU", m.on_u), ("onV", m.on_v)):
        for i, f in enumerate(pieces):
            if not f.is_holomorphic():
                problems.append(f"{name}[{i + 1}] has a pole: {f.render()}")
    # target U coordinates: (z', u1', u2') = onU; forward rule of the target then applies
    onu = [f.retag("U") for f in m.on_u]
    for i in range(3):
        lhs = tt.forward[i].substitute(onu, chart="U")
        rhs = m.on_v[i].substitute(ts.forward, chart="U")
        if lhs != rhs:
            problems.append(f"component {i + 1}: {lhs.render()} != {rhs.render()}")
    return MapCheck(not problems, problems)

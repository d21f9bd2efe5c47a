"""Cech cohomology of vector bundles on the two-chart cover.

A cochain lives on the overlap and is written in U variables.  It is a
coboundary when ``sigma = alpha + M^-1 beta`` with alpha holomorphic on U and
beta holomorphic on V.  Because alpha absorbs every monomial with a
nonnegative power of z, the question reduces to principal parts: sigma is a
coboundary iff its principal part lies in the span of the principal parts of
the transported V-monomials ``M^-1 (e_c xi^m v1^a v2^b)``.

Generators are enumerated inside a finite window (fiber degree and a range
of xi exponents).  Their images are exact Laurent polynomials; terms of
fiber degree above the window are discarded, which is sound because the
gluing maps the ideal of the zero section into itself.  Windows in z grow
until the answer is stable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .geometry import BundleTransition, ExtensionClass, ThreefoldSpec, line_bundle_transition, mat_vec
from .linalg import Echelon
from .series import EXACT, MultiSeries, NonInvertibleSubstitution, TruncationPolicy, canonical_key, render_terms

log = logging.getLogger(__name__)

DEFAULT_POLICY = TruncationPolicy(6, -12, 12)


class WindowTooSmall(RuntimeError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class NotInvertibleBase(ValueError):
    pass


@dataclass(frozen=True)
class VectorCochain:
    components: tuple[MultiSeries, ...]
    bundle: BundleTransition | None = field(default=None, compare=False, hash=False)

    @classmethod
    def of(cls, comps: Sequence[MultiSeries | str | int], bundle=None) -> "VectorCochain":
        from .series import parse_series

        out = []
        for c in comps:
            if isinstance(c, str):
                c = parse_series(c, "U")
            elif isinstance(c, (int, Fraction)):
                c = MultiSeries.const(c)
            out.append(c)
        if bundle is not None and len(out) != bundle.rank:
            raise ValueError("component count must equal the bundle rank")
        return cls(tuple(out), bundle)

    @classmethod
    def unit(cls, rank: int, comp: int, l: int, i: int = 0, s: int = 0, coef=1, bundle=None):
        comps = [MultiSeries.zero() for _ in range(rank)]
        comps[comp] = MultiSeries.monomial(l, i, s, coef)
        return cls(tuple(comps), bundle)

    def __len__(self):
        return len(self.components)

    def __add__(self, other: "VectorCochain") -> "VectorCochain":
        return VectorCochain(tuple(a + b for a, b in zip(self.components, other.components)), self.bundle)

    def __sub__(self, other: "VectorCochain") -> "VectorCochain":
        return VectorCochain(tuple(a - b for a, b in zip(self.components, other.components)), self.bundle)

    def scale(self, c) -> "VectorCochain":
        return VectorCochain(tuple(a.scale(c) for a in self.components), self.bundle)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def is_holomorphic(self) -> bool:
        return all(c.is_holomorphic() for c in self.components)

    def principal(self) -> "VectorCochain":
        return VectorCochain(tuple(c.principal_part() for c in self.components), self.bundle)

    def u_degree(self) -> int:
        return max(c.u_degree() for c in self.components)

    def min_z(self) -> int:
        return min((c.min_z() for c in self.components if c), default=0)

    def to_vector(self) -> dict:
        return {(r, *e): c for r, comp in enumerate(self.components) for e, c in comp.items()}

    @classmethod
    def from_vector(cls, vec: dict, rank: int, bundle=None) -> "VectorCochain":
        parts: list[dict] = [{} for _ in range(rank)]
        for (r, l, i, s), c in vec.items():
            parts[r][(l, i, s)] = c
        return cls(tuple(MultiSeries(p) for p in parts), bundle)

    def render(self) -> str:
        return "[" + ", ".join(c.render() for c in self.components) + "]"

    def __str__(self):
        return self.render()


@dataclass
class CoboundaryWitness:
    alpha: VectorCochain
    beta: tuple[MultiSeries, ...]  # V variables

    def holomorphic_within(self, u_deg: int) -> bool:
        """alpha is U-holomorphic modulo fiber degree above ``u_deg``."""
        return all(c.restrict_u_degree(u_deg).is_holomorphic() for c in self.alpha.components)

    def is_exact(self) -> bool:
        return self.alpha.is_holomorphic()

    def render(self) -> dict:
        return {"alpha": self.alpha.render(), "beta": "[" + ", ".join(b.render() for b in self.beta) + "]"}


@dataclass
class ObstructionCertificate:
    monomial: tuple  # (component, l, i, s)
    reaching: list  # generator labels (component, xi-exp, v1-exp, v2-exp) whose image contains it
    residual: dict

    def render(self) -> str:
        r, l, i, s = self.monomial
        mono = render_terms([((l, i, s), Fraction(1))])
        if not self.reaching:
            return f"component {r + 1}: {mono} is reached by no transported V-monomial"
        return f"component {r + 1}: {mono} survives reduction ({len(self.reaching)} generators reach it)"


@dataclass
class CoboundaryDecision:
    is_coboundary: bool
    witness: CoboundaryWitness | None = None
    certificate: ObstructionCertificate | None = None

    def __bool__(self):
        return self.is_coboundary


@dataclass
class CohomologyBasis:
    classes: list[VectorCochain]
    certified_window: TruncationPolicy
    family_pattern: str | None = None
    stabilized: bool = True
    counts_by_degree: dict | None = None
    ext_classes: list[ExtensionClass] | None = None

    @property
    def dimension(self) -> int:
        return len(self.classes)

    def renderings(self) -> list[str]:
        if self.ext_classes is not None:
            return [e.render() for e in self.ext_classes]
        return [c.render() for c in self.classes]

    def to_json(self) -> dict:
        out = {
            "dimension": self.dimension,
            "certified_window": self.certified_window.as_dict(),
            "classes": self.renderings(),
            "family_pattern": self.family_pattern,
            "stabilized": self.stabilized,
        }
        if self.counts_by_degree is not None:
            out["counts_by_degree"] = {str(k): v for k, v in sorted(self.counts_by_degree.items())}
        return out


def _monomials(deg: int) -> list[tuple[int, int]]:
    return [(i, d - i) for d in range(deg + 1) for i in range(d, -1, -1)]


class CechSolver:
    """Coboundary space of one bundle, built lazily and grown on demand."""

    def __init__(self, bundle: BundleTransition, u_deg: int, track: bool = True):
        self.bundle = bundle
        self.rank = bundle.rank
        self.t = bundle.transition
        if not self.t.invertible:
            raise NotInvertibleBase(self.t.inverse.reason)
        self.u_deg = u_deg
        self.gen_deg = u_deg + 1
        self.minv = bundle.inverse()
        self.echelon = Echelon(track=track)
        self.images: dict = {}
        self._vmono: dict = {}
        self._cols: dict = {}
        self._m_done: dict = {}
        self.z_floor = 0

    def _v_monomial(self, a: int, b: int) -> MultiSeries:
        key = (a, b)
        got = self._vmono.get(key)
        if got is None:
            got = self.t.to_U(MultiSeries({(0, a, b): 1}, "V"))
            self._vmono[key] = got
        return got

    def column_image(self, c: int, a: int, b: int) -> list[MultiSeries]:
        """M^-1 applied to e_c v1^a v2^b, in U variables."""
        key = (c, a, b)
        got = self._cols.get(key)
        if got is None:
            f = self._v_monomial(a, b)
            got = [self.minv[r][c] * f if self.minv[r][c] else MultiSeries.zero() for r in range(self.rank)]
            self._cols[key] = got
        return got

    def generator_vector(self, label) -> dict:
        c, m, a, b = label
        vec = {}
        for r, comp in enumerate(self.column_image(c, a, b)):
            for (l, i, s), coef in comp.items():
                if l - m < 0 and i + s <= self.u_deg:
                    vec[(r, l - m, i, s)] = coef
        return vec

    def grow(self, z_min: int) -> None:
        """Make sure generators reaching down to ``2 * z_min`` are present."""
        floor = 2 * z_min
        if floor >= self.z_floor and self.z_floor != 0:
            return
        for c in range(self.rank):
            for a, b in _monomials(self.gen_deg):
                col = self.column_image(c, a, b)
                top = max((s.max_z() for s in col if s), default=None)
                if top is None:
                    continue
                m_max = top - floor
                start = self._m_done.get((c, a, b), -1) + 1
                for m in range(start, m_max + 1):
                    label = (c, m, a, b)
                    vec = self.generator_vector(label)
                    if vec:
                        self.images[label] = vec
                        self.echelon.add(vec, label)
                if m_max >= start:
                    self._m_done[(c, a, b)] = m_max
        self.z_floor = floor

    def reduce(self, sigma: VectorCochain):
        return self.echelon.reduce(sigma.principal().to_vector(), {})

    def witness(self, sigma: VectorCochain) -> CoboundaryWitness | None:
        combo = self.echelon.express(sigma.principal().to_vector())
        if combo is None:
            return None
        beta = [dict() for _ in range(self.rank)]
        for (c, m, a, b), coef in combo.items():
            key = (-m, a, b)
            beta[c][key] = beta[c].get(key, 0) + coef
        # xi exponent is m >= 0 on V; stored with the V-chart sign convention
        beta_v = tuple(MultiSeries({(-k[0], k[1], k[2]): v for k, v in part.items()}, "V") for part in beta)
        transported = self.transport(beta_v)
        alpha = VectorCochain(tuple(s - t for s, t in zip(sigma.components, transported)), sigma.bundle)
        return CoboundaryWitness(alpha, beta_v)

    def transport(self, beta_v: Sequence[MultiSeries]) -> list[MultiSeries]:
        """M^-1 beta rewritten in U variables."""
        beta_u = [self.t.to_U(b) for b in beta_v]
        return mat_vec(self.minv, beta_u)

    def reaching(self, key) -> list:
        return sorted(lab for lab, vec in self.images.items() if key in vec)


_SOLVERS: dict = {}


def bundle_key(bundle: BundleTransition) -> tuple:
    return (bundle.base.digest(), tuple(tuple(e.render() for e in row) for row in bundle.matrix))


def solver_for(bundle: BundleTransition, u_deg: int) -> CechSolver:
    """Shared solver per (bundle content, fiber degree), so repeated queries reuse the echelon."""
    key = (bundle_key(bundle), u_deg)
    got = _SOLVERS.get(key)
    if got is None:
        got = CechSolver(bundle, u_deg)
        _SOLVERS[key] = got
    return got


def clear_caches() -> None:
    _SOLVERS.clear()


def is_coboundary(
    sigma: VectorCochain,
    bundle: BundleTransition | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
    growth_cap: int = 2,
) -> CoboundaryDecision:
    bundle = bundle or sigma.bundle
    if bundle is None:
        raise ValueError("cochain has no bundle")
    if sigma.u_degree() > policy.u_deg_max:
        raise WindowTooSmall(f"cochain has fiber degree {sigma.u_degree()} > window {policy.u_deg_max}")
    solver = solver_for(bundle, policy.u_deg_max)
    z_min = min(policy.z_min, 2 * sigma.min_z(), -4)
    residual = None
    for _ in range(growth_cap + 1):
        solver.grow(z_min)
        residual, _ = solver.reduce(sigma)
        if not residual:
            w = solver.witness(sigma)
            assert w is not None and w.holomorphic_within(policy.u_deg_max), "witness recomposition failed"
            return CoboundaryDecision(True, witness=w)
        z_min *= 2
    keys = sorted(residual)
    cert_key = None
    for k in sorted(sigma.principal().to_vector()) + keys:
        if k in residual and not solver.reaching(k):
            cert_key = k
            break
    if cert_key is None:
        cert_key = keys[0]
    cert = ObstructionCertificate(cert_key, solver.reaching(cert_key), residual)
    return CoboundaryDecision(False, certificate=cert)


def reduce_representative(sigma: VectorCochain, bundle: BundleTransition | None = None, max_rounds: int = 64) -> VectorCochain:
    """Alternately drop U-holomorphic and V-holomorphic parts until nothing changes.

    Each step subtracts an explicit coboundary, so the class is preserved.
    """
    bundle = bundle or sigma.bundle
    t = bundle.transition
    if not t.invertible:
        raise NotInvertibleBase(t.inverse.reason)
    cur = sigma.principal()
    for _ in range(max_rounds):
        image_v = [t.to_V(x) for x in bundle.apply(cur.components)]
        hol_v = [x.holomorphic_split()[0] for x in image_v]
        if all(h.is_zero() for h in hol_v):
            return VectorCochain(cur.components, bundle)
        moved = mat_vec(bundle.inverse(), [t.to_U(h) for h in hol_v])
        nxt = VectorCochain(tuple(a - b for a, b in zip(cur.components, moved)), bundle).principal()
        if nxt == cur:
            return VectorCochain(cur.components, bundle)
        cur = nxt
    return VectorCochain(cur.components, bundle)


def _candidates(rank: int, z_min: int, u_deg: int) -> list[tuple]:
    out = []
    for i, s in _monomials(u_deg):
        for r in range(rank):
            for l in range(-1, z_min - 1, -1):
                out.append((r, l, i, s))
    return out


def _basis_at(solver: CechSolver, z_min: int, u_deg: int) -> list[tuple]:
    solver.grow(z_min)
    work = solver.echelon.copy()
    work.track = False
    chosen = []
    for key in _candidates(solver.rank, z_min, u_deg):
        if work.add({key: Fraction(1)}):
            chosen.append(key)
    return chosen


def h1_basis(
    bundle: BundleTransition,
    policy: TruncationPolicy = DEFAULT_POLICY,
    growth_cap: int = 4,
) -> CohomologyBasis:
    """Monomial basis of H^1 inside the window, grown in z until stable.

    Candidates are principal monomials e_r z^l u1^i u2^s; they are taken
    greedily in canonical order, so the basis prefers low fiber degree and
    the mildest pole.
    """
    worst = max((ser.u_degree() for _, ser in bundle.base.perturbations if ser), default=0)
    if worst > policy.u_deg_max:
        # the truncated gluing would silently drop the perturbation
        raise WindowTooSmall(f"perturbation of fiber degree {worst} exceeds the cap {policy.u_deg_max}")
    solver = solver_for(bundle, policy.u_deg_max)
    z_min = min(policy.z_min, -4)
    previous = None
    stable_runs = 0
    growths = 0
    while True:
        keys = _basis_at(solver, z_min, policy.u_deg_max)
        if previous is not None and keys == previous:
            stable_runs += 1
        else:
            stable_runs = 0
        window = TruncationPolicy(policy.u_deg_max, z_min, policy.z_max)
        if stable_runs >= 2 or (previous is not None and not keys and not previous):
            break
        if growths >= growth_cap:
            basis = _make_basis(keys, bundle, window, stabilized=False)
            raise WindowTooSmall("H^1 basis did not stabilize within the growth cap", partial=basis)
        previous = keys
        z_min *= 2
        growths += 1
    return _make_basis(keys, bundle, window, stabilized=True)


def _make_basis(keys, bundle, window, stabilized) -> CohomologyBasis:
    classes = [VectorCochain.unit(bundle.rank, r, l, i, s, bundle=bundle) for (r, l, i, s) in keys]
    return CohomologyBasis(classes, window, stabilized=stabilized)


def family_pattern(bases: dict[int, CohomologyBasis]) -> tuple[str | None, dict[int, int]]:
    """Detect families indexed by the u2 exponent across at least three degree caps."""
    counts = {d: b.dimension for d, b in bases.items()}
    if len(bases) < 3:
        return None, counts
    groups: dict[tuple, dict[int, int]] = {}
    for d, b in bases.items():
        for cls in b.classes:
            for r, comp in enumerate(cls.components):
                for (l, i, s), _ in comp.items():
                    g = groups.setdefault((r, l, i), {})
                    g[d] = max(g.get(d, -1), s)
    degs = sorted(bases)
    fams = []
    for (r, l, i), top in sorted(groups.items(), key=lambda kv: (kv[0][0], -kv[0][1], kv[0][2])):
        seq = [top.get(d, -1) for d in degs]
        if all(x >= 0 for x in seq) and all(b > a for a, b in zip(seq, seq[1:])):
            mono = render_terms([((l, i, 0), Fraction(1))]).replace("1", "", 0)
            mono = (mono + " u2^s") if mono != "1" else "u2^s"
            fams.append(f"e{r + 1}: {mono}")
    if not fams:
        return None, counts
    return "; ".join(fams), counts


def h1_growth(
    bundle: BundleTransition,
    policy: TruncationPolicy = DEFAULT_POLICY,
    degrees: Iterable[int] | None = None,
    growth_cap: int = 4,
) -> CohomologyBasis:
    """H^1 at several fiber-degree caps; reports a family pattern when dimensions grow."""
    degrees = sorted(degrees or (max(policy.u_deg_max - 2, 0), max(policy.u_deg_max - 1, 0), policy.u_deg_max))
    bases = {}
    for d in degrees:
        pol = TruncationPolicy(d, policy.z_min, policy.z_max)
        bases[d] = h1_basis(bundle, pol, growth_cap)
    pattern, counts = family_pattern(bases)
    top = bases[degrees[-1]]
    grows = len(set(counts.values())) > 1
    return CohomologyBasis(
        top.classes,
        top.certified_window,
        family_pattern=pattern if grows else None,
        stabilized=all(b.stabilized for b in bases.values()),
        counts_by_degree=counts,
    )


def h0_images(bundle: BundleTransition, key, n: int | None):
    """Principal part on V of M (e_c z^m u1^i u2^s), truncated mod fiber degree n+1."""
    c, m, i, s = key
    t = bundle.transition
    mono_v = t.to_V(MultiSeries({(m, i, s): 1}))
    vec = {}
    for r in range(bundle.rank):
        e = bundle.matrix[r][c]
        if not e:
            continue
        img = t.to_V(e) * mono_v
        for (l, a, b), coef in img.items():
            if l < 0 and (n is None or a + b <= n):
                vec[(r, l, a, b)] = coef
    return vec


class _H0Solver:
    def __init__(self, bundle: BundleTransition, n: int | None, u_deg: int):
        t = bundle.transition
        if not t.invertible:
            raise NotInvertibleBase(t.inverse.reason)
        self.bundle = bundle
        self.n = n
        self.deg = n if n is not None else u_deg
        t = bundle.transition
        self.mv = [[t.to_V(e) if e else None for e in row] for row in bundle.matrix]
        self._u_v: dict = {}

    def image(self, key) -> dict:
        c, m, i, s = key
        mono = self._u_v.get((i, s))
        if mono is None:
            mono = self._u_v[(i, s)] = self.bundle.transition.to_V(MultiSeries({(0, i, s): 1}))
        vec = {}
        for r in range(self.bundle.rank):
            e = self.mv[r][c]
            if e is None:
                continue
            img = e * mono
            for (l, a, b), coef in img.items():
                l2 = l - m
                if l2 < 0 and (self.n is None or a + b <= self.n):
                    vec[(r, l2, a, b)] = coef
        return vec

    def unknowns(self, z_max: int, min_deg: int = 0) -> list[tuple]:
        return [
            (c, m, i, s)
            for i, s in _monomials(self.deg)
            if i + s >= min_deg
            for c in range(self.bundle.rank)
            for m in range(z_max + 1)
        ]

    def kernel(self, z_max: int) -> list[dict]:
        keys = self.unknowns(z_max)
        e = Echelon(track=True)
        out = []
        for key in keys:
            v, p = e.reduce(self.image(key), {key: Fraction(1)})
            if not v:
                out.append(p)
            else:
                k = min(v)
                inv = 1 / v[k]
                e.rows[k] = {kk: c * inv for kk, c in v.items()}
                e.prov[k] = {lab: c * inv for lab, c in p.items()}
        return out


def _section_from(rel: dict, rank: int, bundle) -> VectorCochain:
    parts: list[dict] = [{} for _ in range(rank)]
    for (c, m, i, s), coef in rel.items():
        parts[c][(m, i, s)] = parts[c].get((m, i, s), 0) + coef
    return VectorCochain(tuple(MultiSeries(p) for p in parts), bundle)


def _h0_start(bundle: BundleTransition, n: int | None) -> int:
    k1 = abs(bundle.base.k1)
    j = 0
    for row in bundle.matrix:
        for e in row:
            if e:
                j = max(j, abs(e.min_z()), abs(e.max_z()))
    return j + k1 * (n or 0) + 2


def h0_basis(
    bundle: BundleTransition,
    policy: TruncationPolicy = DEFAULT_POLICY,
    neighborhood: int | None = None,
    growth_cap: int = 4,
) -> CohomologyBasis:
    """Sections holomorphic on U whose transport is holomorphic on V.

    With ``neighborhood = N`` everything is computed modulo fiber degree N+1.
    """
    solver = _H0Solver(bundle, neighborhood, policy.u_deg_max)
    z_max = _h0_start(bundle, neighborhood)
    prev = None
    stable = 0
    for _ in range(growth_cap + 2):
        rels = solver.kernel(z_max)
        dim = len(rels)
        if prev is not None and dim == prev:
            stable += 1
        else:
            stable = 0
        if stable >= 1:
            break
        prev = dim
        z_max *= 2
    else:
        window = TruncationPolicy(solver.deg, -z_max, z_max)
        raise WindowTooSmall("H^0 did not stabilize", partial=len(rels))
    window = TruncationPolicy(solver.deg, -z_max, z_max)
    sections = [_section_from(r, bundle.rank, bundle) for r in rels]
    return CohomologyBasis(sections, window, stabilized=True)


def section_extends(
    bundle: BundleTransition,
    section0: Sequence[MultiSeries],
    neighborhood: int,
    z_max: int | None = None,
):
    """Find a correction of fiber degree 1..N making ``section0`` a section on the N-th neighborhood.

    Returns the extended section or None.
    """
    from .linalg import solve_affine

    solver = _H0Solver(bundle, neighborhood, neighborhood)
    z_max = z_max or _h0_start(bundle, neighborhood) * 2
    keys = solver.unknowns(z_max, min_deg=1)
    cols = [solver.image(k) for k in keys]
    rhs = {}
    for c, comp in enumerate(section0):
        for (m, i, s), coef in comp.items():
            for k, v in solver.image((c, m, i, s)).items():
                rhs[k] = rhs.get(k, 0) - coef * v
    rhs = {k: v for k, v in rhs.items() if v}
    sol, _ = solve_affine(cols, rhs)
    if sol is None:
        return None
    corr = _section_from({keys[idx]: c for idx, c in sol.items()}, bundle.rank, bundle)
    return VectorCochain(tuple(a + b for a, b in zip(section0, corr.components)), bundle)


def ext_group_basis(
    j1: int,
    j2: int,
    spec: ThreefoldSpec,
    policy: TruncationPolicy = DEFAULT_POLICY,
    growth_cap: int = 4,
) -> CohomologyBasis:
    """Ext^1(O(j2), O(j1)) as H^1(O(j1 - j2)); classes are returned as cocycles p = z^j2 sigma."""
    line = line_bundle_transition(j1 - j2, spec)
    basis = h1_basis(line, policy, growth_cap)
    j = j2
    basis.ext_classes = [ExtensionClass(j, c.components[0].shift(j2)) for c in basis.classes]
    return basis


def nonzero_monomials(bundle: BundleTransition, policy: TruncationPolicy = DEFAULT_POLICY) -> list[tuple]:
    """Principal candidate monomials that are individually not coboundaries."""
    basis = h1_basis(bundle, policy)
    solver = solver_for(bundle, policy.u_deg_max)
    z_min = basis.certified_window.z_min
    out = []
    for key in _candidates(bundle.rank, z_min, policy.u_deg_max):
        if not solver.echelon.contains({key: Fraction(1)}):
            out.append(key)
    return out


def check_witness(
    sigma: VectorCochain,
    alpha: Sequence[MultiSeries],
    beta: Sequence[MultiSeries],
    bundle: BundleTransition | None = None,
) -> bool:
    """Exact check of ``sigma == alpha + M^-1 beta`` with alpha on U and beta on V."""
    bundle = bundle or sigma.bundle
    if not all(a.is_holomorphic() for a in alpha) or not all(b.is_holomorphic() for b in beta):
        return False
    t = bundle.transition
    moved = mat_vec(bundle.inverse(), [t.to_U(b) for b in beta])
    return all(s == a + m for s, a, m in zip(sigma.components, alpha, moved))

"""Reference checks for the W_k engine, runnable as one suite.

Every check returns a ``CheckResult``; ``status`` is ``pass``, ``fail`` or
``recorded`` (informational comparison, never counted as a failure).
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

from .bundles import (
    check_shift_witness,
    distinguish_bundles,
    extension_bundle,
    first_neighborhood_moduli,
    formal_section_dimension,
    section_extension,
    shift_equivalent,
    splitting_exponents,
    verify_wq_identity,
)
from .cech import (
    DEFAULT_POLICY,
    WindowTooSmall,
    VectorCochain,
    check_witness,
    h1_basis,
    is_coboundary,
    nonzero_monomials,
    reduce_representative,
    solver_for,
)
from .deform import (
    AffineIsoProblem,
    MapSpec,
    NotIntegrable,
    affine_bundle_iso,
    classify_rigidity,
    integrate_cocycle,
    verify_map_holomorphic,
)
from .geometry import (
    ExtensionClass,
    ThreefoldSpec,
    W,
    W2_tau,
    W2_y,
    endomorphism_transition,
    line_bundle_transition,
    tangent_jacobian,
    transition_of,
)
from .linalg import rank
from .series import MultiSeries, TruncationPolicy, parse_series

P = parse_series

# reference values, compared but not enforced
REPORTED_H0_E1 = 5
REPORTED_H0_E2 = 6


@dataclass
class CheckResult:
    name: str
    expected: str
    computed: str
    status: str
    detail: str = ""

    def to_json(self) -> dict:
        return asdict(self)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _cochain(b, comps):
    return VectorCochain.of(comps, b)


def check_w1_rigid(policy: TruncationPolicy) -> CheckResult:
    basis = h1_basis(tangent_jacobian(W(1)), policy)
    ok = basis.dimension == 0 and basis.stabilized
    return CheckResult("w1_rigid", "h1 = 0, stabilized", f"h1 = {basis.dimension}, stabilized={basis.stabilized}", _status(ok))


def check_w2y_dimensions(policy: TruncationPolicy) -> CheckResult:
    got, ok = [], True
    for y in range(0, 7):
        basis = h1_basis(tangent_jacobian(W2_y(y)), policy)
        want = [_cochain(None, ["0", f"z^-1 u2^{s}", "0"]).components for s in range(y - 1)]
        have = [c.components for c in basis.classes]
        got.append(f"y={y}:{basis.dimension}")
        ok &= basis.dimension == max(y - 1, 0) and have == want
    return CheckResult("w2y_h1", "y-1 for y>=2 (basis sigma_0..sigma_y-2), 0 for y<=1", " ".join(got), _status(ok))


def check_case_witnesses(policy: TruncationPolicy) -> CheckResult:
    """Engine witnesses recompose; the three hand-written witnesses verify too."""
    notes, ok = [], True
    cases = [
        # (y, s, hand-written U-holomorphic shift, V-side vector)
        (3, 3, ["-z", "0", "-2/3 u2"], ["xi", "-2 v1", "-2/3 v2"]),
        (3, 2, ["0", "0", "-1/3"], ["0", "0", "-1/3"]),
        (0, 2, ["z u2^2", "0", "0"], ["-xi v2^2", "2 v1 v2^2", "0"]),
    ]
    for y, s, shift, vside in cases:
        b = tangent_jacobian(W2_y(y))
        sigma = _cochain(b, ["0", f"z^-1 u2^{s}", "0"])
        dec = is_coboundary(sigma, b, policy)
        engine_ok = bool(dec) and check_witness(sigma, dec.witness.alpha.components, dec.witness.beta, b)
        # hand-written form: sigma + shift is mapped to vside, so alpha = -shift
        alpha = [P(x, "U").scale(-1) for x in shift]
        beta = [P(x, "V") for x in vside]
        shown_ok = check_witness(sigma, alpha, beta, b)
        ok &= engine_ok and shown_ok
        w = dec.witness.render() if dec else {}
        notes.append(f"y={y},s={s}: engine {w.get('alpha')}|{w.get('beta')} ok={engine_ok}, hand-written ok={shown_ok}")
    return CheckResult("case_witnesses", "all witnesses recompose exactly", "; ".join(notes), _status(ok))


def check_w3_classes(policy: TruncationPolicy) -> CheckResult:
    b = tangent_jacobian(W(3))
    classes = [_cochain(b, ["0", f"z^{l} u2^{s}", "0"]) for l in (-1, -2) for s in range(5)]
    nonzero = [not is_coboundary(c, b, policy) for c in classes]
    solver = solver_for(b, policy.u_deg_max)
    residuals = [solver.reduce(c)[0] for c in classes]
    r = rank(residuals)
    ok = all(nonzero) and r == len(classes)
    return CheckResult("w3_classes", "10 non-coboundaries, rank 10", f"{sum(nonzero)} non-coboundaries, rank {r}", _status(ok))


def check_integrability() -> CheckResult:
    w3 = W(3)
    bad = []
    for l in range(-4, 0):
        for e in range(4):
            c2 = ["0", f"z^{l} u1^{e}", "0"]
            c3 = ["0", "0", f"z^{l} u2^{e}"]
            r2 = integrate_cocycle(w3, [P(x) for x in c2])
            r3 = integrate_cocycle(w3, [P(x) for x in c3])
            if bool(r2) != (e == 0) or bool(r3) != (e == 0):
                bad.append((l, e))
    return CheckResult("integrability", "slot 2 iff i = 0; slot 3 iff s = 0", f"{32 - len(bad)}/32 agree", _status(not bad))


def check_family() -> CheckResult:
    ok = True
    for k in range(2, 6):
        ts = [Fraction(q + 1, q + 2) for q in range(k)]
        comp = MultiSeries.zero()
        for q, t in enumerate(ts):
            comp = comp + MultiSeries.monomial(q - k, 0, 1, t)
        new = integrate_cocycle(W(k), [MultiSeries.zero(), comp, MultiSeries.zero()])
        want = MultiSeries.monomial(k, 1, 0)
        for q, t in enumerate(ts):
            want = want + MultiSeries.monomial(q, 0, 1, t)
        ok &= not isinstance(new, NotIntegrable) and transition_of(new).forward[1] == want
    return CheckResult("family", "v1 = z^k u1 + sum t_q z^q u2, k=2..5", "match" if ok else "mismatch", _status(ok))


def check_wq() -> CheckResult:
    ok, seen = True, 0
    for k in range(2, 7):
        for q in range(1, k):
            m = [[{k: Fraction(1)}, {q: Fraction(1)}], [{}, {2 - k: Fraction(1)}]]
            st = splitting_exponents(m)
            ok &= verify_wq_identity(k, q) and st == tuple(sorted((q, 2 - q), reverse=True))
            seen += 1
    return CheckResult("wq_identity", "identity and splitting (q, 2-q) for 0<q<k<=6", f"{seen} pairs, ok={ok}", _status(ok))


def check_ext_generators(policy: TruncationPolicy) -> CheckResult:
    spec = W2_tau("u2")
    line = line_bundle_transition(-4, spec)
    d = policy.u_deg_max
    keys = nonzero_monomials(line, policy)
    # p = z^2 sigma
    got = {(l + 2, i, s) for (_, l, i, s) in keys if s <= d - 2}
    want = {(e, i, s) for s in range(d - 1) for (e, i) in ((1, 0), (0, 0), (-1, 0), (1, 1), (0, 1), (1, 2))}
    ok = got == want
    extra = sorted(got - want)
    missing = sorted(want - got)
    main = CheckResult(
        "ext_generators",
        "{z u2^s, u2^s, z^-1 u2^s, z u1 u2^s, u1 u2^s, z u1^2 u2^s}",
        f"{len(got)} monomials; extra={extra[:4]} missing={missing[:4]} ({len(missing)} total)",
        _status(ok),
    )
    # the listed monomials (all s in the window) still span H^1
    solver = solver_for(line, d)
    listed = [{(0, e - 2, i, s): Fraction(1)} for (e, i, s) in
              {(e, i, s) for s in range(d + 1) for (e, i) in ((1, 0), (0, 0), (-1, 0), (1, 1), (0, 1), (1, 2)) if i + s <= d}]
    span = solver.echelon.copy()
    span.track = False
    for v in listed:
        span.add(v)
    z_min = min(k[1] for k in keys) if keys else -1
    spans = all(span.contains({(0, l, i, s): Fraction(1)})
                for l in range(z_min, 0) for s in range(d + 1) for i in range(d + 1 - s))
    rec = CheckResult("ext_generators_span", "listed monomials span H^1", f"span={spans}", "recorded")
    return [main, rec]


def check_moduli(policy: TruncationPolicy) -> CheckResult:
    rows, ok = [], True
    for k in (1, 2, 3):
        for j in (1, 2, 3, 4):
            r = first_neighborhood_moduli(j, W(k), policy)
            want = 4 * (j - 1) if j >= 2 else k - 1
            ok &= r.count == want and r.projective_dimension == want - 1
            rows.append(f"W{k},j={j}:{r.projective_dimension}")
    return CheckResult("moduli", "4j-5 for j>=2; -1/0/1 for j=1", " ".join(rows), _status(ok))


def check_deformed_moduli(policy: TruncationPolicy) -> CheckResult:
    spec = W2_tau("u2")
    p, q = ExtensionClass(2, P("z^-1 u2")), ExtensionClass(2, P("u1"))
    dec = shift_equivalent(p, q, spec, policy)
    witness_ok = bool(dec) and check_shift_witness(p, q, dec.witness, spec) and dec.witness.beta == P("-v1", "V")
    r = first_neighborhood_moduli(2, spec, policy)
    dim_ok = 1 <= r.projective_dimension < 3
    e1, e2 = extension_bundle(2, "z u1", spec), extension_bundle(2, "z u2", spec)
    verdict = distinguish_bundles(e1, e2, policy)
    v_ok = verdict.verdict == "NotIsomorphic"
    computed = (
        f"witness={dec.witness.render() if dec else None} ok={witness_ok}; "
        f"dim={r.projective_dimension}; verdict={verdict.verdict}"
    )
    return CheckResult(
        "deformed_moduli",
        "shift witness beta=-v1; 1 <= dim < 3; NotIsomorphic",
        computed,
        _status(witness_ok and dim_ok and v_ok),
    )


def section_counts(policy: TruncationPolicy):
    spec = W2_tau("u2")
    e1, e2 = extension_bundle(2, "z u1", spec), extension_bundle(2, "z u2", spec)
    s0 = [MultiSeries.zero(), MultiSeries.const(1)]
    ext1 = section_extension(e1, s0, 1)
    ext2 = section_extension(e2, s0, 1)
    d1, _ = formal_section_dimension(e1, 1, policy)
    d2, _ = formal_section_dimension(e2, 1, policy)
    return ext1, ext2, d1, d2


def check_sections(policy: TruncationPolicy) -> list[CheckResult]:
    ext1, ext2, d1, d2 = section_counts(policy)
    ok = ext1 is None and ext2 is not None and d1 != d2
    main = CheckResult(
        "sections",
        "s0 extends for E2 only; h0 differ",
        f"E1 extension={ext1}; E2 extension={ext2}; h0=({d1}, {d2})",
        _status(ok),
    )
    rec = CheckResult(
        "sections_absolute",
        f"reported ({REPORTED_H0_E1}, {REPORTED_H0_E2})",
        f"engine ({d1}, {d2})",
        "recorded",
    )
    return [main, rec]


def phi_bar_pair(ts: dict[int, Fraction]):
    """Source, target and map for the deformed map with parameters t_s."""
    tau = MultiSeries({(0, 0, s): Fraction(t) for s, t in ts.items()})
    source = ThreefoldSpec(3, -1, (("v1", tau.shift(2)),))
    target = W2_tau(tau)
    third = MultiSeries.monomial(2, 1, 1) + tau.shift(1, 0, 1)
    m = MapSpec((P("z"), P("u1"), third), (P("xi", "V"), P("xi v1", "V"), P("v1 v2", "V")))
    return m, source, target


def check_maps() -> CheckResult:
    phi = MapSpec.parse(["z", "z u1^2", "u2"], ["xi", "v1^2", "xi v2"])
    psi = MapSpec.parse(["z", "u1", "z^2 u1 u2"], ["xi", "xi v1", "v1 v2"])
    r1 = verify_map_holomorphic(phi, W(2), W(3))
    r2 = verify_map_holomorphic(psi, W(3), W(2))
    m, src, tgt = phi_bar_pair({0: Fraction(1), 1: Fraction(2)})
    r3 = verify_map_holomorphic(m, src, tgt)
    detail = "; ".join(r3.mismatches)
    return CheckResult(
        "maps",
        "phi, psi, phi-bar(1,2) holomorphic",
        f"phi={r1.ok} psi={r2.ok} phi-bar={r3.ok}",
        _status(r1.ok and r2.ok and r3.ok),
        detail,
    )


def check_affine() -> CheckResult:
    rows, ok = [], True
    for j1, j2 in ((1, 2), (1, 3), (2, 3)):
        v = affine_bundle_iso(AffineIsoProblem(j1, j2, j2))
        good = v.verdict == "NotIsomorphic" and v.forced_A == MultiSeries.monomial(0, 0, j2 - j1)
        ok &= good
        rows.append(f"({j1},{j2}):{v.verdict} A={v.forced_A.render() if v.forced_A else None}")
    same = affine_bundle_iso(AffineIsoProblem(2, 2, 2))
    ok &= same.verdict == "Isomorphic"
    rows.append(f"(2,2):{same.verdict}")
    return CheckResult("affine_iso", "NotIsomorphic with A = u2^(j2-j1)", " ".join(rows), _status(ok))


RIGIDITY_EXPECTED = {
    (0, -1): "zero",
    (0, 0): "zero",
    (2, 1): "finite",
    (3, 2): "finite",
    (2, -1): "growingPattern",
    (3, 0): "growingPattern",
    (3, -1): "growingPattern",
}


def check_rigidity(policy: TruncationPolicy) -> CheckResult:
    rows, ok = [], True
    for (k1, k2), want in RIGIDITY_EXPECTED.items():
        r = classify_rigidity(k1, k2, policy)
        ok &= r.kind == want
        rows.append(f"({k1},{k2}):{r.label()}")
    return CheckResult("rigidity", "zero/zero/finite/finite/growing x3", " ".join(rows), _status(ok))


END_CLASSES = [(4, "z^-1 u1 u2^{s}"), (4, "z^-1 u2^{s}"), (4, "z^-2 u2^{s}"), (4, "z^-3 u2^{s}"), (6, "z^-1 u2^{s}"), (7, "z^-1 u2^{s}")]


def end_class_status(policy: TruncationPolicy, transposed: bool = False) -> dict:
    t = tangent_jacobian(W(2))
    e = endomorphism_transition(t, transposed=transposed)
    out = {}
    for pos, text in END_CLASSES:
        for s in range(3):
            comps = ["0"] * 9
            comps[pos - 1] = text.format(s=s)
            out[(pos, text.format(s=s))] = not is_coboundary(VectorCochain.of(comps, e), e, policy)
    return out


def check_end(policy: TruncationPolicy) -> list[CheckResult]:
    st = end_class_status(policy)
    zero = [f"{k[1]}@{k[0]}" for k, v in st.items() if not v]
    main = CheckResult(
        "end_tangent",
        "18 listed classes are non-coboundaries",
        f"{sum(st.values())}/18 non-coboundaries; coboundaries: {zero}",
        _status(all(st.values())),
    )
    alt = end_class_status(policy, transposed=True)
    rec = CheckResult(
        "end_tangent_transposed",
        "listed classes under the transposed fiber convention",
        f"{sum(alt.values())}/18 non-coboundaries",
        "recorded",
    )
    return [main, rec]


# property suites -------------------------------------------------------------

def _random_series(rng: random.Random, chart: str, zlo: int, zhi: int, deg: int, terms: int = 3) -> MultiSeries:
    out = {}
    for _ in range(rng.randint(1, terms)):
        d = rng.randint(0, deg)
        i = rng.randint(0, d)
        out[(rng.randint(zlo, zhi), i, d - i)] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return MultiSeries(out, chart)


PROPERTY_GEOMETRIES = {"W1": W(1), "W2(3)": W2_y(3), "W3": W(3), "W2(u2)": W2_tau("u2")}


def property_roundtrip(n: int, policy: TruncationPolicy, seed: int = 0) -> tuple[int, int]:
    rng = random.Random(seed)
    good = total = 0
    for name, spec in PROPERTY_GEOMETRIES.items():
        b = tangent_jacobian(spec)
        t = b.transition
        for _ in range(n):
            alpha = [_random_series(rng, "U", 0, 3, 2) for _ in range(3)]
            beta = [_random_series(rng, "V", 0, 3, 2) for _ in range(3)]
            moved = b.apply_inverse([t.to_U(x) for x in beta])
            comps = tuple((a + m).restrict_u_degree(policy.u_deg_max) for a, m in zip(alpha, moved))
            total += 1
            good += bool(is_coboundary(VectorCochain(comps, b), b, policy))
    return good, total


def property_substitution(n: int, seed: int = 1) -> tuple[int, int]:
    rng = random.Random(seed)
    good = total = 0
    for spec in PROPERTY_GEOMETRIES.values():
        t = transition_of(spec)
        for _ in range(n // len(PROPERTY_GEOMETRIES) + 1):
            f = _random_series(rng, "U", -3, 3, 3)
            g = _random_series(rng, "U", -3, 3, 3)
            ok = t.to_V(f * g) == t.to_V(f) * t.to_V(g)
            ok &= t.to_V(f + g) == t.to_V(f) + t.to_V(g)
            ok &= t.to_U(t.to_V(f)) == f
            total += 1
            good += ok
    return good, total


def property_reduce(n: int, policy: TruncationPolicy, seed: int = 2) -> tuple[int, int]:
    rng = random.Random(seed)
    good = total = 0
    for spec in (W2_y(3), W(3)):
        b = tangent_jacobian(spec)
        for _ in range(n // 2):
            sigma = VectorCochain(tuple(_random_series(rng, "U", -4, 1, 3) for _ in range(3)), b)
            r1 = reduce_representative(sigma)
            r2 = reduce_representative(r1)
            diff = VectorCochain(tuple((a - c).restrict_u_degree(policy.u_deg_max) for a, c in zip(sigma.components, r1.components)), b)
            total += 1
            good += r1 == r2 and bool(is_coboundary(diff, b, policy))
    return good, total


def property_shift(n: int, policy: TruncationPolicy, seed: int = 3) -> tuple[int, int]:
    rng = random.Random(seed)
    spec = W2_tau("u2")
    line = line_bundle_transition(-4, spec)
    t = line.transition
    good = total = 0

    def partner(p: ExtensionClass) -> ExtensionClass:
        lam = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
        b = _random_series(rng, "U", 0, 2, 2)
        beta = _random_series(rng, "V", 0, 2, 2)
        q = p.p + b.shift(p.j) + t.to_U(beta).shift(-p.j)
        return ExtensionClass(p.j, q.restrict_u_degree(policy.u_deg_max).scale(1 / lam))

    for _ in range(n):
        p = ExtensionClass(2, _random_series(rng, "U", -1, 1, 2))
        q = partner(p)
        r = partner(q)
        ok = True
        for a, c in ((p, p), (p, q), (q, p), (q, r), (p, r)):
            dec = shift_equivalent(a, c, spec, policy)
            if dec:
                w = dec.witness
                ok &= check_shift_witness(a, c, w, spec) or _within(a, c, w, spec, policy)
            else:
                ok = False
        total += 1
        good += ok
    return good, total


def _within(a: ExtensionClass, c: ExtensionClass, w, spec, policy) -> bool:
    # witnesses are exact modulo fiber degree above the window
    t = transition_of(spec)
    lhs = a.p + w.b.shift(a.j) + t.to_U(w.beta).shift(-a.j)
    d = policy.u_deg_max
    return (lhs - c.p.scale(w.lam)).restrict_u_degree(d).principal_part().is_zero()


def check_properties(policy: TruncationPolicy, n: int = 200) -> CheckResult:
    parts = {
        "roundtrip": property_roundtrip(n, policy),
        "substitution": property_substitution(n),
        "reduce": property_reduce(n, policy),
        "shift": property_shift(n // 4, policy),
    }
    ok = all(g == t for g, t in parts.values())
    text = " ".join(f"{k}={g}/{t}" for k, (g, t) in parts.items())
    return CheckResult("properties", "100%", text, _status(ok))


CHECKS: list[tuple[str, Callable]] = [
    ("1", lambda pol: check_w1_rigid(pol)),
    ("2", lambda pol: check_w2y_dimensions(pol)),
    ("3", lambda pol: check_case_witnesses(pol)),
    ("4", lambda pol: check_w3_classes(pol)),
    ("5", lambda pol: check_integrability()),
    ("6", lambda pol: check_family()),
    ("7", lambda pol: check_wq()),
    ("8", lambda pol: check_ext_generators(pol)),
    ("9", lambda pol: check_moduli(pol)),
    ("10", lambda pol: check_deformed_moduli(pol)),
    ("11", lambda pol: check_sections(pol)),
    ("12", lambda pol: check_maps()),
    ("13", lambda pol: check_affine()),
    ("14", lambda pol: check_rigidity(pol)),
    ("15", lambda pol: check_end(pol)),
    ("16", lambda pol: check_properties(pol)),
]


CHECK_NAMES = {
    "1": "w1_rigid", "2": "w2y_h1", "3": "case_witnesses", "4": "w3_classes",
    "5": "integrability", "6": "family", "7": "wq_identity", "8": "ext_generators",
    "9": "moduli", "10": "deformed_moduli", "11": "sections", "12": "maps",
    "13": "affine_iso", "14": "rigidity", "15": "end_tangent", "16": "properties",
}


def run_suite(policy: TruncationPolicy = DEFAULT_POLICY, only: set[str] | None = None) -> list[CheckResult]:
    results = []
    for key, fn in CHECKS:
        if only and key not in only:
            continue
        try:
            out = fn(policy)
        except WindowTooSmall as exc:
            out = CheckResult(CHECK_NAMES.get(key, "check"), "", "", "window", str(exc))
        for r in out if isinstance(out, list) else [out]:
            r.name = f"{key}:{r.name}"
            results.append(r)
    return results

"""Sparse Laurent series in z with polynomial dependence on two fiber variables.

A :class:`MultiSeries` is a finite map from exponent triples ``(l, i, s)`` to
exact rationals, read as ``sum c * z^l u1^i u2^s``.  The same algebra serves
both charts; the chart tag only changes the display names (``xi, v1, v2`` on
the V chart).  Every value carries a :class:`TruncationPolicy`; monomials
falling outside the window are dropped and the ``touched`` flag records it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

Rational = Union[int, Fraction]

CHART_NAMES = {"U": ("z", "u1", "u2"), "V": ("xi", "v1", "v2")}
VAR_INDEX = {"z": 0, "u1": 1, "u2": 2, "xi": 0, "v1": 1, "v2": 2}


class ChartMismatch(ValueError):
    pass


class NonInvertibleSubstitution(ArithmeticError):
    pass


class Exponent(NamedTuple):
    z: int
    u1: int
    u2: int

    @property
    def u_degree(self) -> int:
        return self.u1 + self.u2


def canonical_key(e: Sequence[int]) -> tuple[int, int, int, int]:
    """Sort key: u-degree, then u1, then u2, then the z exponent."""
    return (e[1] + e[2], e[1], e[2], e[0])


@dataclass(frozen=True)
class TruncationPolicy:
    u_deg_max: int
    z_min: int
    z_max: int

    def __post_init__(self):
        if self.u_deg_max < 0:
            raise ValueError("u_deg_max must be nonnegative")
        if not self.z_min <= 0 <= self.z_max:
            raise ValueError("window must satisfy z_min <= 0 <= z_max")

    def contains(self, e: Sequence[int]) -> bool:
        return self.z_min <= e[0] <= self.z_max and e[1] + e[2] <= self.u_deg_max

    def intersect(self, other: "TruncationPolicy") -> "TruncationPolicy":
        if other is self:
            return self
        return TruncationPolicy(
            min(self.u_deg_max, other.u_deg_max),
            max(self.z_min, other.z_min),
            min(self.z_max, other.z_max),
        )

    def widened(self, dz: int) -> "TruncationPolicy":
        return TruncationPolicy(self.u_deg_max, self.z_min - dz, self.z_max + dz)

    def as_dict(self) -> dict:
        return {"u_deg": self.u_deg_max, "z_min": self.z_min, "z_max": self.z_max}


# Large enough that nothing in this package ever touches it.
EXACT = TruncationPolicy(10**6, -(10**9), 10**9)


class MultiSeries:
    __slots__ = ("_terms", "chart", "policy", "touched", "_hash")

    def __init__(
        self,
        terms: Mapping[Sequence[int], Rational] | None = None,
        chart: str = "U",
        policy: TruncationPolicy = EXACT,
        touched: bool = False,
    ):
        if chart not in CHART_NAMES:
            raise ValueError(f"unknown chart {chart!r}")
        clean: dict[tuple[int, int, int], Fraction] = {}
        for e, c in (terms or {}).items():
            if c == 0:
                continue
            e = (int(e[0]), int(e[1]), int(e[2]))
            if e[1] < 0 or e[2] < 0:
                raise ValueError(f"negative fiber exponent in {e}")
            if policy.contains(e):
                clean[e] = c if isinstance(c, Fraction) else Fraction(c)
            else:
                touched = True
        self._terms = clean
        self.chart = chart
        self.policy = policy
        self.touched = touched
        self._hash = None

    @classmethod
    def _raw(cls, terms, chart, policy, touched=False):
        # trusted constructor: terms already clean and inside the window
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.chart = chart
        obj.policy = policy
        obj.touched = touched
        obj._hash = None
        return obj

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, chart="U", policy=EXACT):
        return cls._raw({}, chart, policy)

    @classmethod
    def const(cls, c: Rational, chart="U", policy=EXACT):
        return cls({(0, 0, 0): c}, chart, policy)

    @classmethod
    def monomial(cls, l: int, i: int = 0, s: int = 0, coef: Rational = 1, chart="U", policy=EXACT):
        return cls({(l, i, s): coef}, chart, policy)

    @classmethod
    def var(cls, name: str, chart: str | None = None, policy=EXACT):
        idx = VAR_INDEX[name]
        if chart is None:
            chart = "V" if name in ("xi", "v1", "v2") else "U"
        e = [0, 0, 0]
        e[idx] = 1
        return cls({tuple(e): 1}, chart, policy)

    # -- inspection ------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int, int], Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, l: int, i: int = 0, s: int = 0) -> Fraction:
        return self._terms.get((l, i, s), Fraction(0))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def min_z(self) -> int | None:
        return min((e[0] for e in self._terms), default=None)

    def max_z(self) -> int | None:
        return max((e[0] for e in self._terms), default=None)

    def u_degree(self) -> int:
        return max((e[1] + e[2] for e in self._terms), default=-1)

    def min_u_degree(self) -> int | None:
        return min((e[1] + e[2] for e in self._terms), default=None)

    def depends_on(self, var: int | str) -> bool:
        idx = VAR_INDEX[var] if isinstance(var, str) else var
        return any(e[idx] != 0 for e in self._terms)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_holomorphic(self) -> bool:
        return all(e[0] >= 0 for e in self._terms)

    def holomorphic_split(self) -> tuple["MultiSeries", "MultiSeries"]:
        hol = {e: c for e, c in self._terms.items() if e[0] >= 0}
        pri = {e: c for e, c in self._terms.items() if e[0] < 0}
        return (
            MultiSeries._raw(hol, self.chart, self.policy, self.touched),
            MultiSeries._raw(pri, self.chart, self.policy, self.touched),
        )

    def principal_part(self) -> "MultiSeries":
        return self.holomorphic_split()[1]

    def restrict_u_degree(self, n: int) -> "MultiSeries":
        """Reduce modulo the ideal of fiber monomials of degree > n."""
        return MultiSeries._raw(
            {e: c for e, c in self._terms.items() if e[1] + e[2] <= n}, self.chart, self.policy, self.touched
        )

    def u_homogeneous(self, n: int) -> "MultiSeries":
        return MultiSeries._raw(
            {e: c for e, c in self._terms.items() if e[1] + e[2] == n}, self.chart, self.policy, self.touched
        )

    def at_zero_section(self) -> dict[int, Fraction]:
        """Set the fiber variables to zero; returns a univariate Laurent polynomial."""
        return {e[0]: c for e, c in self._terms.items() if e[1] == 0 and e[2] == 0}

    def retag(self, chart: str) -> "MultiSeries":
        return MultiSeries._raw(self._terms, chart, self.policy, self.touched)

    def with_policy(self, policy: TruncationPolicy) -> "MultiSeries":
        return MultiSeries(self._terms, self.chart, policy, self.touched)

    # -- arithmetic ------------------------------------------------------
    def _check(self, other: "MultiSeries"):
        if self.chart != other.chart:
            raise ChartMismatch(f"cannot combine {self.chart}-chart and {other.chart}-chart series")

    def _coerce(self, other) -> "MultiSeries":
        if isinstance(other, MultiSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return MultiSeries.const(other, self.chart, self.policy)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        pol = self.policy.intersect(other.policy)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        touched = self.touched or other.touched
        if pol is not self.policy or pol is not other.policy:
            return MultiSeries(out, self.chart, pol, touched)
        return MultiSeries._raw(out, self.chart, pol, touched)

    __radd__ = __add__

    def __neg__(self):
        return MultiSeries._raw({e: -c for e, c in self._terms.items()}, self.chart, self.policy, self.touched)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Rational) -> "MultiSeries":
        if c == 0:
            return MultiSeries.zero(self.chart, self.policy)
        c = Fraction(c)
        return MultiSeries._raw({e: v * c for e, v in self._terms.items()}, self.chart, self.policy, self.touched)

    def shift(self, dz: int = 0, di: int = 0, ds: int = 0) -> "MultiSeries":
        """Multiply by the monomial z^dz u1^di u2^ds (di, ds >= 0)."""
        return MultiSeries(
            {(e[0] + dz, e[1] + di, e[2] + ds): c for e, c in self._terms.items()},
            self.chart,
            self.policy,
            self.touched,
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, MultiSeries):
            return NotImplemented
        self._check(other)
        pol = self.policy.intersect(other.policy)
        out: dict[tuple[int, int, int], Fraction] = {}
        touched = self.touched or other.touched
        for (a0, a1, a2), ca in self._terms.items():
            for (b0, b1, b2), cb in other._terms.items():
                e = (a0 + b0, a1 + b1, a2 + b2)
                if not pol.contains(e):
                    touched = True
                    continue
                v = out.get(e, 0) + ca * cb
                if v:
                    out[e] = v
                else:
                    del out[e]
        return MultiSeries._raw(out, self.chart, pol, touched)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiSeries":
        if n < 0:
            return self.inverse() ** (-n)
        result = MultiSeries.const(1, self.chart, self.policy)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> "MultiSeries":
        """Inverse of c*z^l*(1 + r) where every term of r has positive u-degree.

        The geometric series terminates inside the window because r is
        nilpotent modulo the u-degree cap.
        """
        lead = [e for e in self._terms if e[1] == 0 and e[2] == 0]
        if len(lead) != 1:
            raise NonInvertibleSubstitution(f"series {self.render()} has no unit monomial leading term")
        l = lead[0][0]
        c = self._terms[lead[0]]
        inv_lead = MultiSeries._raw({(-l, 0, 0): 1 / c}, self.chart, self.policy)
        r = self * inv_lead - 1
        if r.is_zero():
            return inv_lead
        if self.policy.u_deg_max >= EXACT.u_deg_max:
            raise NonInvertibleSubstitution("non-monomial inverse needs a finite u-degree window")
        total = MultiSeries.const(1, self.chart, self.policy)
        power = MultiSeries.const(1, self.chart, self.policy)
        for _ in range(self.policy.u_deg_max + 1):
            power = -(power * r)
            if power.is_zero():
                break
            total = total + power
        return total * inv_lead

    def diff(self, var: int | str) -> "MultiSeries":
        idx = VAR_INDEX[var] if isinstance(var, str) else var
        out = {}
        for e, c in self._terms.items():
            k = e[idx]
            if k == 0:
                continue
            ne = list(e)
            ne[idx] -= 1
            out[tuple(ne)] = c * k
        # the differentiated window is one wider; re-truncate into the policy
        return MultiSeries(out, self.chart, self.policy, self.touched)

    def substitute(
        self,
        rules: Sequence["MultiSeries"],
        chart: str | None = None,
        policy: TruncationPolicy | None = None,
    ) -> "MultiSeries":
        """Ring homomorphism sending (z, u1, u2) to ``rules[0..2]``."""
        if len(rules) != 3:
            raise ValueError("a substitution needs rules for all three variables")
        target = rules[0].chart
        if chart is not None and chart != target:
            raise ChartMismatch("rules live on a different chart")
        pol = policy or rules[0].policy
        for r in rules:
            pol = pol.intersect(r.policy)
        rules = [r if r.policy == pol else r.with_policy(pol) for r in rules]
        cache: list[dict[int, MultiSeries]] = [{}, {}, {}]

        def power(idx: int, n: int) -> MultiSeries:
            got = cache[idx].get(n)
            if got is None:
                if n == 0:
                    got = MultiSeries.const(1, target, pol)
                elif n < 0:
                    if rules[idx].is_monomial():
                        ((e, c),) = rules[idx].items()
                        base = MultiSeries({(-e[0], -e[1], -e[2]): 1 / c}, target, pol) if e[1] == e[2] == 0 else None
                        if base is None:
                            raise NonInvertibleSubstitution("negative power of a rule involving fiber variables")
                    else:
                        base = rules[idx].inverse()
                    got = base if n == -1 else power(idx, -1) * power(idx, n + 1)
                else:
                    got = rules[idx] if n == 1 else power(idx, n - 1) * rules[idx]
                cache[idx][n] = got
            return got

        acc: dict[tuple[int, int, int], Fraction] = {}
        touched = self.touched
        for (l, i, s), c in self._terms.items():
            term = power(0, l) * power(1, i) * power(2, s)
            touched = touched or term.touched
            for e, v in term._terms.items():
                nv = acc.get(e, 0) + c * v
                if nv:
                    acc[e] = nv
                else:
                    acc.pop(e, None)
        return MultiSeries(acc, target, pol, touched)

    # -- equality, hashing, display ---------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiSeries.const(other, self.chart)
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.chart == other.chart and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self._terms.items())))
        return self._hash

    def sorted_terms(self) -> list[tuple[tuple[int, int, int], Fraction]]:
        return sorted(self._terms.items(), key=lambda t: canonical_key(t[0]))

    def render(self) -> str:
        return render_terms(self.sorted_terms(), self.chart)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"MultiSeries[{self.chart}]({self.render()})"


def _fmt_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_monomial(e: Sequence[int], chart: str = "U") -> str:
    names = CHART_NAMES[chart]
    parts = []
    for name, k in zip(names, e):
        if k == 0:
            continue
        parts.append(name if k == 1 else f"{name}^{k}")
    return " ".join(parts)


def render_terms(terms: Iterable[tuple[Sequence[int], Fraction]], chart: str = "U") -> str:
    out = []
    for e, c in terms:
        mono = render_monomial(e, chart)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            body = _fmt_coef(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_fmt_coef(a)} {mono}"
        if not out:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f"{sign} {body}")
    return " ".join(out) if out else "0"


_TERM_RE = re.compile(r"^(?:(\d+(?:/\d+)?)\s*\*?\s*)?((?:[a-z]+\d?(?:\^-?\d+)?\s*)*)$")
_FACTOR_RE = re.compile(r"([a-z]+\d?)(?:\^(-?\d+))?")


def parse_series(text: str, chart: str | None = None, policy: TruncationPolicy = EXACT) -> MultiSeries:
    """Parse the canonical rendering back into a series.

    The chart is inferred from the variable names when not given.
    """
    text = text.strip()
    if chart is None:
        chart = "V" if re.search(r"\b(xi|v1|v2)\b", text) else "U"
    names = CHART_NAMES[chart]
    if text in ("", "0"):
        return MultiSeries.zero(chart, policy)
    # split into signed chunks
    tokens = re.split(r"\s*(?<!\^)([+-])\s*", text)
    if tokens[0] == "":
        tokens = tokens[1:]
    else:
        tokens = ["+"] + tokens
    terms: dict[tuple[int, int, int], Fraction] = {}
    for sign, body in zip(tokens[0::2], tokens[1::2]):
        body = body.strip()
        m = _TERM_RE.match(body)
        if not m or not body:
            raise ValueError(f"cannot parse term {body!r}")
        coef = Fraction(m.group(1)) if m.group(1) else Fraction(1)
        e = [0, 0, 0]
        for fm in _FACTOR_RE.finditer(m.group(2) or ""):
            name, k = fm.group(1), fm.group(2)
            if name not in names:
                raise ValueError(f"variable {name!r} does not belong to chart {chart}")
            e[names.index(name)] += int(k) if k else 1
        if sign == "-":
            coef = -coef
        key = tuple(e)
        terms[key] = terms.get(key, 0) + coef
    return MultiSeries(terms, chart, policy)


def identity_rules(chart: str = "U", policy: TruncationPolicy = EXACT) -> list[MultiSeries]:
    return [MultiSeries(({(1, 0, 0): 1}), chart, policy),
            MultiSeries(({(0, 1, 0): 1}), chart, policy),
            MultiSeries(({(0, 0, 1): 1}), chart, policy)]

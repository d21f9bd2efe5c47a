"""Flat key-value text format for threefolds, maps, cocycles and run config.

One ``key = value`` pair per line; ``#`` starts a comment; keys may repeat
(``perturb.v1`` entries are summed).  Series values use the canonical
rendering, e.g.::

    k1 = 2
    k2 = 0
    perturb.v1 = z u2^3
"""

from __future__ import annotations

from collections import defaultdict

from .series import MultiSeries, parse_series


class ParseError(ValueError):
    pass


def parse_kv(text: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = defaultdict(list)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError(f"line {lineno}: empty key")
        out[key].append(value)
    return dict(out)


def _series(value: str, chart: str, key: str) -> MultiSeries:
    try:
        return parse_series(value, chart)
    except ValueError as exc:
        raise ParseError(f"{key}: {exc}") from exc


def _int(kv: dict, key: str, default=None) -> int:
    if key not in kv:
        if default is None:
            raise ParseError(f"missing key {key!r}")
        return default
    try:
        return int(kv[key][-1])
    except ValueError as exc:
        raise ParseError(f"{key}: not an integer") from exc


def spec_from_kv(kv: dict[str, list[str]]):
    from .geometry import ThreefoldSpec

    pert = []
    for slot in ("v1", "v2"):
        for value in kv.get(f"perturb.{slot}", []):
            pert.append((slot, _series(value, "U", f"perturb.{slot}")))
    name = kv.get("name", [""])[-1]
    return ThreefoldSpec(_int(kv, "k1"), _int(kv, "k2"), tuple(pert), name=name)


def parse_spec(text: str):
    return spec_from_kv(parse_kv(text))


def dump_spec(spec) -> str:
    lines = [f"k1 = {spec.k1}", f"k2 = {spec.k2}"]
    for slot in ("v1", "v2"):
        p = spec.perturbation(slot)
        if p:
            lines.append(f"perturb.{slot} = {p.render()}")
    return "\n".join(lines) + "\n"


def map_from_kv(kv: dict[str, list[str]]):
    from .deform import MapSpec

    try:
        on_u = tuple(_series(kv[f"map.u.{i}"][-1], "U", f"map.u.{i}") for i in (1, 2, 3))
        on_v = tuple(_series(kv[f"map.v.{i}"][-1], "V", f"map.v.{i}") for i in (1, 2, 3))
    except KeyError as exc:
        raise ParseError(f"missing key {exc.args[0]!r}") from exc
    return MapSpec(on_u, on_v)


def cocycle_from_kv(kv: dict[str, list[str]]) -> list[MultiSeries]:
    keys = sorted((k for k in kv if k.startswith("cocycle.")), key=lambda k: int(k.split(".")[1]))
    if not keys:
        raise ParseError("no cocycle.N entries")
    n = int(keys[-1].split(".")[1])
    comps = [MultiSeries.zero() for _ in range(n)]
    for k in keys:
        idx = int(k.split(".")[1]) - 1
        for value in kv[k]:
            comps[idx] = comps[idx] + _series(value, "U", k)
    return comps

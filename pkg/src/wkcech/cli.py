"""Command-line front end.

Exit codes: 0 success, 1 parse or usage error, 2 result not certified within
the window, 3 reference suite finished with failing checks.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import re
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from .cech import DEFAULT_POLICY, WindowTooSmall, ext_group_basis, h0_basis, h1_basis, h1_growth
from .series import TruncationPolicy, parse_series
from .specfile import ParseError, cocycle_from_kv, map_from_kv, parse_kv, spec_from_kv

log = logging.getLogger("wkcech")

EXIT_OK, EXIT_PARSE, EXIT_WINDOW, EXIT_FAILED = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    truncation: TruncationPolicy = DEFAULT_POLICY
    growth_cap: int = 4
    output_format: str = "text"
    cache_dir: str | None = None

    def __post_init__(self):
        if self.growth_cap < 1:
            raise ValueError("growth cap must be at least 1")
        if self.output_format not in ("text", "json"):
            raise ValueError("format must be text or json")

    def as_dict(self) -> dict:
        return {"truncation": self.truncation.as_dict(), "growth_cap": self.growth_cap}


def load_config(args) -> RunConfig:
    kv = {}
    if getattr(args, "config", None):
        kv = {k: v[-1] for k, v in parse_kv(Path(args.config).read_text()).items()}
    base = DEFAULT_POLICY

    def pick(flag, key, default, cast=int):
        val = getattr(args, flag, None)
        if val is not None:
            return val
        if key in kv:
            try:
                return cast(kv[key])
            except ValueError as exc:
                raise ParseError(f"config {key}: {exc}") from exc
        return default

    pol = TruncationPolicy(
        pick("u_deg", "u_deg", base.u_deg_max),
        pick("z_min", "z_min", base.z_min),
        pick("z_max", "z_max", base.z_max),
    )
    return RunConfig(
        pol,
        pick("growth_cap", "growth_cap", 4),
        pick("format", "format", "text", str),
        pick("cache_dir", "cache_dir", None, str),
    )


# bundles named on the command line -----------------------------------------

_LINE = re.compile(r"^line[(:]\s*(-?\d+)\s*\)?$")
_EXT = re.compile(r"^ext(?:ension)?[(:]\s*(-?\d+)\s*[,;:]\s*(.+?)\s*\)?$")


def bundle_from_name(name: str, spec):
    from .geometry import ExtensionClass, endomorphism_transition, extension_to_transition, line_bundle_transition, tangent_jacobian

    name = name.strip()
    if name == "tangent":
        return tangent_jacobian(spec)
    if name == "end-tangent":
        return endomorphism_transition(tangent_jacobian(spec))
    m = _LINE.match(name)
    if m:
        return line_bundle_transition(int(m.group(1)), spec)
    m = _EXT.match(name)
    if m:
        try:
            p = parse_series(m.group(2), "U")
        except ValueError as exc:
            raise ParseError(f"bundle {name!r}: {exc}") from exc
        return extension_to_transition(ExtensionClass(int(m.group(1)), p), spec)
    raise ParseError(f"unknown bundle {name!r}; use tangent, end-tangent, line(d) or ext(j, p)")


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _spec(path: str):
    return spec_from_kv(parse_kv(_read(path).decode()))


# cache ------------------------------------------------------------------------

def cache_key(command: str, inputs: list[bytes], params: dict, cfg: RunConfig) -> str:
    h = hashlib.sha256()
    from . import __version__

    h.update(f"{__version__}:{command}".encode())
    for blob in inputs:
        h.update(hashlib.sha256(blob).digest())
    h.update(json.dumps({"params": params, "config": cfg.as_dict()}, sort_keys=True).encode())
    return h.hexdigest()


def cache_get(cfg: RunConfig, key: str):
    if not cfg.cache_dir:
        return None
    path = Path(cfg.cache_dir) / f"{key}.json"
    if path.exists():
        return json.loads(path.read_text())
    return None


def cache_put(cfg: RunConfig, key: str, payload: dict) -> None:
    if not cfg.cache_dir:
        return
    d = Path(cfg.cache_dir)
    d.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(dumps(payload))
    os.replace(tmp, d / f"{key}.json")


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# commands ---------------------------------------------------------------------

def _window_error(exc: WindowTooSmall) -> dict:
    out = {"error": "WindowTooSmall", "message": str(exc)}
    if hasattr(exc.partial, "to_json"):
        out["partial"] = exc.partial.to_json()
    return out


def cmd_h1(args, cfg):
    spec = _spec(args.spec)
    b = bundle_from_name(args.bundle, spec)
    if args.bundle == "end-tangent" or args.growth:
        basis = h1_growth(b, cfg.truncation, growth_cap=cfg.growth_cap)
    else:
        basis = h1_basis(b, cfg.truncation, cfg.growth_cap)
    return basis.to_json()


def cmd_moduli(args, cfg):
    from .bundles import first_neighborhood_moduli

    return first_neighborhood_moduli(args.j, _spec(args.spec), cfg.truncation, cfg.growth_cap).to_json()


def cmd_ext(args, cfg):
    return ext_group_basis(args.j1, args.j2, _spec(args.spec), cfg.truncation, cfg.growth_cap).to_json()


def cmd_sections(args, cfg):
    b = bundle_from_name(args.bundle, _spec(args.spec))
    return h0_basis(b, cfg.truncation, args.neighborhood, cfg.growth_cap).to_json()


def cmd_split_type(args, cfg):
    from .bundles import splitting_exponents

    b = bundle_from_name(args.bundle, _spec(args.spec))
    m = [[e.at_zero_section() for e in row] for row in b.matrix]
    ex = sorted(splitting_exponents(m), reverse=True)
    # a transition z^e on the line is O(-e) when sections satisfy s_V = M s_U
    return {"transition_exponents": ex, "degrees": sorted((-e for e in ex), reverse=True)}


def cmd_iso(args, cfg):
    from .bundles import distinguish_bundles

    spec = _spec(args.spec)
    return distinguish_bundles(bundle_from_name(args.bundle, spec), bundle_from_name(args.other, spec), cfg.truncation).to_json()


def cmd_integrate(args, cfg):
    from .deform import integrate_cocycle

    spec = _spec(args.spec)
    comps = cocycle_from_kv(parse_kv(_read(args.cocycle).decode()))
    while len(comps) < 3:
        comps.append(parse_series("0", "U"))
    res = integrate_cocycle(spec, comps)
    if not res:
        return {"integrable": False, "variable": res.variable, "reason": res.reason}
    return {"integrable": True, "spec": res.to_text(), "spec_hash": res.digest()}


def cmd_affine_iso(args, cfg):
    from .deform import AffineIsoProblem, affine_bundle_iso

    return affine_bundle_iso(AffineIsoProblem(args.j1, args.j2, args.ansatz_degree)).to_json()


def cmd_verify_map(args, cfg):
    from .deform import verify_map_holomorphic

    m = map_from_kv(parse_kv(_read(args.map).decode()))
    res = verify_map_holomorphic(m, _spec(args.source), _spec(args.target))
    return {"holomorphic": res.ok, "mismatches": res.mismatches}


def cmd_paper_suite(args, cfg):
    from .suite import run_suite

    only = set(args.only.split(",")) if args.only else None
    results = run_suite(cfg.truncation, only)
    rows = [r.to_json() for r in results]
    return {
        "checks": rows,
        "failed": sum(r.status == "fail" for r in results),
        "window": sum(r.status == "window" for r in results),
    }


COMMANDS = {
    "h1": cmd_h1,
    "moduli": cmd_moduli,
    "ext": cmd_ext,
    "sections": cmd_sections,
    "split-type": cmd_split_type,
    "iso": cmd_iso,
    "integrate": cmd_integrate,
    "affine-iso": cmd_affine_iso,
    "verify-map": cmd_verify_map,
    "paper-suite": cmd_paper_suite,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--u-deg", type=int, help="fiber degree cap (default 6)")
    common.add_argument("--z-min", type=int, help="lowest z exponent of the starting window (default -12)")
    common.add_argument("--z-max", type=int, help="highest z exponent (default 12)")
    common.add_argument("--growth-cap", type=int, help="number of window doublings allowed (default 4)")
    common.add_argument("--format", choices=("text", "json"))
    common.add_argument("--cache-dir")
    common.add_argument("--config", help="key = value file; flags take precedence")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="wkcech", description="Cech computations on the threefolds W_k.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("h1", parents=[common], help="H^1 of a bundle")
    s.add_argument("--spec", required=True)
    s.add_argument("--bundle", default="tangent")
    s.add_argument("--growth", action="store_true", help="report counts at three degree caps")

    s = sub.add_parser("moduli", parents=[common], help="first-neighborhood moduli of rank 2 bundles")
    s.add_argument("--spec", required=True)
    s.add_argument("--j", type=int, required=True)

    s = sub.add_parser("ext", parents=[common], help="Ext^1(O(j2), O(j1))")
    s.add_argument("--spec", required=True)
    s.add_argument("--j1", type=int, required=True)
    s.add_argument("--j2", type=int, required=True)

    s = sub.add_parser("sections", parents=[common], help="sections on a formal neighborhood")
    s.add_argument("--spec", required=True)
    s.add_argument("--bundle", required=True)
    s.add_argument("--neighborhood", type=int)

    s = sub.add_parser("split-type", parents=[common], help="splitting type on the zero section")
    s.add_argument("--spec", required=True)
    s.add_argument("--bundle", required=True)

    s = sub.add_parser("iso", parents=[common], help="compare two bundles")
    s.add_argument("--spec", required=True)
    s.add_argument("--bundle", required=True)
    s.add_argument("--other", required=True)

    s = sub.add_parser("integrate", parents=[common], help="add a tangent cocycle to the gluing")
    s.add_argument("--spec", required=True)
    s.add_argument("--cocycle", required=True)

    s = sub.add_parser("affine-iso", parents=[common], help="affine bundles E(j1), E(j2)")
    s.add_argument("--j1", type=int, required=True)
    s.add_argument("--j2", type=int, required=True)
    s.add_argument("--ansatz-degree", type=int, default=0)

    s = sub.add_parser("verify-map", parents=[common], help="check a map commutes with the gluings")
    s.add_argument("--map", required=True)
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)

    s = sub.add_parser("paper-suite", parents=[common], help="run all reference checks")
    s.add_argument("--only", help="comma separated check numbers")
    return p


def _inputs(args) -> list[bytes]:
    out = []
    for attr in ("spec", "cocycle", "map", "source", "target"):
        path = getattr(args, attr, None)
        if path:
            out.append(_read(path))
    return out


def _params(args) -> dict:
    skip = {"u_deg", "z_min", "z_max", "growth_cap", "format", "cache_dir", "config", "verbose", "spec", "cocycle", "map", "source", "target"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def render_text(command: str, payload: dict) -> str:
    if command == "paper-suite":
        lines = [f"{'check':<28} {'status':<9} computed"]
        for r in payload["checks"]:
            lines.append(f"{r['name']:<28} {r['status']:<9} {r['computed']}")
        lines.append(f"failed: {payload['failed']}  window: {payload['window']}")
        return "\n".join(lines) + "\n"
    lines = []
    for k, v in payload.items():
        if isinstance(v, list):
            lines.append(f"{k}:")
            lines.extend(f"  {x}" for x in v)
        else:
            lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code or EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        inputs = _inputs(args)
        key = cache_key(args.command, inputs, _params(args), cfg)
        payload = cache_get(cfg, key)
        code = EXIT_OK
        if payload is None:
            t0 = time.perf_counter()
            try:
                payload = COMMANDS[args.command](args, cfg)
            except WindowTooSmall as exc:
                payload = _window_error(exc)
            log.info("%s finished in %.2fs", args.command, time.perf_counter() - t0)
            cache_put(cfg, key, payload)
        else:
            log.info("cache hit %s", key[:12])
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if payload.get("error") == "WindowTooSmall" or payload.get("stabilized") is False or payload.get("window"):
        code = EXIT_WINDOW
    elif args.command == "paper-suite" and payload["failed"]:
        code = EXIT_FAILED
    if cfg.output_format == "json":
        sys.stdout.write(dumps(payload))
    else:
        sys.stdout.write(render_text(args.command, payload))
    return code


if __name__ == "__main__":
    sys.exit(main())

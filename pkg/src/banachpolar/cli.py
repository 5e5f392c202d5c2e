"""
Command-line front end.

Every command prints one JSON report to stdout (and to ``--json`` when
given)::

    {"command": ..., "config": {...}, "status": "ok|fail|error",
     "result": {...}, "version": ...}

Exit codes: 0 verified/holds, 1 verified-false (``fail``) or solver failure
(``error``), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .geometry import ArcError, FiniteCone, MeridianArc, sample_arc
from .polar import (
    CERTIFY_TOL,
    CRITERION_TOL,
    DEFAULT_ARC_SAMPLES,
    certify_wedge_polar_convexity,
    lp_counterexample,
    subspace_criterion_check,
    wedge_polar_rays,
)
from .projection import ProjectionError, SolverOptions, euclidean_qp_oracle, project_cone
from .spaces import LpSpace, QuadraticSpace, validate_space

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# defaults applied after config file and flags are merged
DEFAULTS = {
    "space": "lp",
    "dim": 3,
    "p": 2.0,
    "matrix": None,
    "seed": 0,
    "trials": 500,
    "arc_samples": DEFAULT_ARC_SAMPLES,
    "max_iters": 50_000,
    "oracle": False,
}


class ConfigError(Exception):
    pass


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON text with floats written to 17 significant digits."""
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    pad, end = "  " * (indent + 1), "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _parse_vector(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    text = text.strip()
    try:
        if text.startswith("["):
            return np.asarray(json.loads(text), dtype=float)
        return np.asarray([float(t) for t in text.split(",")], dtype=float)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse vector {text!r}") from exc


def _load_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {what} file {path}: {exc}") from exc


@dataclass
class RunConfig:
    """Everything that determines a run; serialized verbatim into the report."""

    command: str
    values: dict = field(default_factory=dict)

    def get(self, key):
        return self.values.get(key)

    def build_space(self):
        kind = self.get("space")
        if kind == "lp":
            return LpSpace(int(self.get("dim")), float(self.get("p")))
        if kind == "quadratic":
            src = self.get("matrix")
            if src is None:
                raise ConfigError("--space quadratic requires --matrix")
            A = _load_json(src, "matrix") if isinstance(src, str) else src
            try:
                A = np.asarray(A, dtype=float)
            except (ValueError, TypeError) as exc:
                raise ConfigError("matrix must be a JSON array of rows") from exc
            if A.ndim != 2:
                raise ConfigError("matrix must be a JSON array of rows")
            return QuadraticSpace(A)
        raise ConfigError(f"unknown space {kind!r}")

    def to_dict(self, space=None) -> dict:
        out = {k: v for k, v in sorted(self.values.items()) if v is not None}
        if space is not None:
            out["resolved_space"] = space.to_dict()
        return out


def _merge_config(command, args, keys):
    values = {k: DEFAULTS.get(k) for k in keys}
    if getattr(args, "config", None):
        cfg = _load_json(args.config, "config")
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        for k, v in cfg.items():
            k = k.replace("-", "_")
            if k not in keys:
                raise ConfigError(f"unknown config key {k!r} for {command}")
            values[k] = v
    for k in keys:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            values[k] = v
    return RunConfig(command, values)


def _emit(report, args):
    text = dumps(report) + "\n"
    sys.stdout.write(text)
    path = getattr(args, "json", None)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _report(cfg, status, result, space=None):
    return {
        "command": cfg.command,
        "config": cfg.to_dict(space),
        "status": status,
        "result": result,
        "version": __version__,
    }


def _space_or_error(cfg):
    space = cfg.build_space()
    errors = validate_space(space)
    if errors:
        raise ConfigError("invalid space: " + "; ".join(errors))
    return space


SPACE_KEYS = ["space", "dim", "p", "matrix"]


def cmd_validate(args):
    cfg = _merge_config("validate", args, SPACE_KEYS)
    space = cfg.build_space()
    errors = validate_space(space)
    status = "ok" if not errors else "fail"
    return _report(cfg, status, {"valid": not errors, "errors": errors}, space), (EXIT_OK if not errors else EXIT_FAIL)


def cmd_criterion(args):
    cfg = _merge_config("criterion", args, SPACE_KEYS + ["trials", "seed", "tol"])
    if cfg.get("tol") is None:
        cfg.values["tol"] = CRITERION_TOL
    space = _space_or_error(cfg)
    rep = subspace_criterion_check(space, int(cfg.get("trials")), float(cfg.get("tol")), int(cfg.get("seed")))
    ok = rep.holds
    return _report(cfg, "ok" if ok else "fail", rep.to_dict(), space), (EXIT_OK if ok else EXIT_FAIL)


def cmd_counterexample(args):
    cfg = _merge_config("counterexample", args, ["p"])
    p = float(cfg.get("p"))
    try:
        ce = lp_counterexample(p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    names = ("a", "b", "c")
    print(f"p = {ce.p:.17g}   q = {ce.q:.17g}", file=sys.stderr)
    print(f"{'':3}{'dual vector':>24}{'J* direction':>40}", file=sys.stderr)
    for name, v, d in zip(names, ce.vectors, ce.directions):
        vs = ", ".join(f"{x:g}" for x in v)
        ds = ", ".join(f"{x:.10g}" for x in d)
        print(f"{name:3}{'(' + vs + ')':>24}{'(' + ds + ')':>40}", file=sys.stderr)
    print(f"det = 2 - 2^(q-1) = {ce.det_value:.17g}", file=sys.stderr)
    return _report(cfg, "ok", ce.to_dict()), EXIT_OK


def cmd_project(args):
    cfg = _merge_config("project", args, SPACE_KEYS + ["cone", "point", "tol", "max_iters", "seed", "oracle"])
    space = _space_or_error(cfg)
    if cfg.get("cone") is None or cfg.get("point") is None:
        raise ConfigError("project requires --cone and --point")
    src = cfg.get("cone")
    gens = _load_json(src, "cone") if isinstance(src, str) else src
    try:
        cone = FiniteCone(np.asarray(gens, dtype=float))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad cone: {exc}") from exc
    x = _parse_vector(cfg.get("point"))
    if x.shape != (space.dim,) or cone.dim != space.dim:
        raise ConfigError("point and cone dimensions must match the space")
    opts = SolverOptions(
        tol=float(cfg.get("tol") if cfg.get("tol") is not None else SolverOptions.tol),
        max_iters=int(cfg.get("max_iters")),
        seed=int(cfg.get("seed")),
    )
    try:
        res = project_cone(space, cone, x, opts)
    except ProjectionError as exc:
        return _report(cfg, "error", {"message": str(exc), **exc.result.to_dict()}, space), EXIT_FAIL
    result = res.to_dict()
    status, code = "ok", EXIT_OK
    if cfg.get("oracle"):
        if not (isinstance(space, LpSpace) and space.p == 2):
            raise ConfigError("--oracle is only available for lp with p=2")
        ref = euclidean_qp_oracle(cone, x)
        gap = float(np.linalg.norm(ref - res.point))
        result["oracle"] = {"point": ref.tolist(), "gap": gap, "agrees": gap <= 1e-6}
        if gap > 1e-6:
            status, code = "fail", EXIT_FAIL
    return _report(cfg, status, result, space), code


def cmd_wedge_polar(args):
    keys = SPACE_KEYS + ["a", "b", "arc_samples", "tol", "emit_csv", "max_iters"]
    cfg = _merge_config("wedge-polar", args, keys)
    if cfg.get("tol") is None:
        cfg.values["tol"] = CERTIFY_TOL
    space = _space_or_error(cfg)
    if cfg.get("a") is None or cfg.get("b") is None:
        raise ConfigError("wedge-polar requires --a and --b")
    a, b = _parse_vector(cfg.get("a")), _parse_vector(cfg.get("b"))
    m = int(cfg.get("arc_samples"))
    if m < 2:
        raise ConfigError("--arc-samples must be >= 2")
    try:
        arc = MeridianArc.from_endpoints(space, a, b)
    except (ArcError, ValueError) as exc:
        raise ConfigError(f"invalid arc: {exc}") from exc
    opts = SolverOptions(max_iters=int(cfg.get("max_iters")))
    try:
        rep = certify_wedge_polar_convexity(space, arc, m, float(cfg.get("tol")), opts)
    except ProjectionError as exc:
        return _report(cfg, "error", {"message": str(exc)}, space), EXIT_FAIL
    if cfg.get("emit_csv"):
        write_rays_csv(cfg.get("emit_csv"), space, arc, m)
    result = rep.to_dict()
    result["arc"] = {"a": arc.endpoint_a.tolist(), "b": arc.endpoint_b.tolist()}
    return _report(cfg, "ok" if rep.convex else "fail", result, space), (EXIT_OK if rep.convex else EXIT_FAIL)


def write_rays_csv(path, space, arc, m):
    """One row per arc sample: ``t, c_1..c_n, ray_1..ray_n`` with ``ray = J* c``."""
    c = sample_arc(space, arc, m)
    rays = space.inverse_duality_map(c)
    t = np.linspace(0.0, 1.0, m)
    n = space.dim
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"c_{i + 1}" for i in range(n)] + [f"ray_{i + 1}" for i in range(n)])
        for k in range(m):
            w.writerow([_fmt_float(v) for v in (t[k], *c[k], *rays[k])])


def _add_space_flags(p):
    p.add_argument("--space", choices=["lp", "quadratic"])
    p.add_argument("--dim", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--matrix", help="JSON file with the SPD matrix (row-major)")


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--json", help="also write the JSON report to this file")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="banachpolar",
        description="Duality maps, metric projections and polar cones in l_p and quadratic norms.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a space description")
    _add_space_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("criterion", help="does J* map 2-planes to 2-planes?")
    _add_space_flags(p)
    _add_common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_criterion)

    p = sub.add_parser("counterexample", help="the l_p^3 dependent triple and its J* images")
    p.add_argument("--p", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("project", help="metric projection onto a finitely generated cone")
    _add_space_flags(p)
    _add_common(p)
    p.add_argument("--cone", help="JSON file with generators, one per row")
    p.add_argument("--point", help="point to project, e.g. 1,2,3 or [1,2,3]")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--oracle", action="store_true", help="cross-check against the Euclidean oracle (p=2)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("wedge-polar", help="certify convexity of a wedge polar")
    _add_space_flags(p)
    _add_common(p)
    p.add_argument("--a", help="first arc endpoint (dual vector)")
    p.add_argument("--b", help="second arc endpoint (dual vector)")
    p.add_argument("--arc-samples", dest="arc_samples", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--emit-csv", dest="emit_csv", help="write sampled rays as CSV")
    p.set_defaults(func=cmd_wedge_polar)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except ConfigError as exc:
        report = {
            "command": args.command,
            "config": {},
            "status": "error",
            "result": {"message": str(exc)},
            "version": __version__,
        }
        code = EXIT_USAGE
    _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())

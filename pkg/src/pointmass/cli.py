"""Command-line front end.

Exit codes: 0 success, 1 oracle failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from .analysis import ScanPolicy, filtration_scan
from .checks import CHECKS, run_checks
from .config import build_config
from .errors import PointMassError
from .kernels import BuiltinKernelId, load_kernel_spec, make_kernel
from .moments import moment_identity_check, mu_A_moments, mu_B_moments
from .network import energy_kernel, network_moments, read_edge_list
from .sampling import interpolate

BUILTINS = [k.value for k in BuiltinKernelId]


class InputError(Exception):
    pass


def _number(tok: str):
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        return float(tok)


_EXPR = re.compile(r"^[\di+\-*/(). ]+$")


def _generator(expr: str, count: int) -> list:
    if not _EXPR.match(expr):
        raise InputError(f"generator expression may only use i, digits and + - * / ( ): {expr!r}")
    code = compile(expr, "<points>", "eval")
    out, i = [], 1
    while len(out) < count:
        v = eval(code, {"__builtins__": {}}, {"i": i})
        # nonpositive leading terms act as the virtual anchor at 0 and are skipped
        if v > 0 or out:
            out.append(int(v) if float(v).is_integer() else float(v))
        i += 1
        if i > 10 * count + 10:
            raise InputError(f"generator {expr!r} produced too few positive points")
    return out


def parse_points(text: str, max_n: int | None = None) -> list:
    """Point-list syntax.

    * ``1,2,3`` explicit values; ``1,2,3,...,50`` continues the last step
    * ``a..b`` inclusive integer range
    * ``sparse:EXPR`` values of ``EXPR`` at i = 1, 2, ... (``max_n`` of them)
    * ``uniform:h`` the points h, 2h, ..., ``max_n`` h
    * ``@path`` or an existing file: whitespace/comma separated values
    """
    text = text.strip()
    count = max_n or 1000
    if text.startswith("sparse:"):
        return _generator(text[len("sparse:"):], count)
    if text.startswith("uniform:"):
        h = float(text[len("uniform:"):])
        if not h > 0:
            raise InputError("uniform spacing must be positive")
        return [h * i for i in range(1, count + 1)]
    if text.startswith("@") or os.sep in text or text.endswith((".txt", ".csv")):
        path = Path(text.lstrip("@"))
        if not path.is_file():
            raise InputError(f"points file not found: {path}")
        return parse_points(",".join(path.read_text().replace(",", " ").split()), max_n)
    m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", text)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        if b < a:
            raise InputError(f"empty range {text}")
        return list(range(a, b + 1))
    toks = [t.strip() for t in text.split(",") if t.strip()]
    out = []
    try:
        for j, t in enumerate(toks):
            if t in ("...", "…"):
                if len(out) < 2 or j + 1 >= len(toks):
                    raise InputError("'...' needs two values before it and one after")
                step = out[-1] - out[-2]
                end = _number(toks[j + 1])
                if not step or (end - out[-1]) / step < 0:
                    raise InputError("'...' cannot reach the final value")
                k = int(round((end - out[-1]) / step))
                out += [out[-1] + step * q for q in range(1, k)]
            else:
                out.append(_number(t))
    except ValueError as e:
        raise InputError(f"bad point list: {e}") from None
    if not out:
        raise InputError("empty point list")
    return out


def _kernel_and_config(args):
    spec = args.kernel
    if spec in BUILTINS and spec != "matrix":
        kernel, config = make_kernel(spec), None
    else:
        if not (spec.lstrip().startswith("{") or Path(spec).is_file()):
            raise InputError(f"--kernel must be one of {BUILTINS[:-1]} or a JSON spec file: {spec!r}")
        kernel, config = load_kernel_spec(spec)
    if args.points is not None:
        pts = parse_points(args.points, args.max_n)
        ordered = kernel.name in ("min", "bridge")
        config = build_config(pts, ordered)
    if config is None:
        raise InputError("no points: pass --points or include them in the kernel spec")
    kernel.check_domain(config)
    return kernel, config


def _policy(args, n):
    max_n = min(args.max_n or n, n)
    window = min(args.window, max_n) if max_n >= 2 else 2
    return ScanPolicy(max_n=max(max_n, window), window=window, rel_tol=args.rel_tol,
                      divergence_cap=args.cap)


def _targets(args, config):
    if not args.target:
        return list(config.points)
    out = []
    for t in args.target:
        v = _number(t) if re.fullmatch(r"[-+\d.eE]+", t) else t
        try:
            config.index(v)
        except (KeyError, ValueError):
            raise InputError(f"target {t!r} is not a point of the configuration") from None
        out.append(config[config.index(v)])
    return out


def _num(v):
    if v is None:
        return None
    v = float(v)
    return None if math.isinf(v) or math.isnan(v) else v


def _emit(args, rows, fields):
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _slug(p):
    return re.sub(r"[^\w.\-]", "_", str(p))


def cmd_membership(args) -> int:
    kernel, config = _kernel_and_config(args)
    targets = _targets(args, config)
    res = filtration_scan(kernel, config, targets, _policy(args, len(config)))
    rows = []
    for x in targets:
        tr = res.traces[x]
        row = {"point": tr.to_dict()["point"], "verdict": tr.verdict.kind,
               "estimate": _num(tr.estimate), "steps_scanned": len(tr.steps), "trace_file": None}
        if args.trace_dir:
            d = Path(args.trace_dir)
            d.mkdir(parents=True, exist_ok=True)
            path = d / f"trace_{_slug(x)}.csv"
            path.write_text(tr.to_csv())
            row["trace_file"] = str(path)
        if args.format == "json":
            row["steps"] = tr.to_dict()["steps"]
        rows.append(row)
    _emit(args, rows, ["point", "verdict", "estimate", "steps_scanned", "trace_file"])
    return 0


def cmd_network(args) -> int:
    if not args.edges:
        raise InputError("--edges is required")
    if not Path(args.edges).is_file():
        raise InputError(f"edge list not found: {args.edges}")
    base = _number(args.base) if re.fullmatch(r"-?\d+", args.base) else args.base
    g = read_edge_list(args.edges, base)
    verts = [v for v in g.vertices if v != g.base]
    if args.target:
        want = {(_number(t) if re.fullmatch(r"-?\d+", t) else t) for t in args.target}
        missing = want - set(verts)
        if missing:
            raise InputError(f"not a non-base vertex: {sorted(map(str, missing))}")
        verts = [v for v in verts if v in want]
    rows = []
    for v in verts:
        m = network_moments(g, v)
        rows.append({"vertex": v, "c": m.degree, "m1": m.m1, "m2": m.m2,
                     "covariance": m.covariance, "bound": "pass" if m.bound_ok else "fail"})
    if args.export_kernel:
        kern, cfg = energy_kernel(g)
        K = np.array([[kern(x, y) for y in cfg.points] for x in cfg.points])
        Path(args.export_kernel).write_text(json.dumps(
            {"kernel": "matrix", "labels": list(cfg.points), "matrix": K.tolist()}))
    _emit(args, rows, ["vertex", "c", "m1", "m2", "covariance", "bound"])
    return 0


def cmd_oracle_check(args) -> int:
    only = [s for s in (args.only or "").split(",") if s.strip()]
    try:
        results = run_checks(only or None, perturb=args.perturb, seed=args.seed)
    except KeyError as e:
        raise InputError(str(e.args[0])) from None
    if args.format is not None:
        _emit(args, [r.to_dict() for r in results], ["formula", "max_err", "tol", "passed", "detail"])
    else:
        text = "\n".join(r.line() for r in results) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return 0 if all(r.passed for r in results) else 1


def cmd_moments(args) -> int:
    kernel, config = _kernel_and_config(args)
    policy = _policy(args, len(config))
    rows = []
    for x in _targets(args, config):
        a = mu_A_moments(kernel, config, x, policy)
        b = mu_B_moments(kernel, config, x, policy)
        _, _, ok = moment_identity_check(kernel, config, x, policy)
        rows.append({
            "point": x,
            "A_m0": a.m0, "A_m1": _num(a.m1), "A_m2": _num(a.m2), "A_covariance": _num(a.covariance),
            "A_verdict": a.verdicts["m1"].kind,
            "B_m0": b.m0, "B_m1": b.m1, "B_m2": _num(b.m2), "B_covariance": _num(b.covariance),
            "identity": "pass" if ok else "unverified",
        })
    _emit(args, rows, list(rows[0]) if rows else ["point"])
    return 0


def cmd_interpolate(args) -> int:
    if not args.input or not Path(args.input).is_file():
        raise InputError(f"interpolation input not found: {args.input}")
    data = json.loads(Path(args.input).read_text())
    for key in ("kernel", "samples", "pairings"):
        if key not in data:
            raise InputError(f"interpolation input needs '{key}'")
    kernel, config = load_kernel_spec(data["kernel"])
    if config is None:
        raise InputError("the kernel spec in the interpolation input needs points")
    policy = _policy(args, len(config)) if args.verify else None
    f = interpolate(kernel, config, data["samples"], data["pairings"], policy=policy, cap=args.cap)
    report = f.to_dict()
    grid = data.get("grid")
    if grid is not None:
        xs = np.linspace(*grid[:2], int(grid[2])) if len(grid) == 3 and isinstance(grid[2], int) \
            else np.asarray(grid, dtype=float)
        vals = f.evaluate(list(xs))
        if args.grid_out:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["x", "value"])
            for x, v in zip(xs, vals):
                w.writerow([repr(float(x)), repr(float(v))])
            Path(args.grid_out).write_text(buf.getvalue())
            report["grid_file"] = args.grid_out
        else:
            report["grid"] = [[float(x), float(v)] for x, v in zip(xs, vals)]
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _positive(kind):
    def conv(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {s}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pointmass",
                                description="Point-mass analysis for kernels on discrete sets.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument("--kernel", required=True, help=f"builtin id ({', '.join(BUILTINS[:-1])}) or JSON spec")
    scan.add_argument("--points", help="points: CSV, a..b, sparse:EXPR, uniform:h or @file")
    scan.add_argument("--target", action="append", help="point to analyse (repeatable; default all)")
    scan.add_argument("--max-n", type=_positive(int), dest="max_n")
    scan.add_argument("--window", type=_positive(int), default=5)
    scan.add_argument("--rel-tol", type=_positive(float), default=1e-9, dest="rel_tol")
    scan.add_argument("--cap", type=_positive(float), default=1e12)

    sub = p.add_subparsers(dest="command", required=True)
    m = sub.add_parser("membership", parents=[common, scan], help="point-mass norm scans")
    m.add_argument("--trace-dir", help="write one CSV trace per target here")
    m.set_defaults(func=cmd_membership)

    mo = sub.add_parser("moments", parents=[common, scan], help="spectral moments per point")
    mo.set_defaults(func=cmd_moments)

    n = sub.add_parser("network", parents=[common], help="conductance moments of a network")
    n.add_argument("--edges", required=True, help="edge list with lines 'u v c'")
    n.add_argument("--base", required=True)
    n.add_argument("--target", action="append", help="vertex to report (repeatable; default all)")
    n.add_argument("--export-kernel", help="write the energy kernel as a matrix-kernel JSON")
    n.set_defaults(func=cmd_network)

    # own flags: a parent's actions are shared, so a format default set here would leak
    o = sub.add_parser("oracle-check", help="engine against closed forms")
    o.add_argument("--format", choices=["json", "csv"], default=None,
                   help="default: one PASS/FAIL line per formula")
    o.add_argument("--out")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--only", help=f"comma-separated subset of: {', '.join(CHECKS)}")
    o.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    o.set_defaults(func=cmd_oracle_check)

    i = sub.add_parser("interpolate", parents=[common], help="reconstruct from point-mass pairings")
    i.add_argument("--input", required=True, help="JSON with kernel, samples, pairings[, grid]")
    i.add_argument("--grid-out", help="write the evaluation grid as CSV here")
    i.add_argument("--verify", action="store_true", help="scan every sampled point-mass first")
    i.add_argument("--max-n", type=_positive(int), dest="max_n")
    i.add_argument("--window", type=_positive(int), default=5)
    i.add_argument("--rel-tol", type=_positive(float), default=1e-9, dest="rel_tol")
    i.add_argument("--cap", type=_positive(float), default=1e12)
    i.set_defaults(func=cmd_interpolate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (InputError, PointMassError, ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"pointmass: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

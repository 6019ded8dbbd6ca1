"""``mpcop`` command-line interface.

Every subcommand writes CSV (to ``--out`` or stdout) or prints a single
value. Exit codes: 0 success, 1 bad input or numerical failure, 2 partial
replication failure in ``experiment``.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .copula import build_copula, support_polyline
from .core import MapModel, orbit
from .errors import MPError
from .estimator import estimate_ls, estimate_minmax, estimate_refined
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment, write_csv
from .measure import build_measure, measure_interval
from .nodes import node_endpoints
from .sampler import sample_pairs


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _count(text: str) -> int:
    # accepts 1e6 style counts
    v = float(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(v)


def _emit(path, header, rows):
    if path is None:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        for r in rows:
            w.writerow([format(float(x), ".17g") if isinstance(x, (float, np.floating)) else x
                        for x in r])
    else:
        write_csv(Path(path), header, rows)


def cmd_iterate(args):
    pts = orbit(MapModel(args.s), args.x0, args.n).points
    _emit(args.out, ["x"], ((x,) for x in pts))


def cmd_measure(args):
    mu = build_measure(MapModel(args.s), args.x0, args.n)
    lo, hi = args.interval
    print(format(measure_interval(mu, lo, hi), ".17g"))


def cmd_cdf(args):
    mu = build_measure(MapModel(args.s), args.x0, args.n)
    if args.eval is not None:
        print(format(mu.cdf(args.eval), ".17g"))
    else:
        print(format(mu.quantile(args.quantile), ".17g"))


def cmd_nodes(args):
    table = node_endpoints(MapModel(args.s), args.h, args.m)
    _emit(args.out, ["k", "a_hk"], enumerate(table.endpoints))


def _copula_from(args):
    direction = "decreasing" if getattr(args, "decreasing", False) else "increasing"
    return build_copula(args.s, args.h, n=args.n, m=args.m, direction=direction)


def cmd_copula(args):
    cm = _copula_from(args)
    if args.eval is not None:
        u, v = args.eval
        print(format(cm(u, v), ".17g"))
        return
    if args.out is None:
        raise MPError("--grid needs --out")
    g = np.linspace(0.0, 1.0, args.grid)
    uu, vv = np.meshgrid(g, g, indexing="ij")
    c = cm(uu, vv)
    write_csv(Path(args.out), ["u", "v", "c"], zip(uu.ravel(), vv.ravel(), c.ravel()))


def cmd_support(args):
    cm = build_copula(args.s, args.h, n=args.n, m=args.m)
    direction = "decreasing" if args.decreasing else "increasing"
    poly = support_polyline(cm.model, cm.nodes, cm.mu, direction)
    _emit(args.out, ["k", "x0", "y0", "x1", "y1"],
          ((k, *seg) for k, seg in enumerate(poly.segments)))


def cmd_sample(args):
    cm = _copula_from(args)
    batch = sample_pairs(cm, args.count, args.seed, support=args.support)
    _emit(args.out, ["u", "v"], batch.pairs)


def _read_path(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x"]:
            raise MPError(f"{path}: expected a single column with header 'x'")
        vals = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                raise MPError(f"{path}:{lineno}: not a number: {row[0]!r}") from None
    return np.asarray(vals)


def cmd_estimate(args):
    path = _read_path(args.input)
    if args.method == "minmax":
        rep = estimate_minmax(path)
    elif args.method == "ls":
        rep = estimate_ls(path)
    else:
        rep = estimate_refined(path, eps=args.eps)
    print("method,a_hat,s_hat,branch_used,branch_count")
    print(f"{rep.method},{rep.a_hat:.17g},{rep.s_hat:.17g},{rep.branch_used},{rep.branch_count}")


def cmd_experiment(args):
    cfg = ExperimentConfig(experiment=args.name, out=Path(args.out), seed=args.seed, n=args.n,
                           replications=args.replications, paths=args.paths)
    res = run_experiment(cfg)
    for f in res.files:
        print(f)
    if not res.ok:
        print(f"{len(res.failures)} replication(s) failed; see {cfg.out / 'failures.csv'}",
              file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpcop", description="MP maps, invariant measures, "
                                "copulas, sampling and estimation of s.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_map(sp, x0=True, n=1_000_000):
        sp.add_argument("--s", type=float, required=True)
        if x0:
            sp.add_argument("--x0", type=float, required=True)
        sp.add_argument("--n", type=_count, default=n)

    sp = sub.add_parser("iterate", help="orbit x_0, ..., x_{n-1} as CSV")
    add_map(sp, n=1000)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_iterate)

    sp = sub.add_parser("measure", help="orbit mass of a closed interval")
    add_map(sp)
    sp.add_argument("--interval", type=_pair, required=True, metavar="LO,HI")
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("cdf", help="interpolated CDF or its inverse")
    add_map(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--eval", type=float, metavar="X")
    g.add_argument("--quantile", type=float, metavar="U")
    sp.set_defaults(func=cmd_cdf)

    sp = sub.add_parser("nodes", help="node endpoints of T^h")
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--h", type=int, required=True)
    sp.add_argument("--m", type=_count, default=10_000)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_nodes)

    def add_copula(sp):
        add_map(sp, x0=False)
        sp.add_argument("--h", type=int, required=True)
        sp.add_argument("--m", type=_count, default=10_000)
        sp.add_argument("--decreasing", action="store_true")

    sp = sub.add_parser("copula", help="evaluate the lag-h copula")
    add_copula(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--eval", type=_pair, metavar="U,V")
    g.add_argument("--grid", type=int, metavar="G")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_copula)

    sp = sub.add_parser("support", help="support segments of the lag-h copula")
    add_copula(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_support)

    sp = sub.add_parser("sample", help="random pairs from the lag-h copula")
    add_copula(sp)
    sp.add_argument("--count", type=_count, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--support", choices=("polyline", "curve"), default="polyline")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("estimate", help="estimate s from a path CSV (column 'x')")
    sp.add_argument("--input", required=True)
    sp.add_argument("--method", choices=("minmax", "ls", "refined"), default="minmax")
    sp.add_argument("--eps", type=float, default=0.01)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("experiment", help="replication experiments")
    sp.add_argument("name", choices=EXPERIMENTS)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--n", type=_count)
    sp.add_argument("--replications", type=int)
    sp.add_argument("--paths", type=int)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except (MPError, ValueError, OSError) as exc:
        print(f"mpcop: error: {exc}", file=sys.stderr)
        return 1
    return code or 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

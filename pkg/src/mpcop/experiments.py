"""Replication harness: invariant-measure stability, invariance checks,
estimator Monte Carlo and figure data.

Every runner writes plain CSV into ``cfg.out``: a summary file, a raw
per-replication log and, when anything failed, ``failures.csv``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .copula import build_copula, support_polyline
from .core import MapModel, orbit
from .errors import MPError
from .estimator import estimate_ls, estimate_minmax
from .measure import build_measure, preimage_mass
from .nodes import node_endpoints
from .sampler import sample_pairs

EXPERIMENTS = ("table51", "table52", "table61", "figures")

TABLE51_SETS = ((0.1, 0.2), (0.4, 0.6))
TABLE51_N = (300_000, 1_000_000, 3_000_000)
TABLE52_SETS = ((0.05, 0.2), (0.3, 0.8), (0.7, 0.95))
TABLE52_X0 = tuple(float(v % 1.0) for v in (
    math.pi,
    math.pi / (math.sqrt(2) + 1),
    math.pi * math.sqrt(2),
    math.pi + math.sqrt(2),
    math.sqrt(7),
    math.pi + math.sqrt(7),
    math.sqrt(11) + math.sqrt(7),
))
TABLE61_S = tuple(round(0.10 + 0.05 * i, 2) for i in range(18))
ESTIMATORS: dict[str, Callable] = {"MM": estimate_minmax, "LS": estimate_ls}

FMT = ".17g"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    out: Path
    seed: int = 0
    s_grid: tuple = ()
    n: int | None = None
    m: int = 10_000
    path_len: int = 200
    replications: int | None = None
    paths: int | None = None
    grid: int = 51
    sample_count: int = 500

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        object.__setattr__(self, "out", Path(self.out))


@dataclass(frozen=True)
class SummaryRow:
    label: str
    count: int
    minimum: float
    maximum: float
    range: float
    mean: float
    std: float
    mse: float | None = None

    @classmethod
    def from_values(cls, label: str, values: Sequence[float], truth: float | None = None):
        """Summarise ``values``; std is the population one so mse = bias^2 + std^2."""
        x = np.asarray(values, dtype=np.float64)
        if len(x) == 0:
            nan = float("nan")
            return cls(label, 0, nan, nan, nan, nan, nan, None if truth is None else nan)
        lo, hi = float(x.min()), float(x.max())
        mse = None if truth is None else float(np.mean((x - truth) ** 2))
        return cls(label, len(x), lo, hi, hi - lo, float(x.mean()), float(x.std()), mse)


@dataclass
class ExperimentResult:
    files: list[Path] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), FMT)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def seeded_points(seed: int, count: int, stream: int = 0) -> np.ndarray:
    """``count`` points uniform on the open interval (0, 1), reproducible from ``seed``."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))
    return rng.integers(1, 2**53, size=count) / float(2**53)


def _set_label(lo: float, hi: float) -> str:
    return f"[{lo:g},{hi:g}]"


def _finish(cfg: ExperimentConfig, res: ExperimentResult) -> ExperimentResult:
    if res.failures:
        keys = sorted({k for f in res.failures for k in f})
        res.files.append(write_csv(cfg.out / "failures.csv", keys,
                                   ([f.get(k, "") for k in keys] for f in res.failures)))
    return res


def run_table51(cfg: ExperimentConfig) -> ExperimentResult:
    """Orbit masses of fixed sets over a family of initial points and truncations n."""
    s = cfg.s_grid[0] if cfg.s_grid else 0.5
    if cfg.n is None:
        n_grid = TABLE51_N
    else:
        n_grid = tuple(sorted({max(cfg.n // 10, 1), max(cfg.n // 3, 1), cfg.n}))
    count = cfg.paths or 50
    x0s = seeded_points(cfg.seed, count, stream=51)
    model = MapModel(s)
    res = ExperimentResult()
    raw = []
    masses = {(st, n): [] for st in TABLE51_SETS for n in n_grid}
    for i, x0 in enumerate(x0s):
        try:
            pts = orbit(model, float(x0), max(n_grid)).points
        except MPError as exc:
            res.failures.append({"experiment": "table51", "replication": i, "x0": x0,
                                 "error": f"{type(exc).__name__}: {exc}"})
            continue
        for lo, hi in TABLE51_SETS:
            inside = np.cumsum((pts >= lo) & (pts <= hi))
            for n in n_grid:
                mass = inside[n - 1] / n
                masses[((lo, hi), n)].append(mass)
                raw.append((i, x0, n, _set_label(lo, hi), mass))
    summary = []
    for (st, n), vals in masses.items():
        row = SummaryRow.from_values(_set_label(*st), vals)
        res.rows.append((n, row))
        summary.append((row.label, n, row.count, row.minimum, row.maximum, row.range,
                        row.mean, row.std))
    out = cfg.out
    res.files.append(write_csv(out / "table51_summary.csv",
                               ["set", "n", "count", "min", "max", "range", "mean", "std"],
                               summary))
    res.files.append(write_csv(out / "table51_raw.csv",
                               ["replication", "x0", "n", "set", "mass"], raw))
    return _finish(cfg, res)


def run_table52(cfg: ExperimentConfig) -> ExperimentResult:
    """|mu_n(A; x_i) - mu_n(T^{-1}A; x_j)| for every pair of initial points."""
    s = cfg.s_grid[0] if cfg.s_grid else 0.5
    n = cfg.n or 3_000_000
    x0s = TABLE52_X0
    model = MapModel(s)
    table = node_endpoints(model, 1, 100_000)
    res = ExperimentResult()
    direct, pre = {}, {}
    for i, x0 in enumerate(x0s):
        try:
            mu = build_measure(model, x0, n)
        except MPError as exc:
            res.failures.append({"experiment": "table52", "replication": i, "x0": x0,
                                 "error": f"{type(exc).__name__}: {exc}"})
            continue
        for lo, hi in TABLE52_SETS:
            direct[i, (lo, hi)] = float(mu.mass(lo, hi))
            pre[i, (lo, hi)] = preimage_mass(mu, model, lo, hi, table=table)
    raw = []
    matrices = {}
    ok = sorted({i for i, _ in direct})
    for st in TABLE52_SETS:
        mat = np.full((len(x0s), len(x0s)), np.nan)
        for i in ok:
            for j in ok:
                mat[i, j] = abs(direct[i, st] - pre[j, st])
                raw.append((_set_label(*st), i + 1, j + 1, x0s[i], x0s[j],
                            direct[i, st], pre[j, st], mat[i, j]))
        matrices[st] = mat
        name = f"table52_{st[0]:g}_{st[1]:g}.csv"
        header = ["i"] + [f"x{j + 1}" for j in range(len(x0s))]
        res.files.append(write_csv(cfg.out / name, header,
                                   ([i + 1, *mat[i]] for i in range(len(x0s)))))
    res.rows.append(matrices)
    res.files.append(write_csv(cfg.out / "table52_raw.csv",
                               ["set", "i", "j", "x_i", "x_j", "mass", "preimage_mass", "diff"],
                               raw))
    return _finish(cfg, res)


def run_table61(cfg: ExperimentConfig) -> ExperimentResult:
    """Min-max and least-squares estimates of s over seeded replications.

    The same initial points are reused for every s. A replication fails
    when the estimator raises or when the path never wraps twice, so only
    the first-branch fallback is available.
    """
    s_grid = cfg.s_grid or TABLE61_S
    reps = cfg.replications or 100
    x0s = seeded_points(cfg.seed, reps, stream=61)
    res = ExperimentResult()
    raw = []
    summary = []
    for s in s_grid:
        model = MapModel(s)
        est = {name: [] for name in ESTIMATORS}
        fails = {name: 0 for name in ESTIMATORS}
        for r, x0 in enumerate(x0s):
            path = orbit(model, float(x0), cfg.path_len).points
            for name, fn in ESTIMATORS.items():
                try:
                    with warnings.catch_warnings():
                        # out-of-range estimates are kept and logged, not flagged
                        warnings.simplefilter("ignore", UserWarning)
                        rep = fn(path)
                except MPError as exc:
                    reason = f"{type(exc).__name__}: {exc}"
                    rep = None
                else:
                    reason = "" if rep.branch_used == "second" else "no second-branch pairs"
                if reason:
                    fails[name] += 1
                    res.failures.append({"experiment": "table61", "s": f"{s:.2f}", "method": name,
                                         "replication": r, "x0": x0, "error": reason})
                    raw.append((r, x0, f"{s:.2f}", name, "failed", None, None, reason))
                    continue
                est[name].append(rep.s_hat)
                raw.append((r, x0, f"{s:.2f}", name, "ok", rep.a_hat, rep.s_hat, rep.branch_used))
        for name in ESTIMATORS:
            row = SummaryRow.from_values(f"{s:.2f}", est[name], truth=s)
            res.rows.append((s, name, fails[name], row))
            summary.append((f"{s:.2f}", name, row.count, fails[name], row.mean, row.minimum,
                            row.maximum, row.range, row.std, row.mse))
    res.files.append(write_csv(cfg.out / "table61_summary.csv",
                               ["s", "method", "count", "failures", "mean", "min", "max",
                                "range", "std", "mse"], summary))
    res.files.append(write_csv(cfg.out / "table61_raw.csv",
                               ["replication", "x0", "s", "method", "status", "a_hat",
                                "s_hat", "note"], raw))
    return _finish(cfg, res)


def emit_figure_data(cfg: ExperimentConfig) -> ExperimentResult:
    """Copula grids, support segments and sample scatters for external plotting."""
    n = cfg.n or 1_000_000
    res = ExperimentResult()
    out = cfg.out
    g = np.linspace(0.0, 1.0, cfg.grid)
    uu, vv = np.meshgrid(g, g, indexing="ij")
    plans = [(s, h, True) for s in (0.1, 0.4) for h in (1, 2)]
    plans += [(0.2, h, False) for h in (4, 5, 7)]
    seeds = np.random.SeedSequence(cfg.seed).generate_state(len(plans))
    for (s, h, with_grid), seed in zip(plans, seeds):
        tag = f"s{s:g}_h{h}"
        try:
            cm = build_copula(s, h, n=n, m=cfg.m)
        except MPError as exc:
            res.failures.append({"experiment": "figures", "config": tag,
                                 "error": f"{type(exc).__name__}: {exc}"})
            continue
        if with_grid:
            c = cm(uu, vv)
            res.files.append(write_csv(out / f"copula_{tag}.csv", ["u", "v", "c"],
                                       zip(uu.ravel(), vv.ravel(), c.ravel())))
        poly = support_polyline(cm.model, cm.nodes, cm.mu)
        res.files.append(write_csv(out / f"support_{tag}.csv", ["k", "x0", "y0", "x1", "y1"],
                                   ((k, *seg) for k, seg in enumerate(poly.segments))))
        batch = sample_pairs(cm, cfg.sample_count, int(seed))
        res.files.append(write_csv(out / f"sample_{tag}.csv", ["u", "v"], batch.pairs))
    return _finish(cfg, res)


RUNNERS = {
    "table51": run_table51,
    "table52": run_table52,
    "table61": run_table61,
    "figures": emit_figure_data,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)

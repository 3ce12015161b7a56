"""Repeated seeded experiments and their CSV artifacts.

Layout of an output directory::

    summary.csv                      mean/std of accuracy, subset size, fitness
    timing.csv                       mean/std wall time per (dataset, algorithm)
    runs.csv                         final result of every individual run
    run_times.csv                    wall time of every individual run
    <dataset>__<algo>__seed<N>.csv   convergence trace of one run
    <dataset>__mel__seed<N>__weights.csv   top-K weight trace (optional)

Everything except the two timing files is a pure function of the ExperimentSpec, so
repeated invocations produce byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import yaml

from .dataset import load_csv, minmax_scale
from .mel import ALGORITHMS, MelConfig, RunReport
from .swarm import PsoParams

log = logging.getLogger(__name__)

STD_NOTE = "# std columns are population standard deviations: sqrt(sum((x - mean)^2) / n)"


class UsageError(ValueError):
    """Bad command line or configuration file."""


@dataclass
class ExperimentSpec:
    datasets: list[Path]
    algorithms: list[str] = field(default_factory=lambda: ["mel", "pso"])
    config: MelConfig = field(default_factory=MelConfig)
    out_dir: Path = Path("results")
    label_column: str = "last"
    header: bool = False
    scale: bool = False
    weight_trace: int = 0
    threads: int = 1

    def __post_init__(self) -> None:
        if not self.datasets:
            raise UsageError("at least one --dataset is required")
        if not self.algorithms:
            raise UsageError("at least one --algo is required")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise UsageError(f"unknown algorithm(s): {', '.join(sorted(unknown))}")

    @property
    def repeats(self) -> int:
        return self.config.repeats

    def seeds(self) -> list[int]:
        return [self.config.seed + i for i in range(self.repeats)]


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    algorithm: str
    seeds: tuple[int, ...]
    mean_accuracy: float = math.nan
    std_accuracy: float = math.nan
    mean_subset_size: float = math.nan
    std_subset_size: float = math.nan
    mean_fitness: float = math.nan
    std_fitness: float = math.nan
    mean_wall_time: float = math.nan
    std_wall_time: float = math.nan
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    @classmethod
    def from_reports(cls, dataset: str, algorithm: str, reports: Sequence[RunReport]) -> "SummaryRow":
        def ms(values):
            a = np.asarray(values, dtype=np.float64)
            return float(a.mean()), float(a.std(ddof=0))

        acc = ms([r.best_accuracy for r in reports])
        size = ms([r.best_subset_size for r in reports])
        fit = ms([r.best_fitness for r in reports])
        wall = ms([r.wall_time for r in reports])
        return cls(dataset, algorithm, tuple(r.seed for r in reports), *acc, *size, *fit, *wall)


# --------------------------------------------------------------------------
# argument and config parsing

# option name -> converter applied to config-file values
_KEYS: dict[str, Any] = {
    "dataset": str,
    "algo": str,
    "repeats": int,
    "seed": int,
    "iters": int,
    "np": int,
    "theta": float,
    "alpha": float,
    "beta": float,
    "c1": float,
    "c2": float,
    "c3": float,
    "omega": float,
    "vmax": float,
    "knn": int,
    "folds": int,
    "scale": bool,
    "header": bool,
    "label_col": str,
    "out": str,
    "weight_trace": int,
    "subset_policy": str,
}
_LIST_KEYS = {"dataset", "algo"}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="melfs",
        description="Benchmark two-subpopulation PSO feature selection against plain PSO.",
        argument_default=argparse.SUPPRESS,
    )
    p.add_argument("--config", help="YAML or JSON file with default values for any option below")
    p.add_argument("--dataset", action="append", metavar="PATH", help="CSV dataset (repeatable)")
    p.add_argument("--algo", action="append", choices=sorted(ALGORITHMS), help="algorithm (repeatable)")
    p.add_argument("--repeats", type=int, help="runs per (dataset, algorithm), seeds seed..seed+repeats-1")
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", type=int, help="iterations T")
    p.add_argument("--np", type=int, help="population size (even)")
    p.add_argument("--theta", type=float, help="binarization threshold")
    p.add_argument("--alpha", type=float, help="error-rate weight in the fitness")
    p.add_argument("--beta", type=float, help="subset-size weight in the fitness")
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--c3", type=float, help="pull towards the other subpopulation's best")
    p.add_argument("--omega", type=float, help="inertia weight")
    p.add_argument("--vmax", type=float, help="velocity clamp")
    p.add_argument("--knn", type=int, help="neighbours for KNN")
    p.add_argument("--folds", type=int, help="cross-validation folds")
    p.add_argument("--scale", action="store_const", const=True, help="min-max scale features to [0, 1]")
    p.add_argument("--header", action="store_const", const=True, help="skip the first CSV row")
    p.add_argument("--label-col", dest="label_col", choices=["first", "last"])
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--weight-trace", dest="weight_trace", type=int, metavar="K",
                   help="dump the top-K feature weights per iteration (MEL only)")
    p.add_argument("--subset-policy", dest="subset_policy", choices=["uniform", "bernoulli"])
    return p


def _convert(key: str, value: Any) -> Any:
    conv = _KEYS[key]
    if key in _LIST_KEYS:
        values = value if isinstance(value, list) else [value]
        return [str(v) for v in values]
    if conv is bool:
        if not isinstance(value, bool):
            raise UsageError(f"{key}: expected true/false, got {value!r}")
        return value
    if conv is int and isinstance(value, float) and not value.is_integer():
        raise UsageError(f"{key}: expected an integer, got {value!r}")
    try:
        return conv(value)
    except (TypeError, ValueError):
        raise UsageError(f"{key}: malformed value {value!r}") from None


def read_config_file(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise UsageError(f"config file {path} is not valid YAML/JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a mapping")
    out = {}
    for raw_key, value in data.items():
        key = str(raw_key).replace("-", "_")
        if key not in _KEYS:
            raise UsageError(f"unknown key {raw_key!r} in {path}")
        out[key] = _convert(key, value)
    return out


def parse_spec(argv: Optional[Sequence[str]] = None, config: Optional[str | Path] = None,
               env: Optional[dict[str, str]] = None) -> ExperimentSpec:
    """Merge defaults, a config file and command-line flags (later wins)."""
    ns = vars(build_parser().parse_args(list(argv) if argv is not None else None))
    config = ns.pop("config", config)
    values: dict[str, Any] = read_config_file(config) if config else {}
    values.update(ns)

    if "dataset" not in values:
        raise UsageError("at least one --dataset is required")
    env = os.environ if env is None else env
    try:
        threads = int(env.get("MELFS_THREADS", "1"))
    except ValueError:
        raise UsageError(f"MELFS_THREADS must be an integer, got {env['MELFS_THREADS']!r}") from None
    if threads < 1:
        raise UsageError("MELFS_THREADS must be >= 1")
    if values.get("label_col", "last") not in ("first", "last"):
        raise UsageError("label_col must be 'first' or 'last'")
    if values.get("weight_trace", 0) < 0:
        raise UsageError("weight_trace must be >= 0")

    defaults = PsoParams()
    try:
        pso = PsoParams(
            omega=values.get("omega", defaults.omega),
            c1=values.get("c1", defaults.c1),
            c2=values.get("c2", defaults.c2),
            c3=values.get("c3", defaults.c3),
            v_max=values.get("vmax", defaults.v_max),
            theta=values.get("theta", defaults.theta),
        )
        base = MelConfig()
        cfg = MelConfig(
            np=values.get("np", base.np),
            iterations=values.get("iters", base.iterations),
            pso=pso,
            alpha=values.get("alpha", base.alpha),
            beta=values.get("beta", base.beta),
            k_nn=values.get("knn", base.k_nn),
            cv_folds=values.get("folds", base.cv_folds),
            seed=values.get("seed", base.seed),
            repeats=values.get("repeats", base.repeats),
            subset_policy=values.get("subset_policy", base.subset_policy),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    return ExperimentSpec(
        datasets=[Path(p) for p in values["dataset"]],
        algorithms=list(dict.fromkeys(values.get("algo", ["mel", "pso"]))),
        config=cfg,
        out_dir=Path(values.get("out", "results")),
        label_column=values.get("label_col", "last"),
        header=values.get("header", False),
        scale=values.get("scale", False),
        weight_trace=values.get("weight_trace", 0),
        threads=threads,
    )


# --------------------------------------------------------------------------
# artifacts

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_convergence_csv(report: RunReport, path: str | Path) -> Path:
    """One row per iteration 0..T of the global-best trace."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "best_fitness", "best_accuracy", "subset_size"])
        for t, pt in enumerate(report.trace):
            w.writerow([t, _fmt(pt.best_fitness), _fmt(pt.best_accuracy), int(pt.best_subset_size)])
    return path


def emit_weight_trace_csv(report: RunReport, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "feature_index", "weight"])
        for t, idx, weight in report.weight_trace:
            w.writerow([t, idx, _fmt(weight)])
    return path


def convergence_path(out_dir: Path, dataset: str, algorithm: str, seed: int) -> Path:
    return out_dir / f"{dataset}__{algorithm}__seed{seed}.csv"


def _write_summary(rows: Iterable[SummaryRow], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(STD_NOTE + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "status", "runs", "seeds",
                    "mean_accuracy", "std_accuracy", "mean_subset_size", "std_subset_size",
                    "mean_fitness", "std_fitness", "error"])
        for r in rows:
            stats = [r.mean_accuracy, r.std_accuracy, r.mean_subset_size, r.std_subset_size,
                     r.mean_fitness, r.std_fitness]
            w.writerow([r.dataset, r.algorithm, "ok" if r.ok else "failed", len(r.seeds) if r.ok else 0,
                        " ".join(map(str, r.seeds)),
                        *(_fmt(v) if r.ok else "" for v in stats), r.error])


def _write_timing(rows: Iterable[SummaryRow], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(STD_NOTE + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "mean_wall_time", "std_wall_time"])
        for r in rows:
            if r.ok:
                w.writerow([r.dataset, r.algorithm, _fmt(r.mean_wall_time), _fmt(r.std_wall_time)])


def run_experiment(spec: ExperimentSpec) -> list[SummaryRow]:
    """Run every (dataset, algorithm) cell ``repeats`` times and write artifacts.

    A failing cell becomes a row with ``error`` set; other cells still run.
    """
    out = spec.out_dir
    out.mkdir(parents=True, exist_ok=True)
    rows: list[SummaryRow] = []
    run_rows: list[list[str]] = []
    time_rows: list[list[str]] = []
    seeds = spec.seeds()

    for path in spec.datasets:
        try:
            ds = load_csv(path, spec.label_column, spec.header)
            if spec.scale:
                ds = minmax_scale(ds)
        except Exception as exc:  # noqa: BLE001 - recorded as a failed cell
            log.error("cannot load %s: %s", path, exc)
            rows.extend(SummaryRow(Path(path).stem, a, tuple(seeds), error=str(exc)) for a in spec.algorithms)
            continue

        for algo in spec.algorithms:
            runner = ALGORITHMS[algo]
            reports: list[RunReport] = []
            try:
                for seed in seeds:
                    cfg = spec.config.with_seed(seed)
                    if algo == "mel":
                        rep = runner(ds, cfg, threads=spec.threads, weight_trace_k=spec.weight_trace)
                    else:
                        rep = runner(ds, cfg, threads=spec.threads)
                    emit_convergence_csv(rep, convergence_path(out, ds.name, algo, seed))
                    if rep.weight_trace:
                        emit_weight_trace_csv(rep, out / f"{ds.name}__{algo}__seed{seed}__weights.csv")
                    log.info("%s %s seed=%d acc=%.4f size=%d time=%.2fs", ds.name, algo, seed,
                             rep.best_accuracy, rep.best_subset_size, rep.wall_time)
                    reports.append(rep)
            except Exception as exc:  # noqa: BLE001 - recorded as a failed cell
                log.error("%s/%s failed: %s", ds.name, algo, exc)
                rows.append(SummaryRow(ds.name, algo, tuple(seeds), error=f"{type(exc).__name__}: {exc}"))
                continue
            rows.append(SummaryRow.from_reports(ds.name, algo, reports))
            for rep in reports:
                run_rows.append([ds.name, algo, str(rep.seed), _fmt(rep.best_accuracy), str(rep.best_subset_size),
                                 _fmt(rep.best_fitness), str(rep.n_evaluations),
                                 " ".join(map(str, rep.selected_features))])
                time_rows.append([ds.name, algo, str(rep.seed), _fmt(rep.wall_time)])

    _write_summary(rows, out / "summary.csv")
    _write_timing(rows, out / "timing.csv")
    with (out / "runs.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "seed", "best_accuracy", "subset_size", "best_fitness",
                    "evaluations", "selected_features"])
        w.writerows(run_rows)
    with (out / "run_times.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "seed", "wall_time"])
        w.writerows(time_rows)
    return rows


def format_table(rows: Sequence[SummaryRow]) -> str:
    """Mean ± std table, one line per (dataset, algorithm)."""
    lines = [f"{'dataset':<16} {'algo':<5} {'accuracy':>17} {'subset size':>17} {'time (s)':>15}"]
    for r in rows:
        if not r.ok:
            lines.append(f"{r.dataset:<16} {r.algorithm:<5} FAILED: {r.error}")
            continue
        lines.append(
            f"{r.dataset:<16} {r.algorithm:<5} "
            f"{r.mean_accuracy:>8.4f} ± {r.std_accuracy:<6.4f} "
            f"{r.mean_subset_size:>8.1f} ± {r.std_subset_size:<6.1f} "
            f"{r.mean_wall_time:>7.1f} ± {r.std_wall_time:<5.1f}"
        )
    return "\n".join(lines)

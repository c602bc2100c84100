"""Command-line driver for the synthetic graph-learning experiments.

Subcommands::

    logspect generate        write graphs, signals and a hashed manifest
    logspect generate --verify DIR
    logspect solve           one tidy CSV row per (trial, n) for a method
    logspect recovery-curve  medians of rLogSpecT errors against LogSpecT
    logspect feascheck       how often rSpecT is infeasible, per n
    logspect eval            summary statistics of a results CSV

Settings come from a YAML file (``--config``) and are overridden by flags.
Relative output directories are resolved against ``$LOGSPECT_OUTPUT_ROOT``
when it is set.  Exit codes: 0 success, 2 bad configuration or inputs,
3 numerical failure in at least one trial.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .errors import DivergenceError, InfeasibleError, LogSpecTError, ManifestError, ParameterError
from .evaluation import (
    BinarizationStrategy,
    RecoveryReport,
    aggregate,
    binarize,
    metrics,
    search_threshold,
    threshold_grid,
    train_threshold,
)
from .feasibility import delta_min, infeasibility_frequency
from .graphs import AdjacencyMatrix, GraphEnsembleSpec, generate, read_graph, write_graph
from .signals import (
    DeltaRule,
    FilterSpec,
    cov_gap,
    random_filter,
    sample_covariance,
    sample_signals,
    seed_for,
    true_covariance,
)
from .solvers import (
    SolverConfig,
    correlation_weights,
    solve_logspect,
    solve_rlogspect,
    solve_rspect,
)

log = logging.getLogger("logspect")

METHODS = ("rLogSpecT", "rSpecT", "LogSpecT", "SpecT-ideal", "Correlation")
OUTPUT_ROOT_ENV = "LOGSPECT_OUTPUT_ROOT"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
# training graphs for the train-based threshold use trial indices from here on
TRAIN_OFFSET = 1_000_000
CORRELATION_GRID = (0.1, 0.6)

RESULT_COLUMNS = [
    "config_hash", "trial", "seed", "n", "family", "m", "filter", "method", "delta", "eps",
    "f_measure", "precision", "recall", "objective", "cov_gap", "iterations", "converged", "status",
]
CURVE_COLUMNS = [
    "n", "trials", "failures", "median_cov_gap", "median_rel_objective_gap",
    "median_rel_degree_gap", "median_f_measure",
]
FEAS_COLUMNS = ["n", "trials", "frequency", "mean_delta_min"]


# -- configuration --------------------------------------------------------------


def _parse_n(v) -> Optional[int]:
    if v is None or (isinstance(v, str) and v.strip().lower() in ("inf", "infinite", "exact")):
        return None
    if isinstance(v, float) and math.isinf(v):
        return None
    n = int(v)
    if n < 1:
        raise ParameterError(f"sample counts must be positive, got {v}")
    return n


def _n_str(n: Optional[int]) -> str:
    return "inf" if n is None else str(n)


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: GraphEnsembleSpec = field(default_factory=GraphEnsembleSpec)
    filter: str = "lowpass-exp"
    n_grid: tuple = (100, 1000, 10000)
    delta_rule: DeltaRule = field(default_factory=DeltaRule)
    method: str = "rLogSpecT"
    trials: int = 20
    root_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    binarization: BinarizationStrategy = field(default_factory=BinarizationStrategy)
    eps_eq: float = 1e-6
    connected: bool = False
    output_dir: str = "results"

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials must be at least 1, got {self.trials}")
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        grid = tuple(_parse_n(v) for v in self.n_grid)
        if not grid:
            raise ParameterError("n_grid must not be empty")
        finite = [n for n in grid if n is not None]
        if finite != sorted(set(finite)) or (None in grid and grid[-1] is not None) or grid.count(None) > 1:
            raise ParameterError("n_grid must be strictly increasing (an 'inf' entry goes last)")
        object.__setattr__(self, "n_grid", grid)
        if self.filter != "random":
            FilterSpec.parse(self.filter)
        if self.eps_eq <= 0:
            raise ParameterError("eps_eq must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d or {})
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        try:
            if "ensemble" in d:
                kw["ensemble"] = GraphEnsembleSpec(**d.pop("ensemble"))
            if "solver" in d:
                kw["solver"] = SolverConfig(**d.pop("solver"))
            if "binarization" in d:
                kw["binarization"] = BinarizationStrategy(**d.pop("binarization"))
        except TypeError as e:
            raise ParameterError(str(e)) from None
        if "delta_rule" in d:
            r = d.pop("delta_rule")
            kw["delta_rule"] = DeltaRule(**r) if isinstance(r, dict) else DeltaRule.parse(str(r))
        if "filter" in d:
            kw["filter"] = str(d.pop("filter"))
        if "n_grid" in d:
            kw["n_grid"] = tuple(d.pop("n_grid"))
        kw.update(d)
        return cls(**kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["delta_rule"] = str(self.delta_rule)
        d["n_grid"] = [_n_str(n) for n in self.n_grid]
        return d

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def resolved_output(self) -> Path:
        out = Path(self.output_dir)
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not out.is_absolute():
            out = Path(root) / out
        return out


def load_config(path) -> ExperimentConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as e:
        raise ParameterError(f"cannot read config {path}: {e}") from None
    except yaml.YAMLError as e:
        raise ParameterError(f"config {path} is not valid YAML: {e}") from None
    if data is not None and not isinstance(data, dict):
        raise ParameterError("config must be a mapping")
    return ExperimentConfig.from_dict(data or {})


# -- per-trial data ---------------------------------------------------------------


def trial_seed(cfg: ExperimentConfig, trial: int, n: Optional[int] = None) -> int:
    return seed_for(cfg.root_seed, trial) if n is None else seed_for(cfg.root_seed, trial, n)


def trial_graph(cfg: ExperimentConfig, trial: int):
    """Graph and filter for a trial; fixed across the n-grid."""
    rng = np.random.default_rng(trial_seed(cfg, trial))
    while True:
        g = generate(cfg.ensemble, rng)
        if not cfg.connected or g.is_connected():
            break
    filt = random_filter(rng) if cfg.filter == "random" else FilterSpec.parse(cfg.filter)
    return g, filt


def trial_signals(cfg, trial, n, g, filt) -> np.ndarray:
    return sample_signals(filt, g, n, seed=trial_seed(cfg, trial, n))


def _covariances(cfg, trial, n, g, filt):
    C_inf = true_covariance(filt, g)
    if n is None:
        return C_inf, C_inf
    return sample_covariance(trial_signals(cfg, trial, n, g, filt)), C_inf


def _delta(cfg, n, C_n, C_inf) -> float:
    if n is None:
        lam = C_inf.eigh[0]
        return cfg.eps_eq * float(np.max(np.abs(lam)))
    gap = cov_gap(C_n, C_inf) if cfg.delta_rule.kind == "covgap" else None
    return cfg.delta_rule(n, gap)


@dataclass
class _Outcome:
    W: Optional[AdjacencyMatrix]
    objective: float = math.nan
    delta: float = math.nan
    iterations: int = 0
    converged: bool = True
    status: str = "ok"
    degrees: Optional[np.ndarray] = None


def run_method(cfg: ExperimentConfig, method: str, C_n, C_inf, n) -> _Outcome:
    """Learned weights for one covariance; solver failures become statuses."""
    scfg = cfg.solver
    try:
        if method == "Correlation":
            return _Outcome(correlation_weights(C_n), iterations=0)
        if method == "LogSpecT" or (method == "rLogSpecT" and n is None):
            r = solve_logspect(C_inf, scfg.alpha, eps_eq=cfg.eps_eq, cfg=scfg)
        elif method == "rLogSpecT":
            r = solve_rlogspect(C_n, scfg.with_(delta=_delta(cfg, n, C_n, C_inf)))
        elif method == "SpecT-ideal" or (method == "rSpecT" and n is None):
            d = _delta(cfg, None, C_inf, C_inf)
            r = solve_rspect(C_inf, d, delta_min=0.0, cfg=scfg)
        else:
            d = _delta(cfg, n, C_n, C_inf)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                dmin = delta_min(C_n)
            try:
                r = solve_rspect(C_n, d, delta_min=dmin, cfg=scfg)
            except InfeasibleError:
                return _Outcome(None, delta=d, status="infeasible")
    except DivergenceError as e:
        log.warning("%s diverged: %s", method, e)
        return _Outcome(None, status="diverged", converged=False, iterations=e.iteration)
    return _Outcome(r.S_hat, r.objective, r.delta, r.iterations, r.converged,
                    "ok" if r.converged else "maxiter", r.degrees)


def _threshold(R: AdjacencyMatrix, t: float) -> AdjacencyMatrix:
    """Absolute correlations ``R`` thresholded at ``t`` (no max-normalization)."""
    return AdjacencyMatrix(R.m, (R.upper >= t).astype(float))


def _binarize_eval(cfg, method, W, truth, eps_train=None):
    """Returns ``(eps, metrics)`` under the configured strategy."""
    strat = cfg.binarization
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if method == "Correlation":
            grid = threshold_grid(strat.grid_size, *CORRELATION_GRID)
            if strat.kind == "fixed":
                eps = strat.eps
            elif strat.kind == "train":
                eps = eps_train
            else:
                f = [metrics(_threshold(W, t), truth).f_measure for t in grid]
                eps = float(grid[len(f) - 1 - int(np.argmax(f[::-1]))])
            return eps, metrics(_threshold(W, eps), truth)
        if strat.kind == "search":
            return search_threshold(W, truth, strat.grid_size)
        eps = strat.eps if strat.kind == "fixed" else eps_train
        return eps, metrics(binarize(W, eps), truth)


def _train_eps(cfg, method, n) -> float:
    pairs = []
    for j in range(cfg.binarization.train_size):
        t = TRAIN_OFFSET + j
        g, filt = trial_graph(cfg, t)
        C_n, C_inf = _covariances(cfg, t, n, g, filt)
        out = run_method(cfg, method, C_n, C_inf, n)
        if out.W is not None:
            pairs.append((out.W, g))
    if not pairs:
        return cfg.binarization.eps
    if method == "Correlation":
        grid = threshold_grid(cfg.binarization.grid_size, *CORRELATION_GRID)
        mean_f = [np.mean([metrics(_threshold(W, e), g).f_measure for W, g in pairs]) for e in grid]
        return float(grid[len(grid) - 1 - int(np.argmax(mean_f[::-1]))])
    return train_threshold(pairs, cfg.binarization.grid_size)


def solve_trial(cfg: ExperimentConfig, trial: int, n: Optional[int], eps_train=None) -> dict:
    g, filt = trial_graph(cfg, trial)
    C_n, C_inf = _covariances(cfg, trial, n, g, filt)
    out = run_method(cfg, cfg.method, C_n, C_inf, n)
    row = RecoveryReport(
        method=cfg.method, family=cfg.ensemble.family, filter=str(filt), m=g.m, n=n, trial=trial,
        seed=trial_seed(cfg, trial, n), delta=out.delta, objective=out.objective,
        cov_gap=cov_gap(C_n, C_inf), iterations=out.iterations, converged=out.converged,
        status=out.status,
    )
    if out.W is not None:
        eps, mt = _binarize_eval(cfg, cfg.method, out.W, g, eps_train)
        row.eps, row.f_measure, row.precision, row.recall = eps, mt.f_measure, mt.precision, mt.recall
    d = row.as_row()
    d["config_hash"] = cfg.config_hash()
    d["n"] = _n_str(n)
    return {k: _fmt(d[k]) for k in RESULT_COLUMNS}


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- CSV helpers -------------------------------------------------------------------


def _row_key(row) -> tuple:
    n = row["n"]
    return (row["config_hash"], int(row["trial"]), math.inf if n == "inf" else int(n))


def _read_rows(path: Path) -> list:
    if not path.exists():
        return []
    with path.open(newline="") as fh:
        return [r for r in csv.DictReader(fh) if r.get("status")]


def _write_rows(path: Path, rows, columns) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    tmp.replace(path)


def _pool_map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            yield from pool.map(fn, items)
    else:
        for it in items:
            yield fn(it)


# -- commands -----------------------------------------------------------------------


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_generate(cfg: ExperimentConfig) -> Path:
    """Graphs, signal matrices and ``manifest.json`` for every trial."""
    out = cfg.resolved_output()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ParameterError(f"cannot create output directory {out}: {e}") from None
    files = {}
    trials = []
    for t in range(cfg.trials):
        g, filt = trial_graph(cfg, t)
        gpath = out / f"graph_{t:04d}.txt"
        write_graph(g, gpath)
        files[gpath.name] = _sha256(gpath)
        entry = {"trial": t, "seed": trial_seed(cfg, t), "filter": str(filt), "graph": gpath.name,
                 "signals": {}}
        for n in cfg.n_grid:
            if n is None:
                continue
            X = trial_signals(cfg, t, n, g, filt)
            spath = out / f"signals_{t:04d}_n{n}.npy"
            with spath.open("wb") as fh:
                np.save(fh, X, allow_pickle=False)
            files[spath.name] = _sha256(spath)
            entry["signals"][str(n)] = {"file": spath.name, "seed": trial_seed(cfg, t, n)}
        trials.append(entry)
    manifest = {"config": cfg.to_dict(), "config_hash": cfg.config_hash(), "trials": trials,
                "sha256": files}
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return mpath


def verify_manifest(directory) -> dict:
    """Check every file hash listed in ``manifest.json``; raises on mismatch."""
    directory = Path(directory)
    mpath = directory / "manifest.json"
    try:
        manifest = json.loads(mpath.read_text())
    except (OSError, ValueError) as e:
        raise ManifestError(f"cannot read {mpath}: {e}") from None
    bad = []
    for name, digest in manifest.get("sha256", {}).items():
        p = directory / name
        if not p.exists() or _sha256(p) != digest:
            bad.append(name)
    if bad:
        raise ManifestError(f"hash mismatch for {len(bad)} file(s): {', '.join(sorted(bad))}")
    return manifest


def load_trial(directory, trial: int, n: int):
    """Read back the graph and signal matrix written by :func:`cmd_generate`."""
    directory = Path(directory)
    g = read_graph(directory / f"graph_{trial:04d}.txt")
    X = np.load(directory / f"signals_{trial:04d}_n{n}.npy", allow_pickle=False)
    return g, X


def cmd_solve(cfg: ExperimentConfig, threads: int = 1, max_rows: Optional[int] = None):
    """Run ``cfg.method`` for every (trial, n); returns ``(csv_path, failures)``.

    Rows already present for the same config hash are skipped, so an
    interrupted run can be resumed.  ``max_rows`` stops after that many new
    rows (used to exercise resumption).
    """
    out = cfg.resolved_output()
    out.mkdir(parents=True, exist_ok=True)
    path = out / "results.csv"
    rows = _read_rows(path)
    done = {_row_key(r) for r in rows}
    h = cfg.config_hash()
    todo = [(t, n) for t in range(cfg.trials) for n in cfg.n_grid
            if (h, t, math.inf if n is None else n) not in done]
    if max_rows is not None:
        todo = todo[:max_rows]
    eps_train = {}
    if cfg.binarization.kind == "train" and cfg.method:
        for n in sorted({n for _, n in todo}, key=lambda v: math.inf if v is None else v):
            eps_train[n] = _train_eps(cfg, cfg.method, n)
    new = not path.exists()
    with path.open("a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        if new:
            w.writeheader()
        for row in _pool_map(lambda tn: solve_trial(cfg, tn[0], tn[1], eps_train.get(tn[1])), todo, threads):
            w.writerow(row)
            fh.flush()
            rows.append(row)
    rows.sort(key=_row_key)
    _write_rows(path, rows, RESULT_COLUMNS)
    failures = sum(r["status"] == "diverged" for r in rows if r["config_hash"] == h)
    return path, failures


def _recovery_trial(cfg, trial):
    g, filt = trial_graph(cfg, trial)
    C_inf = true_covariance(filt, g)
    ref = solve_logspect(C_inf, cfg.solver.alpha, eps_eq=cfg.eps_eq, cfg=cfg.solver)
    f_star, d_star = ref.objective, ref.degrees
    res = []
    for n in cfg.n_grid:
        C_n, _ = _covariances(cfg, trial, n, g, filt)
        if n is None:
            r = ref
        else:
            try:
                r = solve_rlogspect(C_n, cfg.solver.with_(delta=_delta(cfg, n, C_n, C_inf)))
            except DivergenceError:
                res.append((n, cov_gap(C_n, C_inf), math.nan, math.nan, math.nan, True))
                continue
        _, mt = search_threshold(r.S_hat, g, cfg.binarization.grid_size)
        rel_f = abs(r.objective - f_star) / abs(f_star) if f_star != 0 else abs(r.objective)
        rel_d = float(np.linalg.norm(r.degrees - d_star) / np.linalg.norm(d_star))
        res.append((n, cov_gap(C_n, C_inf), rel_f, rel_d, mt.f_measure, not r.converged))
    return res


def cmd_recovery_curve(cfg: ExperimentConfig, threads: int = 1):
    """Per n: medians over trials of the covariance gap, relative objective
    gap, relative degree gap and F-measure.  Returns ``(csv_path, failures)``."""
    out = cfg.resolved_output()
    out.mkdir(parents=True, exist_ok=True)
    per_trial = list(_pool_map(lambda t: _recovery_trial(cfg, t), range(cfg.trials), threads))
    rows = []
    failures = 0
    for k, n in enumerate(cfg.n_grid):
        vals = np.array([tr[k][1:5] for tr in per_trial], dtype=float)
        bad = sum(tr[k][5] for tr in per_trial)
        failures += int(np.isnan(vals[:, 1]).sum())
        med = [float(np.nanmedian(vals[:, j])) if np.any(~np.isnan(vals[:, j])) else math.nan
               for j in range(4)]
        rows.append(dict(zip(CURVE_COLUMNS, [_n_str(n), cfg.trials, bad] + [repr(v) for v in med])))
    path = out / "recovery_curve.csv"
    _write_rows(path, rows, CURVE_COLUMNS)
    return path, failures


def cmd_feascheck(cfg: ExperimentConfig, threads: int = 1) -> Path:
    """Infeasibility frequency and mean delta_min of rSpecT for each n."""
    out = cfg.resolved_output()
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for n in cfg.n_grid:
        freq, mean = infeasibility_frequency(cfg.ensemble, cfg.filter, n, cfg.trials,
                                             seed=cfg.root_seed, workers=threads)
        rows.append({"n": _n_str(n), "trials": cfg.trials, "frequency": repr(freq),
                     "mean_delta_min": repr(mean)})
    path = out / "feascheck.csv"
    _write_rows(path, rows, FEAS_COLUMNS)
    return path


def cmd_eval(results_csv, out_csv=None) -> Path:
    """Summaries of a results CSV grouped by method, family, filter, m and n."""
    results_csv = Path(results_csv)
    rows = _read_rows(results_csv)
    if not rows:
        raise ParameterError(f"no result rows in {results_csv}")
    groups = {}
    for r in rows:
        key = (r["method"], r["family"], r["filter"], r["m"], r["n"])
        rep = RecoveryReport(method=r["method"], f_measure=float(r["f_measure"]),
                             precision=float(r["precision"]), recall=float(r["recall"]),
                             cov_gap=float(r["cov_gap"]))
        groups.setdefault(key, []).append(rep)
    stats = ("f_measure", "precision", "recall", "cov_gap")
    cols = ["method", "family", "filter", "m", "n", "trials"]
    cols += [f"{s}_{q}" for s in stats for q in ("mean", "median", "q1", "q3")]
    out_rows = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], int(k[3]), math.inf if k[4] == "inf" else int(k[4]))):
        summ = aggregate(groups[key], stats)
        row = dict(zip(cols, list(key) + [len(groups[key])]))
        for s in stats:
            for q in ("mean", "median", "q1", "q3"):
                row[f"{s}_{q}"] = repr(summ[s][q])
        out_rows.append(row)
    out_csv = Path(out_csv) if out_csv else results_csv.with_name("summary.csv")
    _write_rows(out_csv, out_rows, cols)
    return out_csv


# -- argument parsing ---------------------------------------------------------------


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


_SOLVER_FLAGS = {
    "alpha": float, "delta": float, "rho0": float, "tau": float, "max_iters": int,
    "eps_primal": float, "eps_dual": float, "rho_adapt": _bool, "rho_adapt_every": int,
    "rho_max_changes": int, "normalize": _bool, "record_objective": _bool,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--output-dir", help=f"output directory (relative to ${OUTPUT_ROOT_ENV} if set)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--family", choices=("ER", "BA"))
    p.add_argument("--m", type=int, help="number of nodes")
    p.add_argument("--p", type=float, help="ER edge probability")
    p.add_argument("--filter", help="lowpass-exp[:t], highpass-exp[:t], qua, poly:c0,c1,.. or random")
    p.add_argument("--n-grid", help="comma-separated sample counts, 'inf' for the exact covariance")
    p.add_argument("--delta-rule", help="sqrtlogn:c or covgap:c")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, dest="root_seed", help="root seed")
    p.add_argument("--binarization", choices=("fixed", "search", "train"))
    p.add_argument("--eps", type=float, help="fixed threshold")
    p.add_argument("--eps-eq", type=float, help="relative radius for the equality models")
    for name, typ in _SOLVER_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), type=typ, dest="solver_" + name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logspect", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    g = sub.add_parser("generate", help="write graphs, signals and a manifest")
    _add_common(g)
    g.add_argument("--verify", metavar="DIR", help="check the manifest hashes in DIR instead")
    s = sub.add_parser("solve", help="run a method on every trial and n")
    _add_common(s)
    r = sub.add_parser("recovery-curve", help="rLogSpecT convergence to LogSpecT over n")
    _add_common(r)
    f = sub.add_parser("feascheck", help="rSpecT infeasibility frequency over n")
    _add_common(f)
    e = sub.add_parser("eval", help="summarize a results CSV")
    e.add_argument("results", help="results.csv written by 'solve'")
    e.add_argument("-o", "--out", help="summary CSV (default: summary.csv next to the input)")
    return parser


def config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    ens = {}
    for k in ("family", "m", "p"):
        if getattr(args, k) is not None:
            ens[k] = getattr(args, k)
    if ens:
        cfg = replace(cfg, ensemble=replace(cfg.ensemble, **ens))
    solver = {k[7:]: v for k, v in vars(args).items() if k.startswith("solver_") and v is not None}
    if solver:
        cfg = replace(cfg, solver=cfg.solver.with_(**solver))
    top = {}
    if args.n_grid:
        top["n_grid"] = tuple(v.strip() for v in args.n_grid.split(","))
    if args.delta_rule:
        top["delta_rule"] = DeltaRule.parse(args.delta_rule)
    for k in ("filter", "method", "trials", "root_seed", "output_dir", "eps_eq"):
        if getattr(args, k) is not None:
            top[k] = getattr(args, k)
    if args.binarization or args.eps is not None:
        b = cfg.binarization
        top["binarization"] = replace(b, kind=args.binarization or b.kind,
                                      eps=b.eps if args.eps is None else args.eps)
    return replace(cfg, **top) if top else cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "eval":
            print(cmd_eval(args.results, args.out))
            return EXIT_OK
        if args.command == "generate" and args.verify:
            verify_manifest(args.verify)
            print(f"{args.verify}: manifest OK")
            return EXIT_OK
        cfg = config_from_args(args)
        if args.threads < 1:
            raise ParameterError("--threads must be at least 1")
        failures = 0
        if args.command == "generate":
            print(cmd_generate(cfg))
        elif args.command == "solve":
            path, failures = cmd_solve(cfg, threads=args.threads)
            print(path)
        elif args.command == "recovery-curve":
            path, failures = cmd_recovery_curve(cfg, threads=args.threads)
            print(path)
        elif args.command == "feascheck":
            print(cmd_feascheck(cfg, threads=args.threads))
    except (LogSpecTError, ValueError, OSError) as e:
        print(f"logspect: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if failures:
        print(f"logspect: {failures} trial(s) failed numerically", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Binarization of learned weights, edge-recovery metrics and trial summaries.

Weights are normalized by their maximum and thresholded at ``eps``.  The
threshold is either fixed, searched per graph against the ground truth, or
trained on a set of (weights, truth) pairs.  Metrics count each unordered
pair once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ParameterError, ShapeError
from .graphs import AdjacencyMatrix

__all__ = [
    "BinarizationStrategy",
    "RecoveryMetrics",
    "RecoveryReport",
    "binarize",
    "metrics",
    "search_threshold",
    "train_threshold",
    "threshold_grid",
    "aggregate",
    "SUMMARY_FIELDS",
]

_KINDS = ("fixed", "search", "train")


@dataclass(frozen=True)
class BinarizationStrategy:
    """How to pick the threshold: ``fixed`` uses ``eps``; ``search`` picks the
    best ``eps`` per graph; ``train`` picks it on ``train_size`` held-out
    graphs."""

    kind: str = "search"
    eps: float = 0.5
    grid_size: int = 101
    train_size: int = 10

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"binarization kind must be one of {_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.eps <= 1.0:
            raise ParameterError(f"eps must lie in [0, 1], got {self.eps}")
        if self.grid_size < 2:
            raise ParameterError("grid_size must be at least 2")
        if self.train_size < 1:
            raise ParameterError("train_size must be at least 1")


def threshold_grid(grid_size: int = 101, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    if grid_size < 2:
        raise ParameterError("grid_size must be at least 2")
    return np.linspace(lo, hi, grid_size)


def _upper(W) -> np.ndarray:
    if isinstance(W, AdjacencyMatrix):
        return W.upper
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {W.shape}")
    return W[np.triu_indices(W.shape[0], 1)]


def _m_of(W) -> int:
    return W.m if isinstance(W, AdjacencyMatrix) else np.asarray(W).shape[0]


def _normalized(w: np.ndarray):
    top = float(w.max()) if w.size else 0.0
    if top <= 0.0:
        return None
    return w / top


def binarize(W, eps: float) -> AdjacencyMatrix:
    """Keep the pairs with ``W_ij / max(W) >= eps``.

    An all-zero ``W`` yields the empty graph and a ``RuntimeWarning``.
    """
    if not 0.0 <= eps <= 1.0:
        raise ParameterError(f"eps must lie in [0, 1], got {eps}")
    w = _upper(W)
    m = _m_of(W)
    r = _normalized(w)
    if r is None:
        warnings.warn("binarizing an all-zero weight matrix gives the empty graph",
                      RuntimeWarning, stacklevel=2)
        return AdjacencyMatrix.zeros(m)
    return AdjacencyMatrix(m, (r >= eps).astype(float))


@dataclass(frozen=True)
class RecoveryMetrics:
    f_measure: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "RecoveryMetrics":
        den = 2 * tp + fn + fp
        f = 2 * tp / den if den > 0 else 0.0
        prec = tp / (tp + fp) if tp + fp > 0 else 0.0
        rec = tp / (tp + fn) if tp + fn > 0 else 0.0
        return cls(f, prec, rec, int(tp), int(fp), int(fn))


def _counts(pred: np.ndarray, truth: np.ndarray):
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    return tp, fp, fn


def metrics(learned, truth) -> RecoveryMetrics:
    """Edge-recovery counts over the strict upper triangle (nonzero = edge)."""
    a, b = _upper(learned), _upper(truth)
    if a.shape != b.shape:
        raise ShapeError(f"graphs have different sizes: {_m_of(learned)} vs {_m_of(truth)}")
    return RecoveryMetrics.from_counts(*_counts(a != 0, b != 0))


def _f_on_grid(w: np.ndarray, truth: np.ndarray, grid: np.ndarray) -> np.ndarray:
    r = _normalized(w)
    t = truth != 0
    out = np.empty(grid.size)
    for k, eps in enumerate(grid):
        pred = (r >= eps) if r is not None else np.zeros_like(t)
        out[k] = RecoveryMetrics.from_counts(*_counts(pred, t)).f_measure
    return out


def _argmax_last(v: np.ndarray) -> int:
    # ties go to the largest threshold, i.e. the sparsest graph
    return int(v.size - 1 - np.argmax(v[::-1]))


def search_threshold(W, truth, grid_size: int = 101, grid: Optional[np.ndarray] = None):
    """Threshold on a uniform grid over [0, 1] with the best F-measure.

    Returns ``(eps_star, metrics_at_eps_star)``.
    """
    w, t = _upper(W), _upper(truth)
    if w.shape != t.shape:
        raise ShapeError(f"graphs have different sizes: {_m_of(W)} vs {_m_of(truth)}")
    grid = threshold_grid(grid_size) if grid is None else np.asarray(grid, dtype=float)
    f = _f_on_grid(w, t, grid)
    eps = float(grid[_argmax_last(f)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return eps, metrics(binarize(W, eps), truth)


def train_threshold(pairs: Sequence, grid_size: int = 101, grid: Optional[np.ndarray] = None) -> float:
    """Threshold maximizing the mean F-measure over ``(W, truth)`` pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ParameterError("training set is empty")
    grid = threshold_grid(grid_size) if grid is None else np.asarray(grid, dtype=float)
    total = np.zeros(grid.size)
    for W, truth in pairs:
        w, t = _upper(W), _upper(truth)
        if w.shape != t.shape:
            raise ShapeError("training pair has mismatched sizes")
        total += _f_on_grid(w, t, grid)
    return float(grid[_argmax_last(total / len(pairs))])


@dataclass
class RecoveryReport:
    """One trial: configuration keys plus outcome numbers."""

    method: str
    family: str = ""
    filter: str = ""
    m: int = 0
    n: Optional[int] = None
    trial: int = 0
    seed: int = 0
    delta: float = math.nan
    eps: float = math.nan
    f_measure: float = math.nan
    precision: float = math.nan
    recall: float = math.nan
    objective: float = math.nan
    objective_gap: float = math.nan
    degree_gap: float = math.nan
    cov_gap: float = math.nan
    iterations: int = 0
    converged: bool = True
    status: str = "ok"

    @classmethod
    def from_metrics(cls, method: str, mt: RecoveryMetrics, **kw) -> "RecoveryReport":
        return cls(method=method, f_measure=mt.f_measure, precision=mt.precision, recall=mt.recall, **kw)

    def as_row(self) -> dict:
        return asdict(self)


SUMMARY_FIELDS = ("f_measure", "precision", "recall", "objective_gap", "degree_gap", "cov_gap")


def _stats(x: np.ndarray) -> dict:
    x = x[~np.isnan(x)]
    if x.size == 0:
        return {"count": 0, "mean": math.nan, "median": math.nan, "q1": math.nan, "q3": math.nan}
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    return {"count": int(x.size), "mean": float(x.mean()), "median": float(med),
            "q1": float(q1), "q3": float(q3)}


def aggregate(reports: Iterable[RecoveryReport], fields_: Sequence[str] = SUMMARY_FIELDS) -> dict:
    """Mean, median and quartiles of each summary field (NaNs skipped).

    Quantiles use linear interpolation, so the median of ``{0, 1}`` is 0.5.
    """
    reports = list(reports)
    if not reports:
        raise ParameterError("nothing to aggregate")
    known = {f.name for f in fields(RecoveryReport)}
    out = {}
    for name in fields_:
        if name not in known:
            raise ParameterError(f"unknown report field {name!r}")
        out[name] = _stats(np.array([getattr(r, name) for r in reports], dtype=float))
    return out

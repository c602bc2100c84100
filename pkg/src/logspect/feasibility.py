"""Infeasibility certificates for rSpecT and the smallest feasible radius.

rSpecT asks for a valid ``S`` with ``sum_j S_1j = 1`` and
``||C S - S C||_F <= delta``.  In edge coordinates ``S = B(y)`` the constraint
set is a simplex (the ``m - 1`` edges of node 0) times a nonnegative orthant,
and ``delta_min`` is the distance from that polytope's image to zero.  When
the explicit matrix of ``y -> vec(C B(y) - B(y) C)`` has full column rank no
nonzero nonnegative ``y`` is mapped to zero, so ``delta_min > 0``.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels as _k
from .errors import ParameterError
from .graphs import GraphEnsembleSpec, generate, num_pairs
from .linops import MAX_ASSEMBLY_NODES, CommutatorOp, assemble_AnB
from .signals import (
    CovarianceEstimate,
    FilterSpec,
    random_filter,
    sample_covariance,
    sample_signals,
    seed_for,
    true_covariance,
)

__all__ = [
    "FeasibilityReport",
    "DeltaMinInfo",
    "rank_certificate",
    "delta_min",
    "feasibility_report",
    "infeasibility_frequency",
]


def _as_cov(C) -> CovarianceEstimate:
    return C if isinstance(C, CovarianceEstimate) else CovarianceEstimate(np.asarray(C, dtype=float))


@dataclass(frozen=True)
class FeasibilityReport:
    m: int
    rank_AnB: int
    full_column_rank: bool
    delta_min: float
    certificate_kind: str  # "RankCertificate" or "DeltaMinOnly"

    def __post_init__(self):
        if not 0 <= self.rank_AnB <= min(self.m * self.m, num_pairs(self.m)):
            raise ParameterError(f"rank {self.rank_AnB} out of range for m={self.m}")
        if not self.delta_min >= 0:
            raise ParameterError("delta_min must be nonnegative")
        if self.certificate_kind not in ("RankCertificate", "DeltaMinOnly"):
            raise ParameterError(f"unknown certificate kind {self.certificate_kind!r}")

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def rank_certificate(C, rtol: Optional[float] = None, max_nodes: int = MAX_ASSEMBLY_NODES):
    """Numerical rank of the assembled ``A_n B`` and whether it is full.

    The default tolerance is the usual ``max(shape) * sigma_max * eps``;
    ``rtol`` replaces the ``max(shape) * eps`` factor.  Returns
    ``(rank, full_column_rank)``.  Full column rank certifies that rSpecT
    is infeasible for all radii below some positive threshold.
    """
    K = assemble_AnB(CommutatorOp(_as_cov(C)), max_nodes=max_nodes)
    sv = np.linalg.svd(K, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0, False
    if rtol is None:
        rtol = max(K.shape) * np.finfo(float).eps
    rank = int(np.sum(sv > rtol * sv[0]))
    return rank, rank == K.shape[1]


@dataclass(frozen=True)
class DeltaMinInfo:
    value: float
    iterations: int
    converged: bool
    S: np.ndarray  # minimizer as an m x m matrix with first row summing to 1


def delta_min(C, tol: float = 1e-10, max_iters: int = 200_000, return_info: bool = False,
              max_nodes: int = MAX_ASSEMBLY_NODES) -> Union[float, DeltaMinInfo]:
    """Smallest ``delta`` for which rSpecT is feasible.

    Minimizes ``||C B(y) - B(y) C||_F`` over nonnegative ``y`` whose first
    ``m - 1`` entries sum to one, by accelerated projected gradient with
    restarts.  ``tol`` bounds the gradient mapping in units where the
    commutator has norm one.  If the iteration cap is hit, the best value
    found is returned and a ``RuntimeWarning`` is issued.
    """
    cov = _as_cov(C)
    m = cov.m
    if m < 2:
        raise ParameterError("need at least 2 nodes")
    if m > max_nodes:
        raise ParameterError(f"delta_min is limited to m <= {max_nodes}, got {m}")
    if tol <= 0 or max_iters < 1:
        raise ParameterError("tol must be positive and max_iters at least 1")
    op = CommutatorOp(cov)
    norm = op.norm()
    Y = np.zeros((m, m))
    Y[0, 1:] = Y[1:, 0] = 1.0 / (m - 1)
    if norm <= 0.0:
        info = DeltaMinInfo(0.0, 0, True, Y)
        return info if return_info else 0.0
    U = np.ascontiguousarray(op.eigenvectors)
    gap = np.ascontiguousarray(op.gap / norm)
    val, iters, ok = _k.fista_delta_min(Y, U, np.ascontiguousarray(U.T), gap, max_iters, tol)
    value = math.sqrt(max(val, 0.0)) * norm
    if not ok:
        warnings.warn(f"delta_min stopped at the iteration cap ({max_iters}); value may be high",
                      RuntimeWarning, stacklevel=2)
    if return_info:
        return DeltaMinInfo(value, iters, ok, Y)
    return value


def feasibility_report(C, tol: float = 1e-10, rtol: Optional[float] = None) -> FeasibilityReport:
    cov = _as_cov(C)
    rank, full = rank_certificate(cov, rtol=rtol)
    dmin = delta_min(cov, tol=tol)
    kind = "RankCertificate" if full else "DeltaMinOnly"
    return FeasibilityReport(cov.m, rank, full, dmin, kind)


FilterLaw = Union[str, FilterSpec, Callable[[np.random.Generator], FilterSpec]]


def _filter_for(law: FilterLaw, rng) -> FilterSpec:
    if isinstance(law, FilterSpec):
        return law
    if isinstance(law, str):
        if law == "random":
            return random_filter(rng)
        return FilterSpec.parse(law)
    return law(rng)


def _trial(ensemble, law, n_samples, seed, tol, trial):
    rng = np.random.default_rng(seed_for(seed, trial))
    g = generate(ensemble, rng)
    filt = _filter_for(law, rng)
    if n_samples is None:
        cov = true_covariance(filt, g)
    else:
        cov = sample_covariance(sample_signals(filt, g, n_samples, seed=rng))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return delta_min(cov, tol=tol)


def infeasibility_frequency(ensemble: GraphEnsembleSpec, filter_law: FilterLaw = "random",
                            n_samples: Optional[int] = 100, trials: int = 50, seed: int = 0,
                            tol_pos: float = 1e-6, tol: float = 1e-10, workers: int = 1,
                            return_values: bool = False):
    """Monte-Carlo estimate of how often rSpecT is infeasible at ``delta = 0``.

    Each trial draws a graph, a filter from ``filter_law`` (``"random"``
    gives ``t1 S^2 + t2 S + t3 I`` with Gaussian coefficients), and
    ``n_samples`` signals (``None`` uses the exact covariance), then computes
    ``delta_min``.  Trial ``i`` uses the seed ``seed_for(seed, i)``.
    Returns ``(frequency of delta_min > tol_pos, mean delta_min)``.
    """
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    if n_samples is not None and n_samples < 1:
        raise ParameterError(f"n_samples must be positive, got {n_samples}")
    if tol_pos < 0:
        raise ParameterError("tol_pos must be nonnegative")
    args = [(ensemble, filter_law, n_samples, seed, tol, i) for i in range(trials)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            vals = list(pool.map(lambda a: _trial(*a), args))
    else:
        vals = [_trial(*a) for a in args]
    vals = np.asarray(vals)
    freq, mean = float(np.mean(vals > tol_pos)), float(np.mean(vals))
    if return_values:
        return freq, mean, vals
    return freq, mean

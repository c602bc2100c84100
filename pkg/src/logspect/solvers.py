"""Solvers for the spectral-template graph learning models.

``solve_rlogspect`` runs a linearized ADMM on

    min_S  ||S||_{1,1} - alpha * sum(log(S 1))
    s.t.   S valid adjacency,  ||C S - S C||_F <= delta

split as ``C S - S C = Z`` (``Z`` in the delta-ball) and ``q = S 1``.  The
``(Z, q)`` block has closed-form updates, the ``S`` block is a projected
gradient step on the linearized augmented Lagrangian.

All commutator products are done in the eigenbasis of ``C`` where the
commutator is an elementwise product, so an iteration costs four dense
``m x m`` matrix products.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DivergenceError, InfeasibleError, ParameterError, ValidationError
from .graphs import AdjacencyMatrix, project_valid_array
from . import _kernels as _k
from .linops import CommutatorOp
from .signals import CovarianceEstimate

__all__ = [
    "SolverConfig",
    "SolveResult",
    "LADMM",
    "RSpecTADMM",
    "solve_rlogspect",
    "solve_logspect",
    "solve_rspect",
    "correlation_baseline",
    "correlation_weights",
    "logspect_objective",
    "default_tau",
    "project_simplex",
]

log = logging.getLogger(__name__)

_TINY_DEGREE = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of the L-ADMM solvers.

    ``tau`` is the proximal parameter of the linearized ``S`` step; when
    unset it defaults to ``1.05 * (m + ||A||^2)`` where ``A`` is the
    commutator actually iterated on.  With ``normalize`` (the default) the
    covariance is rescaled so that ``||A|| = 1`` and ``delta`` is rescaled
    with it; this leaves the optimization problem unchanged and only
    balances the two constraint blocks of the splitting.

    The penalty is updated by residual balancing (double when
    ``p_res > 5 d_res``, halve when ``d_res > 5 p_res``), checked every
    ``rho_adapt_every`` iterations.  After ``rho_max_changes`` changes the
    penalty is frozen: unrestricted switching can cycle and blow up, while
    a finite number of changes keeps the fixed-penalty convergence theory.
    """

    alpha: float = 1.0
    delta: float = 0.0
    rho0: float = 1.0
    tau: Optional[float] = None
    max_iters: int = 50_000
    eps_primal: float = 1e-5
    eps_dual: float = 1e-5
    rho_adapt: bool = True
    rho_adapt_every: int = 1
    rho_max_changes: int = 50
    normalize: bool = True
    record_objective: bool = True

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ParameterError(f"delta must be nonnegative, got {self.delta}")
        if not self.rho0 > 0:
            raise ParameterError(f"rho0 must be positive, got {self.rho0}")
        if self.tau is not None and not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be at least 1")
        if self.eps_primal <= 0 or self.eps_dual <= 0:
            raise ParameterError("residual tolerances must be positive")
        if self.rho_adapt_every < 1 or self.rho_max_changes < 0:
            raise ParameterError("rho_adapt_every must be >= 1 and rho_max_changes >= 0")

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


@dataclass
class SolveResult:
    S_hat: AdjacencyMatrix
    objective: float
    iterations: int
    converged: bool
    p_res: float
    d_res: float
    rho: float
    tau: float
    delta: float
    commutator_norm: float
    method: str = "rLogSpecT"
    p_history: np.ndarray = field(default=None, repr=False)
    d_history: np.ndarray = field(default=None, repr=False)
    objective_history: np.ndarray = field(default=None, repr=False)

    @property
    def degrees(self) -> np.ndarray:
        return self.S_hat.degrees

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "objective": _json_float(self.objective),
            "iterations": self.iterations,
            "converged": self.converged,
            "p_res": self.p_res,
            "d_res": self.d_res,
            "rho": self.rho,
            "tau": self.tau,
            "delta": self.delta,
            "commutator_norm": self.commutator_norm,
            "m": self.S_hat.m,
            "S_upper": self.S_hat.upper.tolist(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "SolveResult":
        obj = d["objective"]
        return cls(
            S_hat=AdjacencyMatrix(d["m"], d["S_upper"]),
            objective=math.inf if obj is None else obj,
            iterations=d["iterations"],
            converged=d["converged"],
            p_res=d["p_res"],
            d_res=d["d_res"],
            rho=d["rho"],
            tau=d["tau"],
            delta=d["delta"],
            commutator_norm=d["commutator_norm"],
            method=d.get("method", "rLogSpecT"),
        )


def _json_float(x):
    return x if math.isfinite(x) else None


def logspect_objective(S, alpha: float) -> float:
    """``||S||_{1,1} - alpha * sum(log(S 1))``, or ``inf`` if a degree vanishes."""
    S = S.W if isinstance(S, AdjacencyMatrix) else np.asarray(S)
    d = S.sum(axis=1)
    if np.any(d <= _TINY_DEGREE):
        return math.inf
    return float(np.abs(S).sum() - alpha * np.log(d).sum())


def default_tau(m: int, op_norm: float) -> float:
    return 1.05 * (m + op_norm**2)


def _as_cov(C) -> CovarianceEstimate:
    return C if isinstance(C, CovarianceEstimate) else CovarianceEstimate(C)


class _Scaled:
    """Commutator data in the eigenbasis, optionally normalized to unit norm."""

    def __init__(self, cov: CovarianceEstimate, normalize: bool):
        self.op = CommutatorOp(cov)
        raw = self.op.norm()
        self.scale = raw if (normalize and raw > 0) else 1.0
        self.gap = np.ascontiguousarray(self.op.gap / self.scale)
        self.norm = raw / self.scale
        self.U = np.ascontiguousarray(self.op.eigenvectors)
        self.Ut = np.ascontiguousarray(self.U.T)

    def rot(self, X):
        return self.U.T @ X @ self.U

    def unrot(self, X):
        return self.U @ X @ self.U.T


class LADMM:
    """Iteration state of the rLogSpecT linearized ADMM.

    ``Z`` and ``Lambda`` are kept in the eigenbasis of ``C`` (and in the
    normalized units when ``cfg.normalize``); the properties :attr:`Z` and
    :attr:`Lambda` rotate them back.  Call :meth:`step` to advance one
    iteration or :meth:`run` to iterate to convergence.
    """

    def __init__(self, C, cfg: SolverConfig, S0=None):
        self.cov = _as_cov(C)
        self.cfg = cfg
        m = self.cov.m
        if m < 2:
            raise ParameterError("need at least 2 nodes")
        self.m = m
        self._sc = _Scaled(self.cov, cfg.normalize)
        self.delta = cfg.delta / self._sc.scale
        self.tau_min = m + self._sc.norm**2
        self.tau = default_tau(m, self._sc.norm) if cfg.tau is None else cfg.tau
        if self.tau <= self.tau_min:
            warnings.warn(
                f"tau={self.tau:.4g} does not exceed m + ||A||^2 = {self.tau_min:.4g}; "
                "convergence is not guaranteed",
                RuntimeWarning,
                stacklevel=2,
            )
        if S0 is None:
            S0 = (cfg.alpha / (m - 1)) * (np.ones((m, m)) - np.eye(m))
        self.S = project_valid_array(np.asarray(S0, dtype=float))
        self._AS = self._sc.gap * self._sc.rot(self.S)
        self._Zh = np.zeros((m, m))
        self._Lh = np.zeros((m, m))
        self.lam2 = np.zeros(m)
        self.q = self.S.sum(axis=1)
        self._state = np.array([float(cfg.rho0), math.inf, math.inf])
        self._changes = np.zeros(1, dtype=np.int64)
        self.k = 0
        n = cfg.max_iters
        self._p_hist = np.full(n, np.nan)
        self._d_hist = np.full(n, np.nan)
        self._o_hist = np.full(n, np.nan)

    @property
    def rho(self) -> float:
        return float(self._state[0])

    @property
    def p_res(self) -> float:
        return float(self._state[1])

    @property
    def d_res(self) -> float:
        return float(self._state[2])

    @property
    def Z(self):
        return self._sc.unrot(self._Zh) * self._sc.scale

    @property
    def Z_norm(self):
        """``||Z||_F`` in the units of ``delta`` passed by the caller."""
        return float(np.linalg.norm(self._Zh)) * self._sc.scale

    @property
    def Lambda(self):
        return self._sc.unrot(self._Lh)

    def _advance(self, n):
        if self.k + n > self.cfg.max_iters:
            raise ParameterError("iteration budget exhausted")
        sc, cfg = self._sc, self.cfg
        done, status = _k.ladmm_rlogspect(
            self.S, self._AS, self._Zh, self._Lh, self.lam2, self.q, self._state,
            sc.U, sc.Ut, sc.gap, cfg.alpha, self.delta, self.tau, n,
            cfg.eps_primal, cfg.eps_dual, cfg.rho_adapt, cfg.rho_adapt_every, cfg.rho_max_changes,
            self._changes, self._p_hist, self._d_hist, self._o_hist, self.k, cfg.record_objective,
        )
        self.k += done
        if status == 2:
            hist = list(zip(self._p_hist[: self.k], self._d_hist[: self.k]))
            raise DivergenceError("L-ADMM produced non-finite iterates", self.k, hist)
        return status

    def step(self):
        """One iteration: (Z, q) update, S update, dual ascent, rho update."""
        self._advance(1)

    @property
    def converged(self) -> bool:
        return self.p_res < self.cfg.eps_primal and self.d_res < self.cfg.eps_dual

    def run(self) -> "SolveResult":
        if not self.converged and self.k < self.cfg.max_iters:
            self._advance(self.cfg.max_iters - self.k)
        if not self.converged:
            log.info("L-ADMM stopped at max_iters=%d (p=%.2e d=%.2e)", self.k, self.p_res, self.d_res)
        return self.result()

    def result(self) -> "SolveResult":
        S_hat = AdjacencyMatrix.from_dense(self.S)
        comm = float(np.linalg.norm(self._AS)) * self._sc.scale
        k = self.k
        return SolveResult(
            S_hat=S_hat,
            objective=logspect_objective(self.S, self.cfg.alpha),
            iterations=k,
            converged=self.converged,
            p_res=self.p_res,
            d_res=self.d_res,
            rho=self.rho,
            tau=self.tau,
            delta=self.cfg.delta,
            commutator_norm=comm,
            method="rLogSpecT",
            p_history=self._p_hist[:k].copy(),
            d_history=self._d_hist[:k].copy(),
            objective_history=self._o_hist[:k].copy() if self.cfg.record_objective else None,
        )


def solve_rlogspect(C, cfg: SolverConfig = SolverConfig(), S0=None) -> SolveResult:
    """Learn a graph with rLogSpecT by linearized ADMM.

    Parameters
    ----------
    C : CovarianceEstimate or array
        Exact or sample covariance.
    cfg : SolverConfig
        ``alpha`` and ``delta`` define the model; the rest tunes the solver.
    S0 : array, optional
        Initial iterate; defaults to the complete graph with all degrees
        equal to ``alpha``.

    Raises
    ------
    DivergenceError
        If an iterate becomes non-finite.
    """
    return LADMM(C, cfg, S0).run()


def solve_logspect(C_exact, alpha: float = 1.0, eps_eq: float = 1e-6, cfg: Optional[SolverConfig] = None, **kw) -> SolveResult:
    """LogSpecT on the exact covariance.

    The equality ``C S = S C`` is approximated by the ball of radius
    ``eps_eq * ||C||``.
    """
    cov = _as_cov(C_exact)
    if not cov.exact:
        raise ParameterError("LogSpecT needs the exact covariance (provenance 'exact')")
    lam = cov.eigh[0]
    delta = eps_eq * float(np.max(np.abs(lam))) if lam.size else 0.0
    cfg = (cfg or SolverConfig()).with_(alpha=alpha, delta=delta, **kw)
    res = solve_rlogspect(cov, cfg)
    res.method = "LogSpecT"
    return res


# -- rSpecT -----------------------------------------------------------------


def project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = total}`` (sort based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    k = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[k] / (k + 1)
    return np.maximum(v - theta, 0.0)


def _project_rspect(X: np.ndarray) -> np.ndarray:
    """Projection onto valid adjacency matrices whose first row sums to 1."""
    out = np.empty_like(X)
    _k.project_rspect(np.ascontiguousarray(X, dtype=float), out)
    return out


class RSpecTADMM:
    """Linearized ADMM for rSpecT with the same ``Z``-ball splitting.

    The normalization ``sum_j S_1j = 1`` is enforced inside the projection,
    so only the commutator constraint is dualized.  Besides the primal and
    dual residuals, the iteration also stops only once the proximal step
    ``rho * tau * ||S_new - S||_F`` is below ``eps_dual``: the commutator
    can have a large kernel, where the usual residuals are blind.
    """

    def __init__(self, C, delta: float, cfg: SolverConfig):
        self.cov = _as_cov(C)
        self.cfg = cfg
        m = self.cov.m
        self.m = m
        self._sc = _Scaled(self.cov, cfg.normalize)
        self.delta = delta / self._sc.scale
        if cfg.tau is not None:
            self.tau = cfg.tau
        else:
            self.tau = 1.05 * self._sc.norm**2 if self._sc.norm > 0 else 1.0
        self.S = _project_rspect(np.ones((m, m)) / (m - 1))
        self._AS = self._sc.gap * self._sc.rot(self.S)
        self._Lh = np.zeros((m, m))
        self._Zh = np.zeros((m, m))
        self._state = np.array([float(cfg.rho0), math.inf, math.inf, math.inf])
        self._changes = np.zeros(1, dtype=np.int64)
        self.k = 0
        self._p_hist = np.full(cfg.max_iters, np.nan)
        self._d_hist = np.full(cfg.max_iters, np.nan)

    @property
    def rho(self):
        return float(self._state[0])

    @property
    def converged(self):
        p, d, s = self._state[1:]
        c = self.cfg
        return bool(p < c.eps_primal and d < c.eps_dual and s < c.eps_dual)

    def _advance(self, n):
        sc, cfg = self._sc, self.cfg
        done, status = _k.ladmm_rspect(
            self.S, self._AS, self._Zh, self._Lh, self._state, sc.U, sc.Ut, sc.gap,
            self.delta, self.tau, n, cfg.eps_primal, cfg.eps_dual, cfg.rho_adapt,
            cfg.rho_adapt_every, cfg.rho_max_changes, self._changes, self._p_hist, self._d_hist, self.k,
        )
        self.k += done
        if status == 2:
            hist = list(zip(self._p_hist[: self.k], self._d_hist[: self.k]))
            raise DivergenceError("rSpecT ADMM produced non-finite iterates", self.k, hist)

    def step(self):
        self._advance(1)

    def run(self) -> SolveResult:
        if not self.converged and self.k < self.cfg.max_iters:
            self._advance(self.cfg.max_iters - self.k)
        S_hat = AdjacencyMatrix.from_dense(self.S)
        k = self.k
        return SolveResult(
            S_hat=S_hat,
            objective=float(self.S.sum()),
            iterations=k,
            converged=self.converged,
            p_res=float(self._state[1]),
            d_res=float(self._state[2]),
            rho=self.rho,
            tau=self.tau,
            delta=self.delta * self._sc.scale,
            commutator_norm=float(np.linalg.norm(self._AS)) * self._sc.scale,
            method="rSpecT",
            p_history=self._p_hist[:k].copy(),
            d_history=self._d_hist[:k].copy(),
        )


def solve_rspect(C, delta: float, delta_min: Optional[float] = None, cfg: Optional[SolverConfig] = None,
                 rtol: float = 1e-9) -> SolveResult:
    """Minimize ``||S||_{1,1}`` over the rSpecT feasible set.

    ``delta_min`` is the smallest feasible radius; it is computed with
    :func:`logspect.feasibility.delta_min` when not given.  A radius below
    ``delta_min * (1 - rtol)`` raises :class:`InfeasibleError`.
    """
    cov = _as_cov(C)
    if not delta >= 0:
        raise ParameterError(f"delta must be nonnegative, got {delta}")
    if cov.m < 2:
        raise ParameterError("need at least 2 nodes")
    if delta_min is None:
        from .feasibility import delta_min as _delta_min

        delta_min = _delta_min(cov)
    if delta < delta_min * (1.0 - rtol):
        raise InfeasibleError(delta, delta_min)
    cfg = cfg or SolverConfig()
    return RSpecTADMM(cov, delta, cfg).run()


# -- correlation baseline -----------------------------------------------------


def correlation_weights(C) -> AdjacencyMatrix:
    """Absolute correlations ``|C_ij| / sqrt(C_ii C_jj)`` as a weighted graph."""
    C = C.C if isinstance(C, CovarianceEstimate) else np.asarray(C, dtype=float)
    var = np.diag(C)
    if np.any(var <= 0):
        raise ValidationError("correlation needs strictly positive variances")
    s = np.sqrt(var)
    R = np.abs(C) / np.outer(s, s)
    np.fill_diagonal(R, 0.0)
    return AdjacencyMatrix.from_dense(R, symmetrize=True)


def correlation_baseline(C, threshold: float) -> AdjacencyMatrix:
    """Binary graph with an edge wherever ``|corr_ij| >= threshold``."""
    R = correlation_weights(C)
    return AdjacencyMatrix(R.m, (R.upper >= threshold).astype(float))

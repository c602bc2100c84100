"""Graph filters, stationary signal synthesis and covariance estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import GraphParseError, NumericalError, ParameterError, ShapeError, ValidationError
from .graphs import AdjacencyMatrix

__all__ = [
    "FilterSpec",
    "CovarianceEstimate",
    "DeltaRule",
    "apply_filter",
    "true_covariance",
    "sample_signals",
    "sample_covariance",
    "delta_schedule",
    "random_filter",
    "seed_for",
    "cov_gap",
    "write_signals",
    "read_signals",
]

_KINDS = ("lowpass-exp", "highpass-exp", "qua", "poly")


@dataclass(frozen=True)
class FilterSpec:
    """A graph filter ``h(S)``.

    ``lowpass-exp`` is ``exp(t S)``, ``highpass-exp`` is ``exp(-t S)``,
    ``qua`` is ``S^2 + S + I`` and ``poly`` is ``sum_i coeffs[i] S^i``.
    """

    kind: str
    t: float = 0.0
    coeffs: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown filter kind {self.kind!r}")
        if self.kind in ("lowpass-exp", "highpass-exp") and not math.isfinite(self.t):
            raise ParameterError("filter parameter t must be finite")
        if self.kind == "poly":
            coeffs = tuple(float(c) for c in self.coeffs)
            if not coeffs:
                raise ParameterError("polynomial filter needs at least one coefficient")
            if not all(math.isfinite(c) for c in coeffs):
                raise ParameterError("polynomial coefficients must be finite")
            object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def lowpass_exp(cls, t=0.5):
        return cls("lowpass-exp", t=float(t))

    @classmethod
    def highpass_exp(cls, t=1.0):
        return cls("highpass-exp", t=float(t))

    @classmethod
    def exp(cls, t):
        """``exp(t S)`` for either sign of ``t``."""
        return cls.lowpass_exp(t) if t >= 0 else cls.highpass_exp(-t)

    @classmethod
    def quadratic(cls):
        return cls("qua")

    @classmethod
    def polynomial(cls, coeffs):
        return cls("poly", coeffs=tuple(coeffs))

    @classmethod
    def parse(cls, text: str) -> "FilterSpec":
        """Parse ``qua``, ``lowpass-exp[:t]``, ``highpass-exp[:t]``, ``exp:t``
        or ``poly:c0,c1,...``."""
        name, _, arg = text.strip().lower().partition(":")
        try:
            if name == "qua":
                return cls.quadratic()
            if name == "lowpass-exp":
                return cls.lowpass_exp(float(arg) if arg else 0.5)
            if name == "highpass-exp":
                return cls.highpass_exp(float(arg) if arg else 1.0)
            if name == "exp":
                return cls.exp(float(arg))
            if name == "poly":
                return cls.polynomial(float(c) for c in arg.split(","))
        except ValueError:
            raise ParameterError(f"bad filter description {text!r}") from None
        raise ParameterError(f"bad filter description {text!r}")

    def __str__(self):
        if self.kind == "qua":
            return "qua"
        if self.kind == "poly":
            return "poly:" + ",".join(repr(c) for c in self.coeffs)
        return f"{self.kind}:{self.t!r}"

    def response(self, lam):
        """Scalar frequency response applied to eigenvalues."""
        lam = np.asarray(lam, dtype=float)
        if self.kind == "lowpass-exp":
            return np.exp(self.t * lam)
        if self.kind == "highpass-exp":
            return np.exp(-self.t * lam)
        return np.polyval(self._poly_coeffs()[::-1], lam)

    def _poly_coeffs(self):
        return (1.0, 1.0, 1.0) if self.kind == "qua" else self.coeffs

    @property
    def is_polynomial(self):
        return self.kind in ("qua", "poly")


def _eigh(S):
    try:
        lam, U = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(S) if np.all(np.isfinite(S)) else float("nan")
        raise NumericalError(
            f"eigendecomposition failed ({exc}); ||S||_F={np.linalg.norm(S):.3g}, cond={cond:.3g}"
        ) from exc
    return lam, U


def _as_matrix(g):
    if isinstance(g, AdjacencyMatrix):
        return np.array(g.W)
    S = np.asarray(g, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeError(f"graph shift must be square, got shape {S.shape}")
    return S


def apply_filter(filt: FilterSpec, g) -> np.ndarray:
    """Return ``h(S)`` as a symmetric matrix.

    Polynomials are evaluated by Horner's rule; exponentials through the
    symmetric eigendecomposition ``S = U diag(lam) U^T``.
    """
    S = _as_matrix(g)
    m = S.shape[0]
    if filt.is_polynomial:
        coeffs = filt._poly_coeffs()
        H = coeffs[-1] * np.eye(m)
        for c in coeffs[-2::-1]:
            H = H @ S
            H[np.diag_indices(m)] += c
    else:
        lam, U = _eigh(S)
        H = (U * filt.response(lam)) @ U.T
    return 0.5 * (H + H.T)


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    """Symmetric PSD covariance with provenance.

    ``n is None`` marks the exact covariance ``C_inf``; otherwise ``n`` is
    the number of samples behind the sample covariance ``C_n``.
    """

    C: np.ndarray
    n: Optional[int] = None
    _eig: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        C = np.array(self.C, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise ShapeError(f"covariance must be square, got shape {C.shape}")
        if not np.all(np.isfinite(C)):
            raise ValidationError("covariance has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(C)))) if C.size else 1.0
        if not np.allclose(C, C.T, rtol=0.0, atol=1e-10 * scale):
            raise ValidationError("covariance is not symmetric")
        C = 0.5 * (C + C.T)
        lam, U = _eigh(C)
        if lam.size and lam[0] < -1e-8 * max(1.0, lam[-1]):
            raise ValidationError(f"covariance is not PSD (min eigenvalue {lam[0]:.3g})")
        if self.n is not None and self.n < 1:
            raise ParameterError("sample count must be positive")
        C.setflags(write=False)
        lam.setflags(write=False)
        U.setflags(write=False)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "_eig", (lam, U))

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def exact(self) -> bool:
        return self.n is None

    @property
    def eigh(self):
        """Cached ``(eigenvalues ascending, eigenvectors)``."""
        return self._eig

    @property
    def provenance(self) -> str:
        return "exact" if self.exact else f"sample(n={self.n})"


def true_covariance(filt: FilterSpec, g) -> CovarianceEstimate:
    """Exact covariance ``h(S) h(S)^T = h(S)^2`` of ``x = h(S) w``."""
    H = apply_filter(filt, g)
    C = H @ H
    return CovarianceEstimate(0.5 * (C + C.T))


def sample_signals(filt: FilterSpec, g, n: int, seed=None, noise=None) -> np.ndarray:
    """Draw ``n`` stationary signals ``h(S) w`` with ``w ~ N(0, I)``.

    Returns an ``m x n`` matrix with one signal per column.  ``noise`` may
    fix the white inputs (an ``m x n`` array) instead of sampling them.
    """
    if n < 1:
        raise ParameterError(f"sample count must be at least 1, got {n}")
    H = apply_filter(filt, g)
    m = H.shape[0]
    if noise is None:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        noise = rng.standard_normal((m, n))
    else:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (m, n):
            raise ShapeError(f"noise must have shape {(m, n)}, got {noise.shape}")
    return H @ noise


def sample_covariance(X, center: bool = False) -> CovarianceEstimate:
    """``C_n = X X^T / n`` for signals stored as columns of ``X``.

    The signal model has zero mean, so no centering is done unless asked.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.size == 0:
        raise ParameterError("need a nonempty m x n signal matrix")
    n = X.shape[1]
    if center:
        X = X - X.mean(axis=1, keepdims=True)
    C = X @ X.T / n
    return CovarianceEstimate(0.5 * (C + C.T), n=n)


def cov_gap(Cn: CovarianceEstimate, Cinf: CovarianceEstimate) -> float:
    """Spectral-norm estimation error ``||C_n - C_inf||``."""
    return float(np.linalg.norm(Cn.C - Cinf.C, 2))


@dataclass(frozen=True)
class DeltaRule:
    """Radius schedule: ``sqrtlogn`` gives ``c sqrt(log n / n)``; ``covgap``
    gives ``c ||C_n - C_inf||``."""

    kind: str = "sqrtlogn"
    c: float = 0.2

    def __post_init__(self):
        if self.kind not in ("sqrtlogn", "covgap"):
            raise ParameterError(f"unknown delta rule {self.kind!r}")
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ParameterError("delta multiplier must be finite and nonnegative")

    @classmethod
    def parse(cls, text: str) -> "DeltaRule":
        kind, _, arg = text.strip().lower().partition(":")
        try:
            return cls(kind, float(arg) if arg else (0.2 if kind == "sqrtlogn" else 1.0))
        except ValueError:
            raise ParameterError(f"bad delta rule {text!r}") from None

    def __str__(self):
        return f"{self.kind}:{self.c!r}"

    def __call__(self, n, gap=None) -> float:
        return delta_schedule(self, n, gap)


def delta_schedule(rule: DeltaRule, n, cov_gap: Optional[float] = None) -> float:
    if rule.kind == "sqrtlogn":
        if n < 2:
            raise ParameterError("sqrt(log n / n) schedule needs n >= 2")
        return rule.c * math.sqrt(math.log(n) / n)
    if cov_gap is None or cov_gap < 0:
        raise ParameterError("covgap schedule needs a nonnegative covariance gap")
    return rule.c * cov_gap


def random_filter(rng, sigma: float = 2.0) -> FilterSpec:
    """``t1 S^2 + t2 S + t3 I`` with ``t_i ~ N(0, sigma^2)``."""
    t1, t2, t3 = rng.normal(0.0, sigma, size=3)
    return FilterSpec.polynomial((t3, t2, t1))


def seed_for(root_seed: int, *keys: int) -> int:
    """Deterministic 63-bit seed derived from a root seed and integer keys."""
    ss = np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


# -- signal files -------------------------------------------------------------


def write_signals(X, path, seed=None, filt=None) -> None:
    X = np.asarray(X, dtype=float)
    header = f"m={X.shape[0]} n={X.shape[1]} seed={seed} filter={filt}"
    np.savetxt(path, X, delimiter=",", fmt="%.17g", header=header, comments="# ")


def read_signals(path):
    """Return ``(X, header_fields)`` from a signal CSV."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise GraphParseError("missing '# m=.. n=..' header", 1)
    fields = dict(tok.split("=", 1) for tok in lines[0].lstrip("# ").split() if "=" in tok)
    try:
        m, n = int(fields["m"]), int(fields["n"])
    except (KeyError, ValueError):
        raise GraphParseError("header must define integer m and n", 1) from None
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            row = [float(v) for v in line.split(",")]
        except ValueError:
            raise GraphParseError(f"non-numeric entry in {line[:40]!r}", lineno) from None
        if len(row) != n:
            raise GraphParseError(f"expected {n} columns, got {len(row)}", lineno)
        rows.append(row)
    if len(rows) != m:
        raise GraphParseError(f"expected {m} rows, got {len(rows)}", len(lines))
    return np.array(rows).reshape(m, n), fields

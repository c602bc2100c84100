"""Commutator operator ``S -> C S - S C`` and the edge-vector map.

Everything on the solver path is Kronecker-free.  Applying the commutator
in the eigenbasis of ``C = U diag(lam) U^T`` reduces it to an elementwise
product with ``lam_i - lam_j``, which is what :class:`CommutatorOp` caches.
:func:`assemble_AnB` builds the explicit ``m^2 x m(m-1)/2`` matrix and is
meant only for rank tests on small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError, ValidationError
from .graphs import AdjacencyMatrix, num_pairs
from .signals import CovarianceEstimate

__all__ = [
    "CommutatorOp",
    "UpperTriangleVector",
    "commutator_apply",
    "commutator_adjoint_apply",
    "commutator_op_norm",
    "b_map",
    "b_map_inverse",
    "edge_gradient",
    "assemble_AnB",
    "MAX_ASSEMBLY_NODES",
]

MAX_ASSEMBLY_NODES = 200


class CommutatorOp:
    """Linear map ``S -> C S - S C`` for a symmetric ``C``.

    The eigendecomposition of ``C`` is computed once and reused.  Instances
    are immutable.
    """

    def __init__(self, C):
        if isinstance(C, CovarianceEstimate):
            self.C = C.C
            lam, U = C.eigh
        else:
            C = np.array(C, dtype=float)
            if C.ndim != 2 or C.shape[0] != C.shape[1]:
                raise ShapeError(f"C must be square, got shape {C.shape}")
            if not np.allclose(C, C.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(C).max())):
                raise ValidationError("commutator needs a symmetric C")
            C = 0.5 * (C + C.T)
            C.setflags(write=False)
            self.C = C
            lam, U = np.linalg.eigh(C)
        self.eigenvalues = lam
        self.eigenvectors = U
        # elementwise symbol of the commutator in the eigenbasis
        gap = lam[:, None] - lam[None, :]
        gap.setflags(write=False)
        self.gap = gap

    @property
    def m(self) -> int:
        return self.C.shape[0]

    def _check(self, S):
        S = np.asarray(S, dtype=float)
        if S.shape != self.C.shape:
            raise ShapeError(f"expected shape {self.C.shape}, got {S.shape}")
        return S

    def apply(self, S) -> np.ndarray:
        S = self._check(S)
        return self.C @ S - S @ self.C

    def adjoint_apply(self, Y) -> np.ndarray:
        # C is symmetric, so C^T Y - Y C^T = C Y - Y C
        Y = self._check(Y)
        return self.C @ Y - Y @ self.C

    def norm(self) -> float:
        """Spectral norm of ``I (x) C - C (x) I``: ``lam_max - lam_min``."""
        lam = self.eigenvalues
        return float(lam[-1] - lam[0]) if lam.size else 0.0

    def to_eigenbasis(self, X):
        U = self.eigenvectors
        return U.T @ X @ U

    def from_eigenbasis(self, X):
        U = self.eigenvectors
        return U @ X @ U.T


def _op(op):
    return op if isinstance(op, CommutatorOp) else CommutatorOp(op)


def commutator_apply(op, S) -> np.ndarray:
    return _op(op).apply(S)


def commutator_adjoint_apply(op, Y) -> np.ndarray:
    return _op(op).adjoint_apply(Y)


def commutator_op_norm(op) -> float:
    return _op(op).norm()


@dataclass(frozen=True, eq=False)
class UpperTriangleVector:
    """Edge-weight vector ``y`` of length ``m(m-1)/2``.

    Entry ``k`` is the weight of the ``k``-th pair in row-major strict
    upper-triangle order (equivalently column-major strict lower triangle).
    """

    y: np.ndarray
    m: int

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        if y.size != num_pairs(self.m):
            raise ShapeError(f"{self.m} nodes need {num_pairs(self.m)} entries, got {y.size}")
        object.__setattr__(self, "y", y)

    @classmethod
    def of(cls, y):
        y = np.asarray(y, dtype=float).reshape(-1)
        m = int(round((1 + np.sqrt(1 + 8 * y.size)) / 2))
        if num_pairs(m) != y.size:
            raise ShapeError(f"length {y.size} is not m(m-1)/2 for any m")
        return cls(y, m)


def b_map(y) -> AdjacencyMatrix:
    """Edge vector -> adjacency matrix.  Negative entries are rejected."""
    if not isinstance(y, UpperTriangleVector):
        y = UpperTriangleVector.of(y)
    if np.any(y.y < 0):
        raise ValidationError("edge vector must be nonnegative")
    return AdjacencyMatrix(y.m, y.y)


def b_map_inverse(g) -> UpperTriangleVector:
    if not isinstance(g, AdjacencyMatrix):
        g = AdjacencyMatrix.from_dense(g)
    return UpperTriangleVector(np.array(g.upper), g.m)


def edge_gradient(G: np.ndarray) -> np.ndarray:
    """Adjoint of the edge map: ``y_k <- G_ij + G_ji`` for pair ``k = (i, j)``."""
    iu = np.triu_indices(G.shape[0], 1)
    return G[iu] + G.T[iu]


def assemble_AnB(op, max_nodes: int = MAX_ASSEMBLY_NODES) -> np.ndarray:
    """Explicit matrix of ``y -> vec(C B(y) - B(y) C)``.

    Column ``k`` is ``vec(C E_k - E_k C)`` with ``E_k = e_i e_j^T + e_j e_i^T``
    and ``vec`` stacking columns.
    """
    op = _op(op)
    m = op.m
    if m > max_nodes:
        raise ParameterError(f"refusing to assemble A_n B for m={m} > {max_nodes}")
    C = op.C
    iu, ju = np.triu_indices(m, 1)
    K = iu.size
    # C E_k has column j = C[:, i] and column i = C[:, j]; E_k C has row i = C[j], row j = C[i]
    out = np.zeros((m, m, K))
    k = np.arange(K)
    out[:, ju, k] += C[:, iu]
    out[:, iu, k] += C[:, ju]
    out[iu, :, k] -= C[ju, :]
    out[ju, :, k] -= C[iu, :]
    # column-major vec: index (row r, col c) -> c*m + r
    return out.transpose(1, 0, 2).reshape(m * m, K)

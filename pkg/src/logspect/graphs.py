"""Adjacency matrices, random graph ensembles and graph file I/O.

An :class:`AdjacencyMatrix` is stored canonically as its strict upper
triangle in row-major order, i.e. the entries ``(0, 1), (0, 2), ...,
(0, m-1), (1, 2), ...``.  This is the same ordering as the edge-vector
parameterization used by :func:`logspect.linops.b_map`, so the two views
are interchangeable without any index shuffling.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import GraphParseError, ParameterError, ShapeError, ValidationError

__all__ = [
    "AdjacencyMatrix",
    "GraphEnsembleSpec",
    "generate",
    "generate_er",
    "generate_ba",
    "project_valid",
    "project_valid_array",
    "read_graph",
    "write_graph",
    "read_dense_csv",
    "write_dense_csv",
    "num_pairs",
]


def num_pairs(m: int) -> int:
    return m * (m - 1) // 2


class AdjacencyMatrix:
    """Symmetric, nonnegative, zero-diagonal weight matrix.

    Parameters
    ----------
    m : int
        Number of nodes.
    upper : array_like
        Strict upper-triangle weights in row-major order, length
        ``m*(m-1)/2``.

    The instance is immutable; :attr:`W` materializes the full matrix.
    """

    __slots__ = ("_m", "_upper", "_dense")

    def __init__(self, m: int, upper):
        m = int(m)
        if m < 1:
            raise ParameterError(f"node count must be positive, got {m}")
        upper = np.array(upper, dtype=float).reshape(-1)
        if upper.size != num_pairs(m):
            raise ShapeError(
                f"upper triangle of a {m}-node graph has {num_pairs(m)} entries, "
                f"got {upper.size}"
            )
        if not np.all(np.isfinite(upper)):
            raise ValidationError("edge weights must be finite")
        if np.any(upper < 0):
            raise ValidationError("edge weights must be nonnegative")
        upper.setflags(write=False)
        self._m = m
        self._upper = upper
        self._dense = None

    @classmethod
    def from_dense(cls, W, symmetrize: bool = False, atol: float = 0.0) -> "AdjacencyMatrix":
        """Build from a full matrix, validating the invariants.

        With ``symmetrize=True`` an asymmetric input is replaced by
        ``(W + W.T) / 2``; otherwise asymmetry beyond ``atol`` is an error.
        """
        W = np.asarray(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ShapeError(f"adjacency matrix must be square, got shape {W.shape}")
        m = W.shape[0]
        if np.any(np.abs(np.diag(W)) > atol):
            raise ValidationError("adjacency matrix must have a zero diagonal")
        if not np.allclose(W, W.T, rtol=0.0, atol=atol):
            if not symmetrize:
                raise ValidationError(
                    "adjacency matrix is not symmetric (pass symmetrize=True to average)"
                )
            W = 0.5 * (W + W.T)
        iu = np.triu_indices(m, 1)
        return cls(m, W[iu])

    @classmethod
    def zeros(cls, m: int) -> "AdjacencyMatrix":
        return cls(m, np.zeros(num_pairs(m)))

    @property
    def m(self) -> int:
        return self._m

    @property
    def upper(self) -> np.ndarray:
        """Read-only strict upper triangle (row-major)."""
        return self._upper

    @property
    def W(self) -> np.ndarray:
        """Full ``m x m`` matrix (read-only view of a cached array)."""
        if self._dense is None:
            W = np.zeros((self._m, self._m))
            iu = np.triu_indices(self._m, 1)
            W[iu] = self._upper
            W.T[iu] = self._upper
            W.setflags(write=False)
            self._dense = W
        return self._dense

    def to_array(self) -> np.ndarray:
        """Writable copy of the full matrix."""
        return np.array(self.W)

    @property
    def degrees(self) -> np.ndarray:
        return self.W.sum(axis=1)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self._upper))

    def edges(self):
        """Yield ``(i, j, w)`` for every nonzero edge with ``i < j``."""
        iu, ju = np.triu_indices(self._m, 1)
        for i, j, w in zip(iu, ju, self._upper):
            if w != 0:
                yield int(i), int(j), float(w)

    def is_binary(self) -> bool:
        return bool(np.all((self._upper == 0) | (self._upper == 1)))

    def is_connected(self) -> bool:
        """Breadth-first connectivity check on the support."""
        if self._m == 1:
            return True
        adj = self.W > 0
        seen = np.zeros(self._m, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                new = adj[i] & ~seen
                seen |= new
                nxt.extend(np.flatnonzero(new).tolist())
            frontier = nxt
        return bool(seen.all())

    def permute(self, perm) -> "AdjacencyMatrix":
        perm = np.asarray(perm)
        return AdjacencyMatrix.from_dense(self.W[np.ix_(perm, perm)])

    def scaled(self, c: float) -> "AdjacencyMatrix":
        return AdjacencyMatrix(self._m, c * self._upper)

    def __eq__(self, other):
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return self._m == other._m and np.array_equal(self._upper, other._upper)

    def __hash__(self):
        return hash((self._m, self._upper.tobytes()))

    def __repr__(self):
        return f"AdjacencyMatrix(m={self._m}, edges={self.n_edges})"


@dataclass(frozen=True)
class GraphEnsembleSpec:
    """Random graph family description.

    ``p`` is only used by the Erdos-Renyi family.
    """

    family: str = "ER"
    m: int = 20
    p: float = 0.2
    seed: Optional[int] = None

    def __post_init__(self):
        family = self.family.upper()
        if family not in ("ER", "BA"):
            raise ParameterError(f"unknown graph family {self.family!r}")
        object.__setattr__(self, "family", family)
        if self.m < 2:
            raise ParameterError(f"graphs need at least 2 nodes, got m={self.m}")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"edge probability must lie in [0, 1], got {self.p}")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def generate_er(
    spec: GraphEnsembleSpec,
    rng=None,
    weights: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None,
) -> AdjacencyMatrix:
    """Erdos-Renyi graph: each pair is an edge independently with prob. ``p``.

    Edges get unit weight.  ``weights(rng, k)`` may supply ``k`` positive
    weights instead; it is the extension point for weighted ensembles.
    """
    if spec.family != "ER":
        raise ParameterError(f"generate_er needs an ER spec, got {spec.family}")
    rng = _rng(spec.seed if rng is None else rng)
    mask = rng.random(num_pairs(spec.m)) < spec.p
    upper = mask.astype(float)
    if weights is not None:
        upper[mask] = weights(rng, int(mask.sum()))
    return AdjacencyMatrix(spec.m, upper)


def generate_ba(m: int, seed=None) -> AdjacencyMatrix:
    """Barabasi-Albert tree with one attachment per new node.

    Starts from the edge ``(0, 1)``; node ``k`` attaches to one earlier node
    chosen with probability proportional to its current degree.
    """
    if m < 2:
        raise ParameterError(f"graphs need at least 2 nodes, got m={m}")
    rng = _rng(seed)
    deg = np.zeros(m)
    deg[:2] = 1.0
    W = np.zeros((m, m))
    W[0, 1] = W[1, 0] = 1.0
    for k in range(2, m):
        target = rng.choice(k, p=deg[:k] / deg[:k].sum())
        W[k, target] = W[target, k] = 1.0
        deg[target] += 1.0
        deg[k] = 1.0
    return AdjacencyMatrix.from_dense(W)


def generate(spec: GraphEnsembleSpec, rng=None) -> AdjacencyMatrix:
    if spec.family == "ER":
        return generate_er(spec, rng)
    return generate_ba(spec.m, spec.seed if rng is None else rng)


def project_valid_array(X: np.ndarray) -> np.ndarray:
    """Dense Euclidean projection onto the valid adjacency set.

    Off-diagonal entries become ``max(0, (X_ij + X_ji) / 2)``, the diagonal
    is zeroed.
    """
    P = 0.5 * (X + X.T)
    np.maximum(P, 0.0, out=P)
    np.fill_diagonal(P, 0.0)
    return P


def project_valid(X) -> AdjacencyMatrix:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ShapeError(f"projection needs a square matrix, got shape {X.shape}")
    m = X.shape[0]
    iu = np.triu_indices(m, 1)
    return AdjacencyMatrix(m, np.maximum(0.0, 0.5 * (X[iu] + X.T[iu])))


# -- file I/O ---------------------------------------------------------------


def write_graph(g: AdjacencyMatrix, path) -> None:
    """Write the edge list ``i j w`` (upper triangle, 0-based)."""
    lines = [f"# m={g.m}"]
    lines.extend(f"{i} {j} {w!r}" for i, j, w in g.edges())
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_header(line, lineno):
    body = line.lstrip("#").strip()
    if not body.startswith("m="):
        raise GraphParseError(f"expected header '# m=<nodes>', got {line!r}", lineno)
    try:
        m = int(body[2:].split()[0])
    except (ValueError, IndexError):
        raise GraphParseError(f"bad node count in header {line!r}", lineno) from None
    if m < 1:
        raise GraphParseError(f"node count must be positive, got {m}", lineno)
    return m


def read_graph(path, symmetrize: bool = False) -> AdjacencyMatrix:
    """Parse an edge-list file written by :func:`write_graph`.

    Lower-triangle lines ``j i w`` are mirrored.  A pair listed in both
    orientations with different weights is asymmetric and is refused unless
    ``symmetrize`` is set, in which case the two weights are averaged.
    """
    text = Path(path).read_text().splitlines()
    m = None
    entries = {}
    for lineno, raw in enumerate(text, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if m is None:
                m = _parse_header(line, lineno)
            continue
        if m is None:
            raise GraphParseError("edge line before '# m=<nodes>' header", lineno)
        parts = line.split()
        if len(parts) != 3:
            raise GraphParseError(f"expected 'i j w', got {raw!r}", lineno)
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphParseError(f"could not parse {raw!r}", lineno) from None
        if not (0 <= i < m and 0 <= j < m):
            raise GraphParseError(f"node index out of range [0, {m})", lineno)
        if not np.isfinite(w):
            raise ValidationError(f"line {lineno}: non-finite weight")
        if w < 0:
            raise ValidationError(f"line {lineno}: negative weight {w}")
        if i == j:
            if w != 0:
                raise ValidationError(f"line {lineno}: self-loop on node {i}")
            continue
        entries.setdefault((i, j), []).append((w, lineno))
    if m is None:
        raise GraphParseError("missing '# m=<nodes>' header", 1)

    W = np.zeros((m, m))
    for (i, j), vals in entries.items():
        if len({w for w, _ in vals}) > 1:
            raise GraphParseError(f"conflicting weights for edge ({i}, {j})", vals[-1][1])
        W[i, j] = vals[0][0]
    for i, j in list(entries):
        if (j, i) not in entries:
            W[j, i] = W[i, j]
    if not np.array_equal(W, W.T) and not symmetrize:
        bad = next(
            max(entries[(i, j)][0][1], entries[(j, i)][0][1])
            for (i, j) in entries
            if (j, i) in entries and W[i, j] != W[j, i]
        )
        raise ValidationError(
            f"line {bad}: asymmetric edge weights (use symmetrize to average)"
        )
    return AdjacencyMatrix.from_dense(W, symmetrize=symmetrize)


def write_dense_csv(g: AdjacencyMatrix, path) -> None:
    np.savetxt(path, g.W, delimiter=",", fmt="%.17g")


def read_dense_csv(path, symmetrize: bool = False) -> AdjacencyMatrix:
    try:
        W = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise GraphParseError(f"malformed dense CSV: {exc}") from None
    return AdjacencyMatrix.from_dense(W, symmetrize=symmetrize)

"""
Core numeric types: attributed graphs, matchings and the Koopmans-Beckmann
objective.

An attributed graph carries a symmetric nonnegative affinity matrix ``A``
(here always a Euclidean distance matrix, possibly sparsified) and an
optional node feature matrix ``F``. Matching two graphs of sizes ``n`` and
``n_tilde`` amounts to choosing an ``n x n_tilde`` matrix ``M`` that maximizes

.. math::

    Z(M) = \\tfrac{1}{2}\\,\\mathrm{tr}(M^T A M \\tilde{A}) + \\lambda\\,\\mathrm{tr}(M^T K),
    \\qquad K = F \\tilde{F}^T.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from os import PathLike
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

SYMMETRY_TOL = 1e-9


class GraphFormatError(ValueError):
    """Raised when a graph file or array fails validation."""


def _readonly(x):
    x = np.array(x, dtype=np.float64, copy=True)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Undirected graph with a symmetric affinity matrix and optional node features.

    Parameters
    ----------
    affinity : array-like, shape (n, n)
        Symmetric, entrywise nonnegative affinity matrix.
    features : array-like, shape (n, d), optional
        Node feature vectors, one row per node.
    coords : array-like, shape (n, 2), optional
        Point coordinates the graph was generated from. Informational only.
    """

    affinity: np.ndarray
    features: np.ndarray | None = None
    coords: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        A = _readonly(self.affinity)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise GraphFormatError(f"affinity must be a non-empty square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise GraphFormatError("affinity contains non-finite entries")
        if not np.array_equal(A, A.T):
            raise GraphFormatError("asymmetric affinity")
        if np.any(A < 0):
            raise GraphFormatError("negative affinity entry")
        object.__setattr__(self, "affinity", A)

        if self.features is not None:
            F = _readonly(self.features)
            if F.ndim == 1:
                F = _readonly(F[:, None])
            if F.shape[0] != A.shape[0]:
                raise GraphFormatError(
                    f"feature row count {F.shape[0]} does not match node count {A.shape[0]}")
            object.__setattr__(self, "features", F)
        if self.coords is not None:
            object.__setattr__(self, "coords", _readonly(self.coords))

    @property
    def n(self) -> int:
        return self.affinity.shape[0]

    @property
    def has_features(self) -> bool:
        return self.features is not None

    def permuted(self, order) -> "AttributedGraph":
        """Relabel nodes so that new node ``j`` is old node ``order[j]``."""
        order = np.asarray(order, dtype=np.intp)
        return AttributedGraph(
            self.affinity[np.ix_(order, order)],
            None if self.features is None else self.features[order],
            None if self.coords is None else self.coords[order],
        )

    def subgraph(self, keep) -> "AttributedGraph":
        """Induced subgraph on the nodes in ``keep`` (in that order)."""
        return self.permuted(keep)

    def to_dict(self) -> dict:
        out = {"n": self.n, "affinity": self.affinity.tolist()}
        if self.features is not None:
            out["features"] = self.features.tolist()
        return out


@dataclass(frozen=True, eq=False)
class DoublyStochasticMatrix:
    """A nonnegative matrix with unit marginals, validated at ``tolerance``.

    Square matrices need every row and column sum within ``tolerance`` of 1.
    Tall matrices (more rows than columns) need unit column sums and row sums
    of at most ``1 + tolerance``; the missing row mass lives in the slack.
    """

    values: np.ndarray
    tolerance: float = 1e-6

    def __post_init__(self):
        X = _readonly(self.values)
        if X.ndim != 2 or X.shape[0] < X.shape[1]:
            raise ValueError(f"expected an n x n_tilde matrix with n >= n_tilde, got {X.shape}")
        tol = self.tolerance
        if np.any(X < -tol):
            raise ValueError("negative entries")
        rows, cols = X.sum(axis=1), X.sum(axis=0)
        if np.max(np.abs(cols - 1.0)) > tol:
            raise ValueError(f"column sums deviate from 1 by {np.max(np.abs(cols - 1.0)):.3g}")
        if X.shape[0] == X.shape[1]:
            if np.max(np.abs(rows - 1.0)) > tol:
                raise ValueError(f"row sums deviate from 1 by {np.max(np.abs(rows - 1.0)):.3g}")
        elif np.max(rows) > 1.0 + tol:
            raise ValueError("row sums exceed 1")
        object.__setattr__(self, "values", X)


@dataclass(frozen=True)
class PermutationMatching:
    """One-to-one correspondence between the nodes of two graphs.

    ``pairs`` holds ``(source, target)`` index pairs, sorted by source. A
    matching between graphs of different sizes is partial: it has
    ``min(n, n_tilde)`` pairs.
    """

    pairs: tuple
    n: int
    n_tilde: int

    def __post_init__(self):
        pairs = tuple(sorted((int(i), int(j)) for i, j in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        src = [i for i, _ in pairs]
        dst = [j for _, j in pairs]
        if len(set(src)) != len(src) or len(set(dst)) != len(dst):
            raise ValueError("matching is not one-to-one")
        if any(not 0 <= i < self.n for i in src) or any(not 0 <= j < self.n_tilde for j in dst):
            raise IndexError("matching index out of range")

    @classmethod
    def from_arrays(cls, rows, cols, n, n_tilde):
        return cls(tuple(zip(np.asarray(rows).tolist(), np.asarray(cols).tolist())), n, n_tilde)

    @classmethod
    def identity(cls, n):
        return cls(tuple((i, i) for i in range(n)), n, n)

    @property
    def rows(self) -> np.ndarray:
        return np.array([i for i, _ in self.pairs], dtype=np.intp)

    @property
    def cols(self) -> np.ndarray:
        return np.array([j for _, j in self.pairs], dtype=np.intp)

    def __len__(self):
        return len(self.pairs)

    def to_matrix(self) -> np.ndarray:
        M = np.zeros((self.n, self.n_tilde))
        M[self.rows, self.cols] = 1.0
        return M

    def score(self, X) -> float:
        """Total profit ``<P, X>`` of the matching on the profit matrix ``X``."""
        X = np.asarray(X)
        return float(X[self.rows, self.cols].sum())

    def transposed(self) -> "PermutationMatching":
        return PermutationMatching(tuple((j, i) for i, j in self.pairs), self.n_tilde, self.n)


def permutation_to_matrix(p: PermutationMatching, n: int | None = None,
                          n_tilde: int | None = None) -> np.ndarray:
    """Embed a matching as a 0/1 matrix of shape ``(n, n_tilde)``."""
    n = p.n if n is None else n
    n_tilde = p.n_tilde if n_tilde is None else n_tilde
    M = np.zeros((n, n_tilde))
    rows, cols = p.rows, p.cols
    if len(rows) and (rows.max() >= n or cols.max() >= n_tilde):
        raise IndexError("matching index out of range")
    M[rows, cols] = 1.0
    return M


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the constrained gradient solvers.

    ``alpha`` is either the string ``"adaptive"`` or a fixed step in [0, 1].
    ``gamma=None`` picks 3 when both graphs carry features and 5 otherwise.
    ``max_inner_iters=None`` uses the operator's own default cap (100 Sinkhorn
    sweeps, 30 alternating projections).
    """

    gamma: float | None = None
    lam: float = 1.0
    alpha: Union[float, str] = "adaptive"
    operator: str = "softassign"
    eps_outer: float = 1e-4
    eps_sinkhorn: float = 1e-6
    max_outer_iters: int = 30
    max_inner_iters: int | None = None

    OPERATORS = ("softassign", "alternating", "hungarian", "greedy", "spectral")

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if isinstance(self.alpha, str):
            if self.alpha != "adaptive":
                raise ValueError(f"alpha must be 'adaptive' or a number in [0, 1], got {self.alpha!r}")
        elif not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"fixed alpha must lie in [0, 1], got {self.alpha}")
        if self.operator not in self.OPERATORS:
            raise ValueError(f"unknown operator {self.operator!r}; choose from {self.OPERATORS}")
        if not (self.eps_outer > 0 and self.eps_sinkhorn > 0):
            raise ValueError("tolerances must be positive")
        if self.max_outer_iters < 1 or (self.max_inner_iters is not None and self.max_inner_iters < 1):
            raise ValueError("iteration caps must be >= 1")

    @property
    def adaptive(self) -> bool:
        return self.alpha == "adaptive"

    def resolved_gamma(self, with_features: bool) -> float:
        if self.gamma is not None:
            return float(self.gamma)
        return 3.0 if with_features else 5.0


def graph_from_points(points, features=None) -> AttributedGraph:
    """Fully connected graph whose affinities are pairwise Euclidean distances."""
    P = np.asarray(points, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 2:
        raise ValueError("need at least two points")
    D = squareform(pdist(P))
    off = ~np.eye(len(P), dtype=bool)
    if np.any(D[off] == 0):
        warnings.warn("duplicate points: zero off-diagonal distances", stacklevel=2)
    return AttributedGraph(D, features, P)


def load_graph(path: Union[str, PathLike]) -> AttributedGraph:
    """Read a graph from a JSON file.

    The file holds ``{"n": int, "affinity": [[...]], "features": [[...]]}``,
    with ``"coords": [[x, y], ...]`` allowed in place of ``"affinity"``.
    Affinities that are asymmetric by at most 1e-9 are symmetrized.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise GraphFormatError(f"{path}: top level must be an object")
    if ("affinity" in doc) == ("coords" in doc):
        raise GraphFormatError(f"{path}: exactly one of 'affinity' or 'coords' is required")

    try:
        features = None if doc.get("features") is None else np.asarray(doc["features"], dtype=np.float64)
        if "coords" in doc:
            coords = np.asarray(doc["coords"], dtype=np.float64)
            if coords.ndim != 2:
                raise GraphFormatError(f"{path}: coords must be a list of points")
            A = squareform(pdist(coords)) if len(coords) > 1 else np.zeros((len(coords),) * 2)
        else:
            coords = None
            A = np.asarray(doc["affinity"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, GraphFormatError):
            raise
        raise GraphFormatError(f"{path}: malformed matrix ({exc})") from exc

    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphFormatError(f"{path}: affinity must be square, got shape {A.shape}")
    if "n" in doc and doc["n"] != A.shape[0]:
        raise GraphFormatError(f"{path}: n={doc['n']} but matrix has {A.shape[0]} rows")
    if not np.all(np.isfinite(A)):
        raise GraphFormatError(f"{path}: non-finite affinity")
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_TOL:
        raise GraphFormatError(f"{path}: asymmetric affinity")
    A = 0.5 * (A + A.T)
    return AttributedGraph(A, features, coords)


def save_graph(graph: AttributedGraph, path: Union[str, PathLike]) -> None:
    with open(path, "w") as fh:
        json.dump(graph.to_dict(), fh)


def feature_kernel(gA: AttributedGraph, gB: AttributedGraph) -> np.ndarray | None:
    """Node similarity ``K = F F_tilde^T``, or None when neither graph has features."""
    if gA.has_features != gB.has_features:
        raise ValueError("features must be present on both graphs or neither")
    if not gA.has_features:
        return None
    if gA.features.shape[1] != gB.features.shape[1]:
        raise ValueError("feature dimensions differ")
    return gA.features @ gB.features.T


def as_matrix(M, n, n_tilde) -> np.ndarray:
    if isinstance(M, PermutationMatching):
        M = permutation_to_matrix(M, n, n_tilde)
    elif isinstance(M, DoublyStochasticMatrix):
        M = M.values
    M = np.asarray(M, dtype=np.float64)
    if M.shape != (n, n_tilde):
        raise ValueError(f"matching has shape {M.shape}, expected {(n, n_tilde)}")
    return M


def objective(M, gA: AttributedGraph, gB: AttributedGraph, lam: float = 1.0) -> float:
    """Koopmans-Beckmann score ``1/2 tr(M^T A M B) + lam tr(M^T K)``.

    ``M`` may be a raw array, a :class:`DoublyStochasticMatrix` or a
    :class:`PermutationMatching`.
    """
    M = as_matrix(M, gA.n, gB.n)
    K = feature_kernel(gA, gB)
    z = 0.5 * np.sum(M * (gA.affinity @ M @ gB.affinity))
    if K is not None:
        z += lam * np.sum(M * K)
    return float(z)

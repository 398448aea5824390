"""
Constraining operators.

Each operator maps a profit (gradient) matrix onto, or towards, a
constraint set:

=====================  ===========================  ==========================
operator               target set                   function
=====================  ===========================  ==========================
Hungarian              permutation matrices         :func:`hungarian`
greedy                 permutation matrices         :func:`greedy_assign`
alternating proj.      doubly stochastic matrices   :func:`alternating_projection`
dynamic softassign     doubly stochastic matrices   :func:`dynamic_softassign`
spectral               M >= 0, ||M||_F = 1          :func:`spectral_normalize`
=====================  ===========================  ==========================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import PermutationMatching, permutation_to_matrix

SOFTASSIGN_MAX_INNER = 100
ALTERNATING_MAX_INNER = 30


@dataclass
class OperatorResult:
    matrix: np.ndarray
    inner_iterations: int
    converged: bool


def _finite(X, name="X"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} has non-finite entries")
    return X


def hungarian(X) -> PermutationMatching:
    """Exact maximum-profit assignment ``argmax_P <P, X>``.

    Rectangular inputs give a partial matching of size ``min(n, n_tilde)``.
    """
    X = _finite(X)
    rows, cols = linear_sum_assignment(X, maximize=True)
    return PermutationMatching.from_arrays(rows, cols, *X.shape)


def greedy_assign(X) -> PermutationMatching:
    """Greedy assignment: repeatedly take the largest remaining entry.

    After an entry ``(i, j)`` is taken, row ``i`` and column ``j`` are
    removed from consideration. Ties go to the smallest row, then the
    smallest column. Not optimal in general.
    """
    X = _finite(X)
    n, m = X.shape
    # stable sort keeps row-major order among equal values
    order = np.argsort(-X, axis=None, kind="stable")
    row_free = np.ones(n, dtype=bool)
    col_free = np.ones(m, dtype=bool)
    pairs = []
    need = min(n, m)
    for flat in order:
        i, j = divmod(int(flat), m)
        if row_free[i] and col_free[j]:
            pairs.append((i, j))
            row_free[i] = col_free[j] = False
            if len(pairs) == need:
                break
    return PermutationMatching(tuple(pairs), n, m)


def project_unit_marginals(X) -> np.ndarray:
    """Frobenius projection onto matrices with unit row and column sums.

    Closed form ``X + (I/n + (1^T X 1 / n^2) I - X/n) 11^T - 11^T X / n``,
    evaluated in O(n^2).
    """
    n = X.shape[0]
    r = X.sum(axis=1, keepdims=True)
    c = X.sum(axis=0, keepdims=True)
    return X + (1.0 / n + X.sum() / n**2) - r / n - c / n


def clamp_nonnegative(X) -> np.ndarray:
    return (X + np.abs(X)) / 2.0


def alternating_iterates(X, max_iter):
    """Yield successive ``P2(P1(.))`` iterates starting from ``X``."""
    for _ in range(max_iter):
        X = clamp_nonnegative(project_unit_marginals(X))
        yield X


def alternating_projection(X, max_iter: int = ALTERNATING_MAX_INNER, eps: float = 1e-6) -> OperatorResult:
    """Approximate Frobenius projection onto the doubly stochastic matrices.

    Alternates the affine projection onto unit marginals with the clamp
    ``(X + |X|) / 2`` until successive iterates differ by less than ``eps``
    in entrywise L1 norm, or ``max_iter`` rounds have run.
    """
    X = _finite(X)
    if X.shape[0] != X.shape[1]:
        raise ValueError("alternating projection needs a square matrix")
    prev = X
    t = 0
    for t, cur in enumerate(alternating_iterates(X, max_iter), start=1):
        if np.abs(cur - prev).sum() < eps:
            return OperatorResult(cur, t, True)
        prev = cur
    return OperatorResult(prev, t, False)


def offset_input(X, b: float) -> np.ndarray:
    """Shift every entry of ``X`` down by ``b``."""
    return np.asarray(X, dtype=np.float64) - b


def sinkhorn_iterates(S):
    """Yield the Sinkhorn sequence: row then column normalization, in place.

    The same buffer is yielded every time; copy it to keep a snapshot.
    """
    S = np.array(S, dtype=np.float64)
    tiny = np.finfo(np.float64).tiny
    while True:
        r = S.sum(axis=1, keepdims=True)
        np.maximum(r, tiny, out=r)
        S /= r
        c = S.sum(axis=0, keepdims=True)
        np.maximum(c, tiny, out=c)
        S /= c
        yield S


def _run_sinkhorn(S0, eps, max_inner) -> OperatorResult:
    prev = np.array(S0, dtype=np.float64)
    diff = np.empty_like(prev)
    t = 0
    for t, S in enumerate(sinkhorn_iterates(S0), start=1):
        np.subtract(S, prev, out=diff)
        np.abs(diff, out=diff)
        if diff.sum() < eps:
            return OperatorResult(S, t, True)
        if t >= max_inner:
            return OperatorResult(S, t, False)
        np.copyto(prev, S)


def softassign(X, beta: float, eps: float = 1e-9, max_inner: int = 1000) -> OperatorResult:
    """Plain softassign with a fixed inverse temperature ``beta``.

    Starts Sinkhorn from ``exp(beta * X)`` with no rescaling of ``X``, so
    large ``beta * X`` can overflow. Only square inputs.
    """
    X = _finite(X)
    if X.shape[0] != X.shape[1]:
        raise ValueError("softassign needs a square matrix")
    return _run_sinkhorn(np.exp(beta * X), eps, max_inner)


def _square_slack(X):
    n, m = X.shape
    if n == m:
        return X
    k = max(n, m)
    out = np.zeros((k, k))
    out[:n, :m] = X
    return out


def dynamic_softassign_start(X, gamma: float):
    """Max-normalized, overflow-safe starting kernel and its ``beta``.

    Returns ``(S0, beta)`` with ``S0 = exp(beta * (X / max(X) - 1))`` and
    ``beta = gamma * ln(n)``. ``X`` must be square.
    """
    n = X.shape[0]
    mx = X.max()
    if mx <= 0:
        X = X - X.min()
        mx = X.max()
    beta = gamma * np.log(n)
    if mx == 0:
        return np.ones_like(X), beta
    return np.exp(beta * (X / mx - 1.0)), beta


def dynamic_softassign(X, gamma: float = 5.0, eps: float = 1e-9,
                       max_inner: int = 1000) -> OperatorResult:
    """Softassign made insensitive to the magnitude and size of ``X``.

    ``X`` is divided by its maximum, ``beta`` is set to ``gamma * ln(n)``,
    and the exponential is shifted so that its largest entry is 1. Sinkhorn
    then runs until successive iterates differ by less than ``eps`` in
    entrywise L1 norm, or ``max_inner`` sweeps.

    Parameters
    ----------
    X : array-like, shape (n, n_tilde)
        Profit matrix. A rectangular matrix is padded with zero columns (or
        rows) to a square slack matrix; the returned block then has exactly
        unit column sums (for tall ``X``) and row sums at most 1.
    gamma : float
        Sharpness; the average assignment error is at most ``max(X) / gamma``.
    eps : float
        L1 stopping tolerance.
    max_inner : int
        Cap on Sinkhorn sweeps.

    Returns
    -------
    OperatorResult
        The matrix has the same shape as ``X``.

    Notes
    -----
    If ``max(X) <= 0`` the input is first shifted by ``-min(X)``; an
    all-constant input yields the uniform matrix. Inside the solver the
    gradient is nonnegative, so neither case arises there.
    """
    X = _finite(X)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    n, m = X.shape
    S0, _ = dynamic_softassign_start(_square_slack(X), gamma)
    res = _run_sinkhorn(S0, eps, max_inner)
    if (n, m) != res.matrix.shape:
        res.matrix = res.matrix[:n, :m].copy()
    return res


def spectral_normalize(X) -> OperatorResult:
    """Clamp negatives to zero and scale to unit Frobenius norm."""
    X = _finite(X)
    P = np.maximum(X, 0.0)
    nrm = np.linalg.norm(P)
    if nrm == 0:
        raise ValueError("spectral normalization of a matrix with no positive entry")
    return OperatorResult(P / nrm, 1, True)


def apply_operator(name: str, X, *, gamma=5.0, eps=1e-6, max_inner=None) -> OperatorResult:
    """Dispatch by operator name; permutation outputs come back as 0/1 matrices."""
    if name == "softassign":
        return dynamic_softassign(X, gamma, eps, max_inner or SOFTASSIGN_MAX_INNER)
    if name == "alternating":
        return alternating_projection(X, max_inner or ALTERNATING_MAX_INNER, eps)
    if name == "hungarian":
        return OperatorResult(permutation_to_matrix(hungarian(X)), 1, True)
    if name == "greedy":
        return OperatorResult(permutation_to_matrix(greedy_assign(X)), 1, True)
    if name == "spectral":
        return spectral_normalize(X)
    raise ValueError(f"unknown operator {name!r}")

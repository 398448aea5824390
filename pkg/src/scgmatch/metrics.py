"""
Scoring metrics and brute-force oracles.

The oracles here are deliberately naive (enumeration, explicit Kronecker
products, dense grids) and independent of the solver code paths they are
used to check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .graph import AttributedGraph, PermutationMatching, as_matrix, feature_kernel, objective
from .stepsize import quadratic_coefficients

BRUTE_FORCE_MAX_N = 8
KRON_MAX_N = 6


@dataclass(frozen=True)
class MetricReport:
    matching_error: float
    accuracy: float | None = None
    error_rate: float | None = None


def matching_error(M, gA: AttributedGraph, gB: AttributedGraph, lam: float = 1.0,
                   squared: bool = False) -> float:
    """Disagreement ``1/4 ||A - M B M^T|| + lam ||F - M F_tilde||`` (Frobenius).

    The feature term is dropped when the graphs have no features. With
    ``squared=True`` both norms are squared, which is the form whose
    minimizer coincides with the objective's maximizer.
    """
    M = as_matrix(M, gA.n, gB.n)
    edge = np.linalg.norm(gA.affinity - M @ gB.affinity @ M.T)
    node = 0.0
    if feature_kernel(gA, gB) is not None:
        node = np.linalg.norm(gA.features - M @ gB.features)
    if squared:
        return float(0.25 * edge**2 + lam * node**2)
    return float(0.25 * edge + lam * node)


def accuracy(M: PermutationMatching, truth: PermutationMatching) -> float:
    """Fraction of ground-truth pairs recovered by ``M``."""
    if (M.n, M.n_tilde) != (truth.n, truth.n_tilde):
        raise ValueError("matching and ground truth refer to different node sets")
    if not truth.pairs:
        raise ValueError("empty ground truth")
    return len(set(M.pairs) & set(truth.pairs)) / len(truth.pairs)


def error_rate(err_alg: float, err_baseline: float) -> float:
    if err_baseline == 0:
        raise ZeroDivisionError("baseline matching error is zero")
    return err_alg / err_baseline


def permutation_scores(A, B, K=None, lam: float = 1.0):
    """Objective of every permutation, in lexicographic order.

    Returns ``(perms, scores)`` where row ``p`` of ``perms`` maps node ``i``
    to ``p[i]``.
    """
    n = A.shape[0]
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    scores = 0.5 * np.einsum("ij,pij->p", A, B[perms[:, :, None], perms[:, None, :]])
    if K is not None:
        scores = scores + lam * K[np.arange(n), perms].sum(axis=1)
    return perms, scores


def brute_force_qap(gA: AttributedGraph, gB: AttributedGraph, lam: float = 1.0):
    """Exhaustive maximizer of the objective; ties go to the lexicographically first."""
    n = gA.n
    if gB.n != n:
        raise ValueError("brute force needs equal graph sizes")
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    perms, scores = permutation_scores(gA.affinity, gB.affinity, feature_kernel(gA, gB), lam)
    best = int(np.argmax(scores))
    p = perms[best]
    return PermutationMatching.from_arrays(np.arange(n), p, n, n), float(scores[best])


def argmax_set(scores, perms, rtol: float = 1e-9) -> frozenset:
    """All permutations scoring within ``rtol`` (relative) of the best."""
    top = scores.max()
    tol = rtol * max(1.0, abs(top))
    return frozenset(tuple(p) for p in perms[scores >= top - tol])


def brute_force_lap(X):
    """Exhaustive maximum-profit assignment for a small square matrix."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    totals = X[np.arange(n), perms].sum(axis=1)
    best = int(np.argmax(totals))
    return PermutationMatching.from_arrays(np.arange(n), perms[best], n, n), float(totals[best])


def grid_line_search(M, D, gA: AttributedGraph, gB: AttributedGraph, lam: float = 1.0, points: int = 1001):
    """Evaluate the objective on an even grid over [0, 1] along ``M -> D``.

    Returns ``(alphas, values)``.
    """
    alphas = np.linspace(0.0, 1.0, points)
    values = np.array([objective((1 - a) * M + a * D, gA, gB, lam) for a in alphas])
    return alphas, values


def vec(M, order: str = "C") -> np.ndarray:
    """Vectorize ``M``. Row stacking (``"C"``) makes ``(A kron B) vec(M) = vec(A M B)`` hold."""
    return np.asarray(M).reshape(-1, order=order)


def vector_form_coefficients(M, D, A, B, K=None, lam: float = 0.0, order: str = "C"):
    """Line-search coefficients through the explicit ``n^2 x n^2`` Kronecker product."""
    W = np.kron(A, B)
    m, d = vec(M, order), vec(D, order)
    e = d - m
    a = 0.5 * e @ W @ e
    b = e @ W @ m
    if K is not None and lam:
        b += lam * e @ vec(K, order)
    return float(a), float(b)


def kron_vec_check(A, B, M, D=None, K=None, lam: float = 0.0, order: str = "C", atol: float = 1e-8) -> bool:
    """Check ``(A kron B) vec(M) = vec(A M B)`` with an explicit Kronecker product.

    When ``D`` is given, also check that the trace-form step-size
    coefficients agree with the vector forms.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if max(A.shape[0], B.shape[0]) > KRON_MAX_N:
        raise ValueError(f"explicit Kronecker check limited to n <= {KRON_MAX_N}")
    lhs = np.kron(A, B) @ vec(M, order)
    rhs = vec(A @ M @ B, order)
    ok = bool(np.max(np.abs(lhs - rhs)) <= atol)
    if D is not None:
        a_t, b_t = quadratic_coefficients(M, np.asarray(D, dtype=np.float64), A, B, K, lam)
        a_v, b_v = vector_form_coefficients(M, D, A, B, K, lam, order)
        ok = ok and abs(a_t - a_v) <= atol and abs(b_t - b_v) <= atol
    return ok


def eigen_signature(A, rtol: float = 1e-8):
    """Counts of ``(positive, negative)`` eigenvalues of a symmetric matrix.

    Eigenvalues within ``rtol * ||A||_F`` of zero are counted as neither.
    A Euclidean distance matrix of distinct points has signature ``(1, n-1)``.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eigen signature needs a square matrix")
    if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.abs(A).max()):
        raise ValueError("eigen signature needs a symmetric matrix")
    w = np.linalg.eigvalsh(A)
    tol = rtol * np.linalg.norm(A)
    return int(np.sum(w > tol)), int(np.sum(w < -tol))


def kron_signature(sig_a, sig_b):
    """Signature of ``A kron B`` from the signatures of ``A`` and ``B``.

    Eigenvalues of a Kronecker product are pairwise products, so two distance
    matrices of size ``n`` give ``(n-1)^2 + 1`` positive and ``2n - 2``
    negative eigenvalues.
    """
    (pa, na), (pb, nb) = sig_a, sig_b
    return pa * pb + na * nb, pa * nb + na * pb


def alpha_one_estimate(n: int) -> float:
    """Rough probability that the optimal step is 1 for distance-matrix graphs."""
    return (1.0 - 1.0 / n) ** 2


def alpha_one_frequency(trials: int, n: int, seed=0):
    """Observed fraction of SCG iterations whose adaptive step is exactly 1.

    Each trial matches two independent fully connected random geometric
    graphs of size ``n``. Returns ``(fraction, estimate)``.
    """
    from .solver import scg_solve
    from .synth import random_geometric_graph

    if trials < 1:
        raise ValueError("trials must be >= 1")
    seeds = np.random.SeedSequence(seed).generate_state(2 * trials)
    ones = total = 0
    for t in range(trials):
        gA = random_geometric_graph(n, int(seeds[2 * t]), "full")
        gB = random_geometric_graph(n, int(seeds[2 * t + 1]), "full")
        res = scg_solve(gA, gB)
        ones += sum(1 for a in res.alpha_trace if a == 1.0)
        total += len(res.alpha_trace)
    return ones / total, alpha_one_estimate(n)

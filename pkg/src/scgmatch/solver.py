"""
Constrained gradient solvers for the relaxed Koopmans-Beckmann problem.

All solvers share one fixed-point iteration::

    D = P(A N B + lam K)
    N = (1 - alpha) N + alpha D

and differ only in the constraining operator ``P`` and the step ``alpha``.
SCG pairs the dynamic softassign with the exact line-search step. The
reference variants reproduce GA, DSPFP, AIPFP and SM in the same loop.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import stepsize
from .graph import AttributedGraph, PermutationMatching, SolverConfig, feature_kernel, objective
from .operators import apply_operator, hungarian

# (operator, default alpha) per named algorithm
VARIANTS = {
    "SCG": ("softassign", "adaptive"),
    "GA": ("softassign", 1.0),
    "DSPFP": ("alternating", 1.0),
    "AIPFP": ("greedy", "adaptive"),
    "SM": ("spectral", 1.0),
}
DSPFP_TABLE_ALPHA = 0.5


@dataclass
class SolveResult:
    matching: PermutationMatching
    relaxed: np.ndarray
    objective: float
    iterations: int
    alpha_trace: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)
    wall_time: float = 0.0
    stop_reason: str = "max-iters"
    iteration_times: list = field(default_factory=list)
    inner_iterations: list = field(default_factory=list)


def discretize(N) -> PermutationMatching:
    """Round a relaxed matching to the permutation carrying the most mass."""
    return hungarian(N)


def _relaxed_score(N, P, K, lam):
    z = 0.5 * np.vdot(N, P)
    if K is not None:
        z += lam * np.vdot(N, K)
    return float(z)


def _iterate(A, B, K, config: SolverConfig, gamma: float, on_step=None):
    n, m = A.shape[0], B.shape[0]
    lam = config.lam
    N = np.full((n, m), 1.0 / (n * m))
    slack = np.zeros((n, n))
    alphas, scores, times, inner = [], [], [], []
    stop = "max-iters"
    idle = 0
    t = 0
    for t in range(1, config.max_outer_iters + 1):
        t0 = time.perf_counter()
        P = A @ N @ B
        scores.append(_relaxed_score(N, P, K, lam))
        slack[:, :m] = P if K is None else P + lam * K
        res = apply_operator(config.operator, slack, gamma=gamma,
                             eps=config.eps_sinkhorn, max_inner=config.max_inner_iters)
        D = res.matrix[:, :m]
        if config.adaptive:
            alpha = stepsize.adaptive_alpha(N, D, A, B, lam, K, AMB=P).alpha
        else:
            alpha = float(config.alpha)
        N_next = (1.0 - alpha) * N + alpha * D
        delta = np.max(np.abs(N_next - N))
        if on_step is not None:
            on_step(t, N, D, alpha)
        N = N_next
        alphas.append(alpha)
        inner.append(res.inner_iterations)
        times.append(time.perf_counter() - t0)
        # a refused step leaves N unchanged without being a fixed point
        if alpha == 0.0:
            idle += 1
            if idle >= 2:
                stop = "stagnation"
                break
            continue
        idle = 0
        if delta < config.eps_outer:
            stop = "converged"
            break
    scores.append(_relaxed_score(N, A @ N @ B, K, lam))
    return N, t, alphas, scores, times, inner, stop


def scg_solve(gA: AttributedGraph, gB: AttributedGraph, config: SolverConfig | None = None,
              on_step=None) -> SolveResult:
    """Match two graphs with the constrained gradient iteration.

    Parameters
    ----------
    gA, gB : AttributedGraph
        Graphs of sizes ``n`` and ``n_tilde``. If ``n < n_tilde`` the pair is
        swapped internally and the result is reported in the caller's
        orientation.
    config : SolverConfig, optional
        Defaults to SCG: dynamic softassign with the adaptive step.
    on_step : callable, optional
        Called as ``on_step(t, N, D, alpha)`` after each operator application,
        in the internal (tall) orientation.

    Returns
    -------
    SolveResult
        ``relaxed`` is the final ``n x n_tilde`` iterate, ``matching`` its
        Hungarian discretization and ``objective`` the score of that matching.
    """
    config = SolverConfig() if config is None else config
    K = feature_kernel(gA, gB)
    gamma = config.resolved_gamma(K is not None)
    flip = gA.n < gB.n
    A, B = gA.affinity, gB.affinity
    if flip:
        A, B = B, A
        K = None if K is None else K.T

    start = time.perf_counter()
    N, iters, alphas, scores, times, inner, stop = _iterate(A, B, K, config, gamma, on_step)
    matching = discretize(N)
    wall = time.perf_counter() - start

    if flip:
        N = N.T.copy()
        matching = matching.transposed()
    return SolveResult(
        matching=matching,
        relaxed=N,
        objective=objective(matching, gA, gB, config.lam),
        iterations=iters,
        alpha_trace=alphas,
        objective_trace=scores,
        wall_time=wall,
        stop_reason=stop,
        iteration_times=times,
        inner_iterations=inner,
    )


def variant_config(name: str, alpha=None, **overrides) -> SolverConfig:
    try:
        operator, default_alpha = VARIANTS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(VARIANTS)}") from None
    return SolverConfig(operator=operator, alpha=default_alpha if alpha is None else alpha, **overrides)


def variant_solve(name: str, gA: AttributedGraph, gB: AttributedGraph, config: SolverConfig | None = None,
                  alpha=None, **overrides) -> SolveResult:
    """Run a named algorithm (SCG, GA, DSPFP, AIPFP or SM).

    The operator is fixed by the algorithm. ``alpha`` defaults to the
    algorithm's own choice; pass ``"adaptive"`` for the line-search step.
    Remaining settings come from ``config`` and then ``overrides``.
    """
    if config is None:
        cfg = variant_config(name, alpha, **overrides)
    else:
        cfg = replace(config, operator=variant_config(name).operator, **overrides)
        if alpha is not None:
            cfg = replace(cfg, alpha=alpha)
    return scg_solve(gA, gB, cfg)

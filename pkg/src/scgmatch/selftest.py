"""
Oracle suite run by ``scgmatch selftest``.

Each check returns ``(passed, detail)``. Instances are small and seeded so
the whole suite finishes in a few seconds and always sees the same data.
"""

from __future__ import annotations

import numpy as np

from .graph import SolverConfig
from .metrics import (
    argmax_set,
    brute_force_qap,
    eigen_signature,
    kron_vec_check,
    permutation_scores,
)
from .operators import dynamic_softassign, hungarian, offset_input, softassign
from .solver import scg_solve
from .synth import make_rng, plant_permutation, random_geometric_graph, random_profit

ASCENT_TOL = 1e-9


def check_kron(count=20):
    rng = make_rng(1)
    worst = 0.0
    for k in range(count):
        n = 2 + k % 4
        S, T = rng.standard_normal((2, n, n))
        M, D, K = rng.random((3, n, n))
        if not kron_vec_check(S + S.T, T + T.T, M, D, K, lam=1.0):
            return False, f"instance {k} (n={n}) disagrees"
        worst = max(worst, n)
    return True, f"{count} instances, n <= {worst}"


def check_eigen(count=50):
    for k in range(count):
        n = 2 + k % 30
        sig = eigen_signature(random_geometric_graph(n, 10_000 + k, "full").affinity)
        if sig != (1, n - 1):
            return False, f"n={n} gave {sig}"
    return True, f"{count} distance matrices have one positive eigenvalue"


def check_bruteforce(count=10):
    hits = 0
    worst_gap = 0.0
    for k in range(count):
        n = 4 + k % 3
        g = random_geometric_graph(n, 1000 + k, "full")
        h, truth = plant_permutation(g, 2000 + k)
        _, z_best = brute_force_qap(g, h)
        z = scg_solve(g, h).objective
        gap = (z_best - z) / abs(z_best)
        if gap <= 1e-9:
            hits += 1
        worst_gap = max(worst_gap, gap)
    return hits >= 0.9 * count, f"{hits}/{count} optimal, worst gap {worst_gap:.2%}"


def check_error_bound(count=5, n=50):
    worst = -np.inf
    for k in range(count):
        X = random_profit(n, 1.0, seed=k)
        best = hungarian(X).score(X)
        for gamma in (3, 5, 10):
            S = dynamic_softassign(X, gamma=gamma, eps=1e-9).matrix
            worst = max(worst, (best - np.sum(S * X)) / n - 1.0 / gamma)
    return worst <= 1e-6, f"max excess over 1/gamma: {worst:.2e}"


def check_offset(n=12):
    X = random_profit(n, 1.0, seed=3)
    ref = softassign(X, beta=4.0).matrix
    diff = max(np.abs(softassign(offset_input(X, b), beta=4.0).matrix - ref).max() for b in (-5.0, 0.3, 100.0))
    return diff <= 1e-10, f"max deviation {diff:.1e}"


def check_ascent(count=10, n=12):
    # sparse pairs make concave steps (interior alpha) frequent
    worst = np.inf
    for op in SolverConfig.OPERATORS:
        for k in range(count):
            gA = random_geometric_graph(n, 2 * k, "delaunay")
            gB = random_geometric_graph(n, 2 * k + 1, "delaunay")
            res = scg_solve(gA, gB, SolverConfig(operator=op))
            step = np.min(np.diff(res.objective_trace))
            worst = min(worst, step)
            if step < -ASCENT_TOL:
                return False, f"{op} seed {k}: objective fell by {-step:.3e}"
    return True, f"{len(SolverConfig.OPERATORS) * count} solves, smallest step {worst:.2e}"


def check_invariance(count=5, n=5):
    for k in range(count):
        A = random_geometric_graph(n, 300 + k, "full").affinity
        B = random_geometric_graph(n, 400 + k, "full").affinity
        perms, base = permutation_scores(A, B)
        ref = argmax_set(base, perms)
        for u, q in ((0.5, -1.0), (2.0, 3.0)):
            if argmax_set(permutation_scores(A, u * B + q)[1], perms) != ref:
                return False, f"instance {k} changed under u={u}, q={q}"
    return True, f"{count} instances"


CHECKS = {
    "kron": check_kron,
    "eigen": check_eigen,
    "bruteforce": check_bruteforce,
    "error-bound": check_error_bound,
    "offset": check_offset,
    "ascent": check_ascent,
    "invariance": check_invariance,
}


def run_checks(names=None):
    """Run the named checks (all by default); returns ``[(name, passed, detail)]``."""
    names = list(CHECKS) if not names else names
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
    rows = []
    for name in names:
        try:
            ok, detail = CHECKS[name]()
        except Exception as exc:  # a crashing oracle is a failing oracle
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, bool(ok), detail))
    return rows

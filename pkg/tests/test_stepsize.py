import numpy as np
import pytest

from scgmatch.graph import AttributedGraph, SolverConfig, objective
from scgmatch.metrics import grid_line_search, vector_form_coefficients
from scgmatch.operators import dynamic_softassign, hungarian
from scgmatch.solver import scg_solve
from scgmatch.stepsize import (
    CLAMPED_TO_0,
    CLAMPED_TO_1,
    INTERIOR,
    POSITIVE_A,
    adaptive_alpha,
    apply_step,
    best_alpha,
    quadratic_coefficients,
)
from scgmatch.synth import random_features, random_geometric_graph


def random_pair(seed, n=6, features=False, connectivity="full"):
    gA = random_geometric_graph(n, 2 * seed, connectivity)
    gB = random_geometric_graph(n, 2 * seed + 1, connectivity)
    if features:
        gA = AttributedGraph(gA.affinity, random_features(n, 3, 100 + seed))
        gB = AttributedGraph(gB.affinity, random_features(n, 3, 200 + seed))
    return gA, gB


def random_doubly_stochastic(n, seed):
    return dynamic_softassign(np.random.default_rng(seed).random((n, n)), gamma=1).matrix


class TestBestAlpha:
    @pytest.mark.parametrize("a,b,alpha,branch", [
        (0.0, 0.0, 1.0, POSITIVE_A),
        (2.0, 1.0, 1.0, POSITIVE_A),
        (2.0, -1.0, 1.0, POSITIVE_A),
        (1.0, -3.0, 0.0, CLAMPED_TO_0),
        (-1.0, 1.0, 0.5, INTERIOR),
        (-1.0, 5.0, 1.0, CLAMPED_TO_1),
        (-1.0, -1.0, 0.0, CLAMPED_TO_0),
    ])
    def test_branches(self, a, b, alpha, branch):
        d = best_alpha(a, b)
        assert (d.alpha, d.branch) == (alpha, branch)

    def test_interior_invariant(self):
        d = best_alpha(-4.0, 3.0)
        assert d.a_coeff < 0 and d.alpha == pytest.approx(-d.b_coeff / (2 * d.a_coeff))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            best_alpha(np.nan, 1.0)


class TestAdaptiveAlpha:
    def test_zero_displacement(self):
        gA, gB = random_pair(0)
        M = random_doubly_stochastic(6, 0)
        d = adaptive_alpha(M, M, gA, gB, lam=1.0)
        assert d.a_coeff == pytest.approx(0, abs=1e-12) and d.b_coeff == pytest.approx(0, abs=1e-12)
        assert d.branch == POSITIVE_A and d.alpha == 1.0

    def test_identity_affinities(self):
        I = np.eye(5)
        M = random_doubly_stochastic(5, 1)
        D = random_doubly_stochastic(5, 2)
        d = adaptive_alpha(M, D, I, I)
        assert d.a_coeff == pytest.approx(0.5 * np.sum((M - D) ** 2), rel=1e-12)
        assert d.alpha == 1.0 and d.branch == POSITIVE_A

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            adaptive_alpha(np.eye(3), np.eye(4), np.eye(3), np.eye(3))

    @pytest.mark.parametrize("seed", range(20))
    def test_quadratic_exactness(self, seed):
        gA, gB = random_pair(seed, n=5, features=True)
        M = random_doubly_stochastic(5, seed)
        D = random_doubly_stochastic(5, seed + 100)
        a, b = quadratic_coefficients(M, D, gA.affinity, gB.affinity, gA.features @ gB.features.T, 1.0)
        c = objective(M, gA, gB, 1.0)
        for alpha in np.linspace(0, 1, 11):
            z = objective(apply_step(M, D, alpha), gA, gB, 1.0)
            assert z - (a * alpha**2 + b * alpha) == pytest.approx(c, abs=1e-8)

    @pytest.mark.parametrize("seed", range(10))
    def test_vector_form(self, seed):
        gA, gB = random_pair(seed, n=4, features=True)
        K = gA.features @ gB.features.T
        M = random_doubly_stochastic(4, seed)
        D = random_doubly_stochastic(4, seed + 50)
        trace = quadratic_coefficients(M, D, gA.affinity, gB.affinity, K, 1.0)
        vector = vector_form_coefficients(M, D, gA.affinity, gB.affinity, K, 1.0)
        np.testing.assert_allclose(trace, vector, rtol=0, atol=1e-8)

    def test_grid_oracle_interior_case(self):
        # sparse graphs make a_alpha < 0 common
        found = 0
        for seed in range(40):
            gA, gB = random_pair(seed, n=6, connectivity="delaunay")
            M = random_doubly_stochastic(6, seed)
            D = random_doubly_stochastic(6, seed + 1)
            d = adaptive_alpha(M, D, gA, gB)
            if d.a_coeff >= 0:
                continue
            found += 1
            alphas, values = grid_line_search(M, D, gA, gB, 0.0)
            assert abs(d.alpha - alphas[np.argmax(values)]) <= 1e-3 + 1e-12
            assert objective(apply_step(M, D, d.alpha), gA, gB, 0.0) >= values.max() - 1e-9
        assert found >= 3

    def test_hungarian_direction_nonnegative_b(self):
        for seed in range(15):
            gA, gB = random_pair(seed, n=7, features=True)
            K = gA.features @ gB.features.T
            M = random_doubly_stochastic(7, seed)
            grad = gA.affinity @ M @ gB.affinity + K
            D = hungarian(grad).to_matrix()
            assert adaptive_alpha(M, D, gA, gB, lam=1.0).b_coeff >= -1e-9

    def test_positive_definite_affinities(self):
        rng = np.random.default_rng(0)
        n = 8
        graphs = []
        for _ in range(2):
            R = rng.random((n, n)) * 0.1
            graphs.append(AttributedGraph(np.eye(n) + (R + R.T) / 2))
        assert all(np.linalg.eigvalsh(g.affinity).min() > 0 for g in graphs)
        decisions = []

        def record(t, N, D, alpha):
            decisions.append(adaptive_alpha(N, D, graphs[0], graphs[1]))

        scg_solve(graphs[0], graphs[1], SolverConfig(), on_step=record)
        assert decisions
        assert all(d.a_coeff >= 0 and d.alpha == 1.0 and d.branch == POSITIVE_A for d in decisions)


class TestApplyStep:
    def test_endpoints(self):
        M, D = np.eye(3), np.ones((3, 3)) / 3
        np.testing.assert_array_equal(apply_step(M, D, 0.0), M)
        np.testing.assert_array_equal(apply_step(M, D, 1.0), D)

    def test_midpoint(self):
        np.testing.assert_array_equal(apply_step(np.zeros((2, 2)), np.eye(2), 0.5), np.eye(2) / 2)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            apply_step(np.eye(2), np.eye(3), 0.5)

"""
Synthetic instances: random profit matrices, random geometric graphs,
planted permutations and node-deletion noise.

All randomness flows through :func:`make_rng`, a Philox (counter-based)
generator, so a seed gives the same numbers on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError
from scipy.spatial.distance import pdist, squareform

from .graph import AttributedGraph, PermutationMatching

DELAUNAY_RETRIES = 5


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class GenSpec:
    n: int
    seed: int = 0
    phi: float = 1.0
    deletion_pct: float = 0.0
    connectivity: str = "delaunay"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not self.phi > 0:
            raise ValueError("phi must be positive")
        if not 0 <= self.deletion_pct <= 100:
            raise ValueError("deletion percentage must lie in [0, 100]")
        if self.connectivity not in ("full", "delaunay"):
            raise ValueError(f"unknown connectivity {self.connectivity!r}")
        if self.n - deletion_count(self.n, self.deletion_pct) < 2:
            raise ValueError("deletion would leave fewer than 2 nodes")


def random_profit(n: int, phi: float = 1.0, seed=0) -> np.ndarray:
    """``phi`` times an ``n x n`` matrix of uniform [0, 1) draws."""
    if n < 1 or not phi > 0:
        raise ValueError("need n >= 1 and phi > 0")
    return phi * make_rng(seed).random((n, n))


def delaunay_edges(points) -> set:
    """Undirected Delaunay edges ``{(i, j), i < j}`` of a planar point set."""
    tri = Delaunay(points)
    edges = set()
    for a, b, c in tri.simplices:
        for i, j in ((a, b), (b, c), (a, c)):
            edges.add((min(i, j), max(i, j)))
    return {(int(i), int(j)) for i, j in edges}


def random_geometric_graph(n: int, seed=0, connectivity: str = "delaunay") -> AttributedGraph:
    """Random points in the unit square joined by Euclidean-distance edges.

    ``connectivity="full"`` keeps every pair; ``"delaunay"`` keeps only the
    edges of the Delaunay triangulation and zeroes the other affinities.
    The points are available as ``graph.coords``.
    """
    rng = make_rng(seed)
    pts = rng.random((n, 2))
    D = squareform(pdist(pts))
    if connectivity == "full":
        return AttributedGraph(D, coords=pts)
    if connectivity != "delaunay":
        raise ValueError(f"unknown connectivity {connectivity!r}")
    if n < 3:
        raise ValueError("a Delaunay graph needs at least 3 points")

    for _ in range(DELAUNAY_RETRIES + 1):
        try:
            edges = delaunay_edges(pts)
            break
        except QhullError:
            pts = pts + 1e-9 * rng.standard_normal(pts.shape)
    else:
        raise ValueError("degenerate point set: Delaunay triangulation failed after retries")
    D = squareform(pdist(pts))
    mask = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        mask[i, j] = mask[j, i] = True
    return AttributedGraph(np.where(mask, D, 0.0), coords=pts)


def plant_permutation(g: AttributedGraph, seed=0):
    """Relabel the nodes of ``g`` by a uniformly random permutation.

    Returns ``(h, truth)`` where ``truth`` pairs each node ``i`` of ``g``
    with its new label in ``h``.
    """
    order = make_rng(seed).permutation(g.n)
    h = g.permuted(order)
    truth = PermutationMatching.from_arrays(order, np.arange(g.n), g.n, g.n)
    return h, truth


def deletion_count(n: int, q_pct: float) -> int:
    return int(math.floor(n * q_pct / 100.0 + 0.5))


def surviving_nodes(n: int, q_pct: float, seed=0) -> np.ndarray:
    """Sorted indices of the nodes kept after deleting ``q_pct`` percent."""
    k = deletion_count(n, q_pct)
    if math.ceil(n * q_pct / 100.0) >= n - 1 or n - k < 2:
        raise ValueError(f"deleting {q_pct}% of {n} nodes would leave fewer than 2")
    if k == 0:
        return np.arange(n)
    gone = make_rng(seed).choice(n, size=k, replace=False)
    return np.setdiff1d(np.arange(n), gone)


def delete_nodes(g: AttributedGraph, q_pct: float, seed=0) -> AttributedGraph:
    """Remove ``round(n q / 100)`` random nodes, keeping the induced subgraph."""
    keep = surviving_nodes(g.n, q_pct, seed)
    return g if len(keep) == g.n else g.subgraph(keep)


def noisy_pair(spec: GenSpec):
    """Graph, relabelled copy with deleted nodes, and the surviving ground truth.

    Returns ``(gA, gB, truth)`` with ``gA.n >= gB.n``. Seeds for the three
    random stages are derived from ``spec.seed``.
    """
    seeds = np.random.SeedSequence(spec.seed).generate_state(3)
    gA = random_geometric_graph(spec.n, int(seeds[0]), spec.connectivity)
    h, truth = plant_permutation(gA, int(seeds[1]))
    keep = surviving_nodes(spec.n, spec.deletion_pct, int(seeds[2]))
    gB = h.subgraph(keep)
    # truth maps A-node i -> h-node j; h-node keep[k] becomes gB-node k
    source_of = {j: i for i, j in truth.pairs}
    pairs = tuple((source_of[int(j)], k) for k, j in enumerate(keep))
    return gA, gB, PermutationMatching(pairs, gA.n, gB.n)


def random_features(n: int, d: int, seed=0) -> np.ndarray:
    return make_rng(seed).random((n, d))

# %% [markdown]
# # Choosing the step between the iterate and the projected gradient
#
# Along the segment from N to D the objective is a quadratic in alpha, so
# the best step has a closed form. Sparse graphs often make the quadratic
# concave, which is where a step shorter than 1 pays off.

# %%
import numpy as np

from scgmatch import adaptive_alpha, apply_step, dynamic_softassign, objective, random_geometric_graph
from scgmatch.metrics import grid_line_search

n = 10
rng = np.random.default_rng(0)

# look for a pair where the best step is strictly inside (0, 1)
for seed in range(100):
    gA = random_geometric_graph(n, 2 * seed, "delaunay")
    gB = random_geometric_graph(n, 2 * seed + 1, "delaunay")
    N = dynamic_softassign(rng.random((n, n)), gamma=1).matrix
    D = dynamic_softassign(gA.affinity @ N @ gB.affinity, gamma=5).matrix
    d = adaptive_alpha(N, D, gA, gB)
    if d.branch == "interior":
        break
print(f"seed {seed}: a={d.a_coeff:.4f}  b={d.b_coeff:.4f}  alpha={d.alpha:.4f}  ({d.branch})")

# %% compare with a dense grid
alphas, values = grid_line_search(N, D, gA, gB, lam=0.0)
print("grid best alpha:", alphas[values.argmax()])
print("Z(alpha*) - Z(1):", objective(apply_step(N, D, d.alpha), gA, gB, 0.0) - values[-1])

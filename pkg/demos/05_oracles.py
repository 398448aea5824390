# %% [markdown]
# # Independent checks
#
# Small identities that the solver relies on, verified by brute force.

# %%
import numpy as np

from scgmatch import eigen_signature, kron_vec_check, random_geometric_graph
from scgmatch.metrics import kron_signature
from scgmatch.selftest import run_checks

# %% the Kronecker identity holds for row-stacked vectors, not column-stacked ones
rng = np.random.default_rng(0)
S, T, M = rng.standard_normal((3, 4, 4))
A, B = S + S.T, T + T.T
print("row-major:", kron_vec_check(A, B, M, order="C"), " column-major:", kron_vec_check(A, B, M, order="F"))

# %% distance matrices are indefinite: one positive eigenvalue, the rest negative
A = random_geometric_graph(12, 0, "full").affinity
B = random_geometric_graph(12, 1, "full").affinity
print(eigen_signature(A), eigen_signature(np.kron(A, B)), kron_signature(eigen_signature(A), eigen_signature(B)))

# %% the full suite, as run by `scgmatch selftest`
for name, ok, detail in run_checks():
    print(f"{name:<12}{'PASS' if ok else 'FAIL'}  {detail}")

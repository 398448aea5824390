# %% [markdown]
# # Matching when nodes go missing
#
# Delete a few percent of the nodes from the shuffled copy and compare the
# fixed step with the adaptive one. The same runs are available from the
# command line as ``scgmatch bench-noise``.

# %%
import numpy as np

from scgmatch import GenSpec, accuracy, matching_error, noisy_pair, scg_solve
from scgmatch.graph import SolverConfig

n, trials = 60, 10
configs = {"fixed": SolverConfig(alpha=1.0), "adaptive": SolverConfig(alpha="adaptive")}

# %%
for q in (0, 2, 5):
    row = {}
    for mode, cfg in configs.items():
        errs, accs = [], []
        for seed in range(trials):
            gA, gB, truth = noisy_pair(GenSpec(n, seed=seed, deletion_pct=q))
            res = scg_solve(gA, gB, cfg)
            errs.append(matching_error(res.matching, gA, gB))
            accs.append(accuracy(res.matching, truth))
        row[mode] = (np.mean(errs), np.mean(accs))
    print(f"q={q}%  " + "  ".join(f"{m}: error {e:.3f} accuracy {a:.3f}" for m, (e, a) in row.items()))

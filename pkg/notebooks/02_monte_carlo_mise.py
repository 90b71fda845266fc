"""
Monte-Carlo MISE against the closed form
========================================

A short noise-level sweep; every row carries both estimates.
"""

# %%
import math

from sevbayes import ModelParams, SweepConfig, build_exponential_problem, fit_rate, run_mise_sweep
from sevbayes.harness import decade_grid

problem = build_exponential_problem(ModelParams(alpha=2, beta=0, gamma=1, j_max=2000))
cfg = SweepConfig(problem, n_grid=decade_grid(1, 30), realizations=100, master_seed=0)
records = run_mise_sweep(cfg, threads=2)

# %%
for r in records[::5]:
    print(f"n=1e{round(math.log10(r.n)):<3d} mc={r.mise_mc:.4e} exact={r.mise_exact:.4e} z={r.z_score:+.2f}")

# %%
# Log-log-type fit: -1/2 ln MISE against ln ln sqrt(n). The slope estimates
# the rate exponent; the first five noisy-regime points are dropped.
print(fit_rate(records).summary())

"""
Posterior spectrum of a severely ill-posed problem
==================================================

Diagonal forward map with l_j = exp(-j), Sobolev prior, white noise.
"""

# %%
import numpy as np

from sevbayes import ModelParams, build_exponential_problem, compute_posterior_spectrum, posterior_trace

prm = ModelParams(s=1, b=1, alpha=2, beta=0, gamma=1, tau=1, n=1e12, j_max=60)
problem = build_exponential_problem(prm)
spec = compute_posterior_spectrum(problem)

# %%
# The shrinkage a_j l_j is close to 1 while the signal dominates, then drops
# to zero around the crossover index; past it the posterior equals the prior.
for j in (1, 5, 10, 13, 14, 15, 20, 40):
    print(f"j={j:3d}  a_j l_j={spec.shrinkage[j - 1]:.3e}  c_j/c0_j={spec.c[j - 1] / problem.c0[j - 1]:.3e}")

# %%
# Trace of the posterior covariance against the prior trace.
print("posterior trace", posterior_trace(spec))
print("prior trace    ", float(np.sum(problem.c0)))

"""
Posterior versus prior: equivalent or singular?
===============================================
"""

# %%
import numpy as np

from sevbayes import (
    ModelParams,
    build_algebraic_problem,
    build_exponential_problem,
    compute_posterior_spectrum,
    diagnose_equivalence,
)

spec = compute_posterior_spectrum(build_exponential_problem(ModelParams(n=1e6, j_max=4000)))
print(diagnose_equivalence(spec).table())

# %%
# Polynomially decaying l_j = j^-1 with alpha = 1: the verdict flips at beta = 1.75.
for beta in np.arange(1.55, 2.0, 0.1):
    p = build_algebraic_problem(1.0, ModelParams(alpha=1, beta=float(beta), j_max=10_000))
    rep = diagnose_equivalence(compute_posterior_spectrum(p))
    print(f"beta={beta:.2f}  slope={rep.tail_log_slope:+.3f}  {rep.verdict.value}")

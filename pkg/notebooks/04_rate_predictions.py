"""
Predicted rates for fixed and tuned prior scale
===============================================
"""

# %%
from sevbayes import FixedTau, ModelParams, TunedTau, build_exponential_problem, predict_rates

problem = build_exponential_problem(ModelParams(s=1, b=1, alpha=2, gamma=1, j_max=10))
for regime in (FixedTau(), TunedTau(0.25)):
    r = predict_rates(problem, regime)
    print(type(regime).__name__, "mise", r.mise_exponent, "trace", r.trace_exponent,
          "contraction", r.contraction_exponent)

# %%
# Raising the truth regularity past alpha - 1/2 stops helping at fixed tau.
for gamma in (0.5, 1.0, 1.5, 2.0, 3.0):
    p = build_exponential_problem(ModelParams(alpha=2, gamma=gamma, j_max=10))
    print(gamma, predict_rates(p).contraction_exponent, predict_rates(p, TunedTau(0.25)).contraction_exponent)

"""
Crossover index and integral asymptotics
========================================
"""

# %%
from sevbayes import crossover_asymptotic, decay_integral, grow_integral, solve_crossover

# The crossover J solves exp(-a J^b) J^t = lambda. Its leading-order form
# ignores the J^t factor, so agreement improves only logarithmically.
for lam in (1e-10, 1e-40, 1e-200):
    r = solve_crossover(2, 2, -3, lam)
    print(f"lambda={lam:.0e}  J={r.j_lambda:.4f}  asymptote={crossover_asymptotic(2, 2, lam):.4f}")

# %%
for J in (5, 10, 20, 40):
    g = grow_integral(2, 2, -3, J)
    d = decay_integral(2, 2, -3, J)
    print(f"J={J:3d}  growing ratio={g.asymptote_ratio:.4f}  decaying constant={d.asymptote_ratio:.4f}")

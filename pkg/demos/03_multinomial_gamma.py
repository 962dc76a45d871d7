"""
Multinomial fit and the adjustment factor
=========================================

For multinomial data the fitted probabilities must sum to one.  Without an
overall effect this forces a scalar ``gamma`` into the moment equations,
``A p = gamma A q``.  The fitter alternates GIS(gamma) runs with Newton steps
on ``gamma`` until the total is one.
"""

import numpy as np

from loglinmle import FitConfig, fit_multinomial

A = [[1, 0, 3, 2], [1, 3, 0, 2]]
y = np.array([1, 2, 3, 4])

res = fit_multinomial(A, y)
print("p hat:", np.round(res.estimate, 4), " sum:", res.estimate.sum())
print("gamma hat: %.6f" % res.gamma_hat)
print("%6s %10s %10s %6s" % ("run", "gamma", "total", "iters"))
for k, (g, t, n) in enumerate(zip(res.gammas, res.core_totals, res.core_iterations)):
    print("%6d %10.6f %10.6f %6d" % (k, g, t, n))

# %%
# Restarting every core run from the all-ones vector gives the same answer
# but spends more iterations than warm starting from the previous limit.
strict = fit_multinomial(A, y, FitConfig(strict_paper=True))
print("warm starts :", res.core_iterations)
print("cold starts :", strict.core_iterations)
print("max difference:", np.abs(res.estimate - strict.estimate).max())

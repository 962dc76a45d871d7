"""
Poisson fit by generalized iterative scaling
============================================

Under Poisson sampling the maximum likelihood intensities solve
``A lambda = A y``.  GIS with ``gamma = 1`` reaches them; without an overall
effect the fitted total differs from the observed one.
"""

import numpy as np

from loglinmle import build_design, fit_poisson, run_gis

A = [[1, 0, 3, 2], [1, 3, 0, 2]]
y = np.array([1, 2, 3, 4])

res = fit_poisson(A, y)
print("fitted intensities:", np.round(res.estimate, 4))
print("fitted total %.4f vs observed total %d" % (res.total, y.sum()))
print("A lambda:", np.asarray(A) @ res.estimate, " A y:", np.asarray(A) @ y)
print("iterations:", res.core_iterations[0])

# %%
# The trace records, per iterate, the residual of the sufficient statistics,
# the KL and Bregman divergences from the data and the current total.  The
# Bregman value decreases at every step and levels off at the divergence
# between the data and the fitted intensities.
out = run_gis(y, 1.0, build_design(A))
print("%4s %12s %12s %10s" % ("iter", "residual", "bregman", "total"))
for step in out.trace[::10] + [out.trace[-1]]:
    print("%4d %12.3e %12.3e %10.5f" % (step.iter, step.suffstat_residual,
                                        step.bregman, step.total))

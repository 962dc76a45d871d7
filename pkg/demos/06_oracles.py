"""
Checking the fitter against brute force
=======================================

For small designs the likelihood can be maximized by a refined grid search
over the log-linear parameters.  This is slow but shares no code with GIS.
"""

import time

import numpy as np

from loglinmle import build_design, fit_multinomial, fit_poisson, grid_search_mle
from loglinmle.errors import LogLinearError

rng = np.random.default_rng(0)
print("%-36s %-12s %10s %8s" % ("design", "scheme", "max dev", "time"))
for _ in range(6):
    while True:
        rows = rng.integers(0, 4, size=(2, rng.integers(3, 6))).tolist()
        try:
            A = build_design(rows)
            break
        except LogLinearError:
            continue
    y = rng.integers(1, 20, size=A.num_cells)
    for scheme, fit in (("poisson", fit_poisson), ("multinomial", fit_multinomial)):
        t0 = time.perf_counter()
        oracle = grid_search_mle(A, y, scheme)
        dt = time.perf_counter() - t0
        dev = np.abs(fit(A, y).estimate - oracle).max()
        print("%-36s %-12s %10.2e %7.3fs" % (rows, scheme, dev, dt))

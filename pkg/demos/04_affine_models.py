"""
Affine models: prescribed log odds ratios
=========================================

Instead of ``D log p = 0`` one may ask for ``D log p = psi``.  GIS never
changes the odds ratios of its starting point, so starting from a vector
with the right odds ratios is all that is needed.
"""

import math

import numpy as np

from loglinmle import affine_closed_form_mle, fit_affine, initial_point_from_psi
from loglinmle.design import as_kernel

A = [[1, 0, 3, 2], [1, 3, 0, 2]]
D = [[2, 0, 0, -1], [1, -1, -1, 1]]
psi = [math.log(12), math.log(9 / 8)]
y = [1, 2, 3, 4]

# a hand-picked start and the one computed from psi agree on the odds ratios
print("log odds of (6, 4, 4, 3):", as_kernel(D).log_odds([6, 4, 4, 3]))
print("start from psi:", np.round(initial_point_from_psi(D, psi), 4))

res = fit_affine(A, y, "multinomial", start=[6, 4, 4, 3], psi=psi, kernel=D)
closed = affine_closed_form_mle(y)
print("iterative :", np.round(res.estimate, 6), " gamma %.4f" % res.gamma_hat)
print("closed    :", np.round(closed.estimate, 6), " gamma %.4f" % closed.gamma)
print("odds after fit:", as_kernel(D).log_odds(res.estimate))

"""
Design matrices and their kernels
=================================

A log-linear model is given by a non-negative integer design matrix.  Here
we validate one, normalize it and look at the log odds ratios that describe
the same model from the dual side.
"""

import numpy as np

from loglinmle import build_design, has_overall_effect, kernel_basis, l1_norm, normalize

# two rows, four cells; no row of ones in its span
A = build_design([[1, 0, 3, 2], [1, 3, 0, 2]])
print("column sums:", A.entries.sum(axis=0), " L1 norm:", l1_norm(A))

# dividing by the largest column sum gives the matrix the iteration runs on
N = normalize(A)
print("normalized design:\n", N.entries)
print("slack row (1 - column sums):", N.slack)

# without a common parameter the probability model is a curved family
print("overall effect present:", has_overall_effect(A))

# the kernel basis is exact integer arithmetic, so D A' is exactly zero
D = kernel_basis(A)
print("kernel basis:\n", D.entries)
print("D A' =\n", D.entries @ A.entries.T)

# a point with log delta in the row span of A has zero log odds ratios
theta = np.array([0.3, -0.7])
delta = np.exp(theta @ A.entries)
print("log odds ratios of a model point:", D.log_odds(delta))

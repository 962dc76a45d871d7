"""
Goodness of fit for a tree model
================================

Counts of 200 patients over four ordered outcomes, modelled as a branching
process with one parameter per branch.  The model has a closed form MLE,
which the iterative fit reproduces.
"""

import math

import numpy as np

from loglinmle import fit_affine, fit_multinomial, gof_report, tree_model_mle

A = [[3, 2, 1, 0], [0, 1, 1, 1]]
y = [80, 12, 44, 64]

res = fit_multinomial(A, y)
exact = tree_model_mle(y)
print("fitted :", np.round(res.estimate, 5))
print("closed :", np.round(exact.estimate, 5))
print("gamma hat: %.4f" % res.gamma_hat)

rep = gof_report(res.estimate, y, A, "multinomial")
print("X^2 = %.2f, G^2 = %.2f on %d df" % (rep.pearson_x2, rep.deviance_g2, rep.df))

# %%
# Fixing one odds ratio at 2 instead of 1 gives an affine variant of the
# same model.
D = [[1, -2, 1, 1], [0, 1, -2, 1]]
alt = fit_affine(A, y, "multinomial", psi=[0, math.log(2)], kernel=D)
p = alt.estimate
print("fitted :", np.round(p, 4), " gamma %.4f" % alt.gamma_hat)
print("odds ratios:", p[0] * p[2] * p[3] / p[1] ** 2, p[1] * p[3] / p[2] ** 2)

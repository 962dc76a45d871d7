"""Maximum likelihood for general log-linear models, with or without the overall effect."""

from .design import (DesignMatrix, KernelBasis, NormalizedDesign,
                     build_design, check_kernel_pair, has_overall_effect,
                     kernel_basis, l1_norm, normalize)
from .diagnostics import (GofReport, adjustment_factor, degrees_of_freedom,
                          deviance, gof_report, pearson_chi2)
from .errors import *  # noqa: F401,F403
from .fitter import (FitConfig, FitResult, SamplingScheme, fit, fit_affine,
                     fit_multinomial, fit_poisson, gamma_adjust,
                     initial_point_from_psi)
from .gis import (GisConfig, GisOutcome, StepTrace, bregman_divergence,
                  gis_iterates, gis_step, kl_divergence, run_gis)
from .oracles import (ClosedFormResult, OracleGrid, affine_closed_form_mle,
                      grid_search_mle, tree_model_mle)

__version__ = "0.1.0"

"""Posterior estimation algorithms and their samplers."""

from .abc import (AbcPosterior, kde_log_density, rejection_abc,  # noqa: F401
                  silverman_bandwidth, smc_abc)
from .base import (EstimatorError, GridNormalized,  # noqa: F401
                   PosteriorEstimator, PriorEstimator)
from .ensemble import (EnsembleEstimator, ensemble_log_posterior,  # noqa: F401
                       log_mean_exp)
from .io import load_estimator, save_estimator  # noqa: F401
from .npe import NpeEstimator, train_npe  # noqa: F401
from .nre import RatioEstimator, nre_log_posterior, train_nre  # noqa: F401
from .samplers import (McmcError, grid_posterior_sample,  # noqa: F401
                       metropolis_hastings, run_chains)
from .snre import snre_sequential  # noqa: F401

"""Neural importance functions inside Beran kernels for explaining survival models."""

from .core import (
    CoxModel,
    StepFunction,
    SurvivalDataset,
    SurvivalRecord,
    beran_chf,
    beran_sf,
    cindex_times,
    cox_chf,
    cox_sf,
    gaussian_weights,
    kaplan_meier,
    nelson_aalen,
)
from .experiment import ExperimentConfig, MetricsReport, run_experiment
from .forest import ForestConfig, RSFModel, fit_rsf, logrank_statistic, rsf_predict
from .metrics import cindex_vec, dist_D, dist_KL, normalize_importance, sf_distance
from .synth import GeneratorConfig, gen_clustered_dataset, gen_nonlinear_dataset, gen_time, preset

__version__ = "0.1.0"

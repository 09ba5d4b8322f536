from .base import (
    METHODS,
    BlackBox,
    ExplanationResult,
    KernelConfig,
    NeighborhoodSample,
    TimeWeighting,
    sample_neighborhood,
    time_weights,
)
from .survbenim import (
    GlobalSurvBeNIM,
    SurvBeNIMConfig,
    benim_kernel,
    benim_local_loss,
    benim_surrogate_sf,
    fit_survbenim_global,
    fit_survbenim_local,
)
from .survbex import SurvBeXConfig, fit_survbex, survbex_sf, survbex_weights
from .survlime import SurvLIMEConfig, fit_survlime
from .survnam import SurvNAMConfig, SurvNAMModel, fit_survnam, fit_survnam_global

__all__ = [
    "METHODS",
    "BlackBox",
    "ExplanationResult",
    "GlobalSurvBeNIM",
    "KernelConfig",
    "NeighborhoodSample",
    "SurvBeNIMConfig",
    "SurvBeXConfig",
    "SurvLIMEConfig",
    "SurvNAMConfig",
    "SurvNAMModel",
    "TimeWeighting",
    "benim_kernel",
    "benim_local_loss",
    "benim_surrogate_sf",
    "fit_survbenim_global",
    "fit_survbenim_local",
    "fit_survbex",
    "fit_survlime",
    "fit_survnam",
    "fit_survnam_global",
    "sample_neighborhood",
    "survbex_sf",
    "survbex_weights",
    "time_weights",
]

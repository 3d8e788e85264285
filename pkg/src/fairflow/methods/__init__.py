"""Fairness-aware methods behind three standardized interfaces."""

from .base import (
    FAMILIES,
    Estimator,
    Method,
    Param,
    PostProcessor,
    PreProcessor,
    get_method,
    register,
    registered,
    validate_space,
)
from .estimators import FairLogisticRegression, LogisticRegression, fair_logreg_fit, logreg_fit
from .pipeline import ComponentSpec, MethodPipeline, PipelineSpec, Prediction
from .postprocessing import GroupThreshold, group_threshold_fit
from .preprocessing import PrevalenceSampling, Reweighing, prevalence_sample_index, reweighing_weights
from .space import HyperparameterSpace, ParamSpace, sample_hyperparams

__all__ = [
    "FAMILIES",
    "ComponentSpec",
    "Estimator",
    "FairLogisticRegression",
    "GroupThreshold",
    "HyperparameterSpace",
    "LogisticRegression",
    "Method",
    "MethodPipeline",
    "Param",
    "ParamSpace",
    "PipelineSpec",
    "PostProcessor",
    "PreProcessor",
    "Prediction",
    "PrevalenceSampling",
    "Reweighing",
    "fair_logreg_fit",
    "get_method",
    "group_threshold_fit",
    "logreg_fit",
    "prevalence_sample_index",
    "register",
    "registered",
    "reweighing_weights",
    "sample_hyperparams",
    "validate_space",
]

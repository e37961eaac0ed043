"""Sensor series modeled as distorted and translated Brownian motion."""

from .diffusion_forecast import (
    ForecastResult,
    TwoPointDist,
    fit_sigma2,
    forecast,
    sample_paths,
    simulate_brownian,
    skorokhod_exit,
)
from .ebm import EbmModel, ElmModel, ebm_energy, ebm_train, elm_eval, elm_fit, log_partition
from .markov_mle import SmoothedSeries, increments, smooth_series
from .normality import SwResult, sw_coefficients, sw_statistic, sw_test_increments
from .ortho_basis import OrthoBasis, SegmentVector, orthogonalize, reconstruct, segment_vectors
from .phase_classifier import (
    AssociationRule,
    ClassTree,
    build_tree,
    classify_point,
    extract_rules,
    max_gap_split,
    read_rules,
    write_rules,
)
from .series_io import SampleSeries, SeriesError, load_series, validate_series, write_series

__version__ = "0.1.0"

__all__ = [
    "ForecastResult",
    "TwoPointDist",
    "fit_sigma2",
    "forecast",
    "sample_paths",
    "simulate_brownian",
    "skorokhod_exit",
    "EbmModel",
    "ElmModel",
    "ebm_energy",
    "ebm_train",
    "elm_eval",
    "elm_fit",
    "log_partition",
    "SmoothedSeries",
    "increments",
    "smooth_series",
    "SwResult",
    "sw_coefficients",
    "sw_statistic",
    "sw_test_increments",
    "OrthoBasis",
    "SegmentVector",
    "orthogonalize",
    "reconstruct",
    "segment_vectors",
    "AssociationRule",
    "ClassTree",
    "build_tree",
    "classify_point",
    "extract_rules",
    "max_gap_split",
    "read_rules",
    "write_rules",
    "SampleSeries",
    "SeriesError",
    "load_series",
    "validate_series",
    "write_series",
]

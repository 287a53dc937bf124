"""Rigorous checks: norm certificates, coverage sampling and measure bounds."""

from .coverage import CoverageReport, EmptySet, check_cover, sample_set
from .lemmas import FiberReport, HypothesisFail, MeasureResult, fiber_derivative_bounded, large_derivative_measure
from .norms import (FAIL, MARGIN, PASS, UNDECIDED, Certificate, cell_alphas, certify_map_norm,
                    certify_norm, measure_norm)

__all__ = [
    "FAIL", "MARGIN", "PASS", "UNDECIDED", "Certificate", "CoverageReport", "EmptySet", "FiberReport",
    "HypothesisFail", "MeasureResult", "cell_alphas", "certify_map_norm", "certify_norm", "check_cover",
    "fiber_derivative_bounded", "large_derivative_measure", "measure_norm", "sample_set",
]

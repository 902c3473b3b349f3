"""Measure experiments and the Lambda lower-bound pipeline."""

from .lowerbound import (
    LambdaTerms,
    PTuple,
    StarIndex,
    WitnessReport,
    beta_shift,
    enumerate_p,
    f_exponent,
    floor_f,
    lambda_direct,
    lambda_spectral,
    reverify_report,
    theta,
    theta_projection,
    witness_search,
)
from .measure import (
    MeasureResult,
    joint_measure,
    measure_mm,
    pair_measure,
    paired_integral,
    walsh_matrix_integral,
)

__all__ = [
    "LambdaTerms", "MeasureResult", "PTuple", "StarIndex", "WitnessReport",
    "beta_shift", "enumerate_p", "f_exponent", "floor_f", "joint_measure",
    "lambda_direct", "lambda_spectral", "measure_mm", "pair_measure",
    "paired_integral", "reverify_report", "theta", "theta_projection",
    "walsh_matrix_integral", "witness_search",
]

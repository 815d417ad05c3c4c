"""Cauchy-Rician amplitude modelling with an algebraic-moments estimator."""

__version__ = "0.1.0"

from .distribution import CrParams, cdf, log_pdf, moment1, moment2, pdf, pdf_oracle  # noqa: E402
from .estimation import (  # noqa: E402
    MomentPair,
    ParamEstimate,
    choose_a,
    empirical_moments,
    estimate,
    estimate_single_moment,
)
from .sampling import LocationDecomposition, SampleBatch, sample_amplitude, sample_complex  # noqa: E402

__all__ = [
    "CrParams",
    "LocationDecomposition",
    "MomentPair",
    "ParamEstimate",
    "SampleBatch",
    "cdf",
    "choose_a",
    "empirical_moments",
    "estimate",
    "estimate_single_moment",
    "log_pdf",
    "moment1",
    "moment2",
    "pdf",
    "pdf_oracle",
    "sample_amplitude",
    "sample_complex",
]

"""Gaussian mechanism, calibration, noise decay and accounting."""

from .accountant import PrivacyAccountant
from .budget import (
    NoiseSchedule,
    PrivacyBudget,
    accumulated_epsilon,
    calibrate_sigma0,
    decayed_sigma,
    per_iteration_epsilon,
)
from .mechanism import (
    FULL_SCALE_FALLBACK,
    FullScaleFallback,
    NoiseDraw,
    reduced_sigma,
    reduction_factor,
    sample_noise,
)

__all__ = [
    "FULL_SCALE_FALLBACK",
    "FullScaleFallback",
    "NoiseDraw",
    "NoiseSchedule",
    "PrivacyAccountant",
    "PrivacyBudget",
    "accumulated_epsilon",
    "calibrate_sigma0",
    "decayed_sigma",
    "per_iteration_epsilon",
    "reduced_sigma",
    "reduction_factor",
    "sample_noise",
]

"""Gaussian mechanism and the topology-aware noise split."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from ..utils.exceptions import ValidationError


class FullScaleFallback(Enum):
    """Marker telling the caller to inject full-scale noise instead."""

    FULL_SCALE = "full_scale"


FULL_SCALE_FALLBACK = FullScaleFallback.FULL_SCALE


def reduction_factor(alpha: float) -> float:
    """Ratio of reduced to full noise when both agents share one sigma."""
    if not 0 < alpha <= 1:
        raise ValidationError("alpha must be in (0, 1]", field_name="alpha", field_value=alpha)
    return math.sqrt(2 * alpha - alpha * alpha)


def reduced_sigma(
    sigma_i: float, sigma_k: float, alpha: float
) -> float | FullScaleFallback:
    """Noise left to inject once (1 - alpha) * G_k is already embedded.

    Solves sigma_i^2 = sigma^2 + (1 - alpha)^2 sigma_k^2 for sigma. When the
    helper's noise alone covers sigma_i (non-positive radicand) the caller
    must fall back to full-scale noise.
    """
    if sigma_i == sigma_k and alpha > 0:
        return sigma_i * reduction_factor(alpha)
    radicand = sigma_i * sigma_i - ((1 - alpha) * sigma_k) ** 2
    if radicand > 0:
        return math.sqrt(radicand)
    return FULL_SCALE_FALLBACK


def sample_noise(dim: int, stddev: float, rng: np.random.Generator) -> NDArray[np.float64]:
    """Draw ``dim`` i.i.d. N(0, stddev^2) values.

    A zero stddev returns zeros without touching ``rng``.
    """
    if dim < 1:
        raise ValidationError("dim must be positive", field_name="dim", field_value=dim)
    if stddev < 0:
        raise ValidationError(
            "stddev must be non-negative", field_name="stddev", field_value=stddev
        )
    if stddev == 0:
        return np.zeros(dim)
    return rng.normal(0.0, stddev, size=dim)


@dataclass(frozen=True)
class NoiseDraw:
    """Per-coordinate Gaussian noise of an estimate: stddev = sigma * C."""

    stddev: float
    dim: int

    @classmethod
    def for_sigma(cls, sigma: float, clip_c: float, dim: int) -> NoiseDraw:
        return cls(stddev=sigma * clip_c, dim=dim)

    def sample(self, rng: np.random.Generator) -> NDArray[np.float64]:
        return sample_noise(self.dim, self.stddev, rng)

"""Clipping, step sizes and the two estimate update rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..utils.exceptions import DimensionMismatchError, ValidationError

Vector = NDArray[np.float64]


@dataclass(frozen=True)
class LearningConfig:
    """Step parameters shared by every agent of one run."""

    alpha: float = 0.25
    lambda0: float = 0.05
    clip_c: float = 4.0
    batch_size: int = 1
    lr_fade: int = 2000

    def __post_init__(self) -> None:
        if not 0 <= self.alpha <= 1:
            raise ValidationError("alpha must be in [0, 1]", field_name="alpha", field_value=self.alpha)
        if self.lambda0 < 0:
            raise ValidationError(
                "lambda0 must be non-negative", field_name="lambda0", field_value=self.lambda0
            )
        if not self.clip_c > 0:
            raise ValidationError("clip_c must be positive", field_name="clip_c", field_value=self.clip_c)
        if self.batch_size < 1:
            raise ValidationError(
                "batch_size must be positive", field_name="batch_size", field_value=self.batch_size
            )
        if self.lr_fade < 1:
            raise ValidationError("lr_fade must be positive", field_name="lr_fade", field_value=self.lr_fade)

    def rate(self, t: int) -> float:
        return learning_rate(self.lambda0, t, self.lr_fade)


def _check_same_length(**vectors: Vector) -> None:
    lengths = {name: v.shape for name, v in vectors.items()}
    shapes = set(lengths.values())
    if len(shapes) > 1:
        names = sorted(lengths)
        raise DimensionMismatchError(
            f"Vector shapes differ: {lengths}",
            expected=lengths[names[0]],
            actual=[lengths[n] for n in names[1:]],
        )


def clip_gradient(g: Vector, clip_c: float) -> Vector:
    """Rescale ``g`` onto the L2 ball of radius ``clip_c`` if it lies outside."""
    if not clip_c > 0:
        raise ValidationError("clip_c must be positive", field_name="clip_c", field_value=clip_c)
    return g / max(1.0, float(np.linalg.norm(g)) / clip_c)


def learning_rate(lambda0: float, t: int, fade: int) -> float:
    """lambda_t = lambda0 / (1 + t / fade)."""
    if fade < 1:
        raise ValidationError("fade must be positive", field_name="lr_fade", field_value=fade)
    return lambda0 / (1 + t / fade)


def aggregate_update(
    x_i: Vector, x_k: Vector, alpha: float, lam: float, gbar: Vector, noise: Vector
) -> Vector:
    """alpha * x_i + (1 - alpha) * x_k - lam * gbar + noise.

    Raises:
        DimensionMismatchError: If the vectors differ in length
    """
    _check_same_length(x_i=x_i, x_k=x_k, gbar=gbar, noise=noise)
    return alpha * x_i + (1 - alpha) * x_k - lam * gbar + noise


def local_update(x_i: Vector, lam: float, gbar: Vector, noise: Vector) -> Vector:
    """x_i - lam * gbar + noise, for agents that found no partner."""
    _check_same_length(x_i=x_i, gbar=gbar, noise=noise)
    return x_i - lam * gbar + noise

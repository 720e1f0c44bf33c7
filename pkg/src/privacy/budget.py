"""Privacy budgets, noise schedules and Gaussian calibration.

All logarithms are natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..utils.exceptions import ValidationError


@dataclass(frozen=True)
class PrivacyBudget:
    """(epsilon, delta) guarantee an agent enforces on its shard."""

    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValidationError(
                "epsilon must be positive", field_name="epsilon", field_value=self.epsilon
            )
        if not 0 < self.delta < 1:
            raise ValidationError(
                "delta must be in (0, 1)", field_name="delta", field_value=self.delta
            )


@dataclass(frozen=True)
class NoiseSchedule:
    """Step decay sigma0 * gamma ** floor(t / period)."""

    sigma0: float
    gamma: float = 1.0
    period: int = 1

    def __post_init__(self) -> None:
        if not self.sigma0 > 0:
            raise ValidationError(
                "sigma0 must be positive", field_name="sigma0", field_value=self.sigma0
            )
        if not 0 < self.gamma <= 1:
            raise ValidationError(
                "gamma must be in (0, 1]", field_name="gamma", field_value=self.gamma
            )
        if self.period < 1:
            raise ValidationError(
                "period must be positive", field_name="period", field_value=self.period
            )

    @classmethod
    def constant(cls, sigma0: float) -> NoiseSchedule:
        """Schedule with decay disabled."""
        return cls(sigma0=sigma0, gamma=1.0, period=1)

    def at(self, t: int) -> float:
        return decayed_sigma(self, t)


def _log_terms(delta: float) -> float:
    return math.log(1 / delta) * math.log(1.25 / delta)


def calibrate_sigma0(budget: PrivacyBudget, T: int, dataset_size: int) -> float:
    """Smallest initial noise multiplier keeping T releases within the budget.

    sigma0 = 8 * sqrt(T * ln(1/delta) * ln(1.25/delta)) / (epsilon * |D|)
    """
    if T < 1:
        raise ValidationError("T must be at least 1", field_name="T", field_value=T)
    if dataset_size < 1:
        raise ValidationError(
            "dataset_size must be at least 1",
            field_name="dataset_size",
            field_value=dataset_size,
        )
    return 8 * math.sqrt(T * _log_terms(budget.delta)) / (budget.epsilon * dataset_size)


def accumulated_epsilon(sigma0: float, t: int, delta: float, dataset_size: int) -> float:
    """Epsilon spent after ``t`` releases at noise multiplier ``sigma0``.

    The inverse of ``calibrate_sigma0`` in T; grows as sqrt(t).
    """
    if not sigma0 > 0:
        raise ValidationError("sigma0 must be positive", field_name="sigma0", field_value=sigma0)
    if t <= 0:
        return 0.0
    return 8 * math.sqrt(t * _log_terms(delta)) / (sigma0 * dataset_size)


def per_iteration_epsilon(budget: PrivacyBudget, T: int) -> float:
    """Per-release budget epsilon' = epsilon / (4 * sqrt(2 T ln(1/delta)))."""
    return budget.epsilon / (4 * math.sqrt(2 * T * math.log(1 / budget.delta)))


def decayed_sigma(schedule: NoiseSchedule, t: int) -> float:
    """Noise multiplier at iteration ``t``; never exceeds sigma0."""
    if t < 0:
        raise ValidationError("t must be non-negative", field_name="t", field_value=t)
    return schedule.sigma0 * schedule.gamma ** (t // schedule.period)

"""Per-agent privacy spend tracking."""

from __future__ import annotations

from dataclasses import dataclass

from .budget import PrivacyBudget, accumulated_epsilon

# calibrated runs land on epsilon up to rounding
EPSILON_TOLERANCE = 1e-9


@dataclass
class PrivacyAccountant:
    """Running epsilon of one agent.

    Every released iteration is charged at the full-scale cost of the
    calibrated sigma0, whether or not its outgoing estimates carried reduced
    noise: a reduced draw plus the helper's embedded noise reconstitutes the
    full-scale Gaussian.
    """

    budget: PrivacyBudget
    sigma0: float
    dataset_size: int
    releases: int = 0
    spent: float = 0.0

    def charge(self) -> float:
        """Record one release and return the cumulative epsilon."""
        self.releases += 1
        self.spent = accumulated_epsilon(
            self.sigma0, self.releases, self.budget.delta, self.dataset_size
        )
        return self.spent

    def remaining(self) -> float:
        return self.budget.epsilon - self.spent

    @property
    def exhausted(self) -> bool:
        return self.spent > self.budget.epsilon + EPSILON_TOLERANCE

"""Streaming mean, variance and skewness.

Moments use the population convention (divide by ``count``). Central sums
are carried with the one-pass update of Welford extended to third order,
and two accumulators combine with the pairwise formulas of Chan et al.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


class InsufficientSamples(Exception):
    def __init__(self, required: int, available: int, what: str = ""):
        self.required = required
        self.available = available
        self.what = what
        label = f" for {what}" if what else ""
        super().__init__(f"need at least {required} samples{label}, have {available}")


class DegenerateDistribution(ArithmeticError):
    pass


@dataclass
class SlotEstimator:
    count: int = 0
    mean_: float = 0.0
    m2: float = 0.0
    m3: float = 0.0

    @classmethod
    def from_samples(cls, samples: Iterable[float]) -> "SlotEstimator":
        est = cls()
        for x in samples:
            est.observe(x)
        return est

    def observe(self, sample: float) -> "SlotEstimator":
        n1 = self.count
        n = n1 + 1
        delta = sample - self.mean_
        delta_n = delta / n
        term1 = delta * delta_n * n1
        self.mean_ += delta_n
        self.m3 += term1 * delta_n * (n - 2) - 3.0 * delta_n * self.m2
        self.m2 += term1
        self.count = n
        return self

    def mean(self) -> float:
        if self.count < 1:
            raise InsufficientSamples(1, self.count, "mean")
        return self.mean_

    def variance(self) -> float:
        if self.count < 2:
            raise InsufficientSamples(2, self.count, "variance")
        return self.m2 / self.count

    def skewness(self) -> float:
        if self.count < 3:
            raise InsufficientSamples(3, self.count, "skewness")
        var = self.m2 / self.count
        if var <= 0.0:
            raise DegenerateDistribution("skewness undefined for zero variance")
        return (self.m3 / self.count) / var ** 1.5

    def merge(self, other: "SlotEstimator") -> "SlotEstimator":
        return merge(self, other)

    def copy(self) -> "SlotEstimator":
        return SlotEstimator(self.count, self.mean_, self.m2, self.m3)


def observe(est: SlotEstimator, sample: float) -> SlotEstimator:
    return est.observe(sample)


def merge(a: SlotEstimator, b: SlotEstimator) -> SlotEstimator:
    """Combine two estimators as if every sample had gone through one."""
    if a.count == 0:
        return b.copy()
    if b.count == 0:
        return a.copy()
    na, nb = a.count, b.count
    n = na + nb
    delta = b.mean_ - a.mean_
    # weighted mean is symmetric in (a, b), unlike mean_a + delta * nb / n
    mean = (na * a.mean_ + nb * b.mean_) / n
    m2 = a.m2 + b.m2 + delta * delta * na * nb / n
    m3 = (
        a.m3
        + b.m3
        + delta ** 3 * na * nb * (na - nb) / (n * n)
        + 3.0 * delta * (na * b.m2 - nb * a.m2) / n
    )
    return SlotEstimator(n, mean, m2, m3)


def pooled(estimators: Iterable[SlotEstimator]) -> SlotEstimator:
    out = SlotEstimator()
    for est in estimators:
        out = merge(out, est)
    return out

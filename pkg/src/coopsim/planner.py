"""Admission control for splitting one computation across neighbours.

A round may split into ``n + 1`` parts (``n`` peers plus the initiator)
when three gates pass:

* skewness: the pooled slot-count history is positively skewed, i.e. short
  transfers are the likelier outcome;
* time: ``ta + tp + ts + 2*tc <= t0``;
* energy: at least one peer fits the energy bound, where the largest
  admissible cohort is ``floor((f(t0) - f(ta) - f(ts)) / (f(tp) + 2 f(tc)) - 1)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from coopsim.link_model import LinkClass, classify_link
from coopsim.moments import (
    DegenerateDistribution,
    InsufficientSamples,
    SlotEstimator,
    pooled,
)
from coopsim.topology import Link

# Absorbs round-off in the third central sum of an exactly symmetric history.
SKEW_EPS = 1e-9


class NonPositiveDenominator(ArithmeticError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    t0: float
    ta: float
    ts: float
    tp: float
    payload_bits_per_neighbor: int = 1

    def __post_init__(self):
        for name in ("t0", "ta", "ts", "tp"):
            v = getattr(self, name)
            if not (v > 0) or math.isinf(v):
                raise ValueError(f"{name} must be a positive finite duration, got {v!r}")
        if self.payload_bits_per_neighbor < 1:
            raise ValueError("payload_bits_per_neighbor must be >= 1")


class EnergyForm(enum.Enum):
    IDENTITY = "identity"
    LINEAR = "linear"
    AFFINE = "affine"
    POWER_LAW = "power_law"


@dataclass(frozen=True)
class EnergyModel:
    """Energy drawn by an activity of a given duration.

    identity: ``t``; linear: ``k*t``; affine: ``k*t + offset``;
    power_law: ``k * t**exponent``.
    """

    form: EnergyForm = EnergyForm.IDENTITY
    coefficient: float = 1.0
    offset: float = 0.0
    exponent: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "form", EnergyForm(self.form))
        if not (self.coefficient > 0):
            raise ValueError(f"energy coefficient must be positive, got {self.coefficient!r}")
        if not (self.offset >= 0):
            raise ValueError(f"energy offset must be non-negative, got {self.offset!r}")
        if not (self.exponent > 0):
            raise ValueError(f"energy exponent must be positive, got {self.exponent!r}")

    @classmethod
    def identity(cls):
        return cls(EnergyForm.IDENTITY)

    @classmethod
    def linear(cls, coefficient):
        return cls(EnergyForm.LINEAR, coefficient=coefficient)

    @classmethod
    def affine(cls, coefficient, offset):
        return cls(EnergyForm.AFFINE, coefficient=coefficient, offset=offset)

    @classmethod
    def power_law(cls, coefficient, exponent):
        return cls(EnergyForm.POWER_LAW, coefficient=coefficient, exponent=exponent)

    def __call__(self, t: float) -> float:
        if self.form is EnergyForm.IDENTITY:
            return t
        if self.form is EnergyForm.LINEAR:
            return self.coefficient * t
        if self.form is EnergyForm.AFFINE:
            return self.coefficient * t + self.offset
        return self.coefficient * t ** self.exponent

    evaluate = __call__


class Decision(enum.Enum):
    SPLIT = "split"
    RUN_LOCALLY = "local"


@dataclass(frozen=True)
class GateRecord:
    name: str
    passed: bool
    value: float | None
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Plan:
    decision: Decision
    n: int
    cohort: tuple[tuple[str, str], ...]
    tc_estimate: float | None
    gates: tuple[GateRecord, ...]
    excluded_links: tuple[str, ...] = ()
    note: str = ""

    @property
    def is_split(self) -> bool:
        return self.decision is Decision.SPLIT

    def gate(self, name: str) -> GateRecord:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(name)


def estimate_tc(estimators: Mapping[str, SlotEstimator], candidates: Sequence[str], tau0: float) -> float:
    """Mean estimated slot count over ``candidates``, converted to time."""
    if not candidates:
        raise InsufficientSamples(1, 0, "tc: no candidate links")
    means = []
    for link_id in candidates:
        est = estimators.get(link_id)
        if est is None or est.count < 1:
            raise InsufficientSamples(1, 0 if est is None else est.count, f"link {link_id!r}")
        means.append(est.mean())
    return tau0 * math.fsum(means) / len(means)


def time_feasible(task: TaskSpec, tc: float) -> bool:
    return task.ta + task.tp + task.ts + 2 * tc <= task.t0


def energy_budget_ok(task: TaskSpec, f: EnergyModel, tc: float, n: int) -> bool:
    """The energy inequality itself, unrearranged, for cohort size ``n``."""
    return (n + 1) * f(task.tp) + f(task.ta) + f(task.ts) + 2 * (n + 1) * f(tc) <= f(task.t0)


def max_cohort_size(task: TaskSpec, f: EnergyModel, tc: float) -> int:
    """Largest peer count the energy budget admits; ``<= 0`` means no split."""
    denom = f(task.tp) + 2 * f(tc)
    if not (denom > 0):
        raise NonPositiveDenominator(f"f(tp) + 2 f(tc) = {denom!r}")
    ratio = (f(task.t0) - f(task.ta) - f(task.ts)) / denom
    if not math.isfinite(ratio):
        raise ArithmeticError(f"energy ratio is not finite: {ratio!r}")
    n = math.floor(ratio - 1)
    # closed form and inequality can disagree by one at an exact boundary
    while not energy_budget_ok(task, f, tc, n):
        n -= 1
    while energy_budget_ok(task, f, tc, n + 1):
        n += 1
    return n


def _gate_skewness(estimator: SlotEstimator) -> GateRecord:
    try:
        g = estimator.skewness()
    except InsufficientSamples as exc:
        return GateRecord("skewness", False, None, {"reason": str(exc)})
    except DegenerateDistribution:
        return GateRecord("skewness", False, None, {"reason": "zero variance"})
    return GateRecord("skewness", g > SKEW_EPS, g)


def split_decision(
    task: TaskSpec,
    estimators: Mapping[str, SlotEstimator],
    candidates: Sequence[tuple[str, Link]],
    f: EnergyModel,
    tau0: float,
) -> Plan:
    """Decide between splitting across ``candidates`` and running locally.

    ``candidates`` are ``(peer_id, link)`` pairs. Links whose delay fills the
    whole slot carry nothing and are dropped before any gate is evaluated.
    The cohort takes the peers with the smallest estimated slot-count mean,
    ties broken by peer id.
    """
    usable = [(v, link) for v, link in candidates if classify_link(link) is not LinkClass.USELESS]
    excluded = tuple(link.id for _, link in candidates if classify_link(link) is LinkClass.USELESS)
    if not usable:
        gates = (
            GateRecord("skewness", False, None, {"reason": "no usable candidates"}),
            GateRecord("time", False, None, {"reason": "no usable candidates"}),
            GateRecord("energy", False, None, {"reason": "no usable candidates"}),
        )
        return Plan(Decision.RUN_LOCALLY, 0, (), None, gates, excluded)

    link_ids = [link.id for _, link in usable]
    tc = estimate_tc(estimators, link_ids, tau0)
    skew_gate = _gate_skewness(pooled(estimators[lid] for lid in link_ids))
    feasible = time_feasible(task, tc)
    time_gate = GateRecord(
        "time", feasible, task.ta + task.tp + task.ts + 2 * tc, {"t0": task.t0, "tc": tc}
    )
    n_max = max_cohort_size(task, f, tc) if tc > 0 else None
    energy_gate = GateRecord(
        "energy", n_max is not None and n_max >= 1, None if n_max is None else float(n_max)
    )
    gates = (skew_gate, time_gate, energy_gate)

    if not all(g.passed for g in gates):
        return Plan(Decision.RUN_LOCALLY, 0, (), tc, gates, excluded)

    ranked = sorted(usable, key=lambda c: (estimators[c[1].id].mean(), c[0], c[1].id))
    # one slot per peer: a peer reachable over two links takes its best one
    cohort, seen = [], set()
    for v, link in ranked:
        if v not in seen:
            seen.add(v)
            cohort.append((v, link.id))
    n = min(n_max, len(cohort))
    return Plan(Decision.SPLIT, n, tuple(cohort[:n]), tc, gates, excluded)

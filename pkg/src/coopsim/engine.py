"""Deterministic round-based simulator of cooperative offloading.

Each round runs one pass of the offload loop:

1. apply churn scheduled before the round;
2. draw a demand for every link and feed the resulting slot counts to the
   per-link estimators;
3. ask the planner for a decision (after ``warmup`` rounds);
4. scatter, compute, gather, compose, with churn scheduled mid-round
   applied between scatter and gather.

All randomness for round ``r`` comes from a generator keyed on
``(seed, r)`` and every link is drawn every round whether or not it is
used, so churn and decisions never shift the random stream of later rounds.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from coopsim.link_model import (
    AsymptoticCapacityViolated,
    NetworkParams,
    bits_per_slot,
    slots_required,
)
from coopsim.moments import SlotEstimator, pooled
from coopsim.planner import (
    Decision,
    EnergyModel,
    GateRecord,
    Plan,
    TaskSpec,
    split_decision,
)
from coopsim.topology import DeviceGraph, DeviceKind, UnknownVertex

log = logging.getLogger(__name__)

DEFAULT_WARMUP = 3
SEED_MASK = (1 << 64) - 1


class InvalidScenario(ValueError):
    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in problems))


class Exhausted(Exception):
    pass


class DemandKind(enum.Enum):
    CONSTANT = "constant"
    UNIFORM = "uniform"
    TWO_POINT = "two_point"


@dataclass(frozen=True)
class DemandSpec:
    """Payload bits a transfer on a link needs in a given round.

    constant: always ``a``; uniform: an integer in ``[a, b]``;
    two_point: ``b`` with probability ``p``, else ``a``.
    """

    kind: DemandKind
    a: int
    b: int = 0
    p: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DemandKind(self.kind))
        if self.a < 1:
            raise ValueError("demand payload must be >= 1 bit")
        if self.kind is DemandKind.UNIFORM and self.b < self.a:
            raise ValueError("uniform demand needs lo <= hi")
        if self.kind is DemandKind.TWO_POINT:
            if self.b < 1:
                raise ValueError("demand payload must be >= 1 bit")
            if not (0.0 <= self.p <= 1.0):
                raise ValueError("two_point probability must lie in [0, 1]")

    @classmethod
    def constant(cls, bits):
        return cls(DemandKind.CONSTANT, bits)

    @classmethod
    def uniform(cls, lo, hi):
        return cls(DemandKind.UNIFORM, lo, hi)

    @classmethod
    def two_point(cls, a, b, p):
        return cls(DemandKind.TWO_POINT, a, b, p)

    def sample(self, u: float) -> int:
        """Map a uniform variate in [0, 1) to a payload."""
        if self.kind is DemandKind.CONSTANT:
            return self.a
        if self.kind is DemandKind.UNIFORM:
            return min(self.b, self.a + int(u * (self.b - self.a + 1)))
        return self.b if u < self.p else self.a


class ChurnPhase(enum.Enum):
    BEFORE = "before"
    MID = "mid"


@dataclass(frozen=True)
class ChurnEvent:
    round: int
    vertex: str
    alive: bool
    phase: ChurnPhase = ChurnPhase.BEFORE

    def __post_init__(self):
        object.__setattr__(self, "phase", ChurnPhase(self.phase))


@dataclass
class Scenario:
    graph: DeviceGraph
    params: NetworkParams
    task: TaskSpec
    energy: EnergyModel
    local_tp: float
    rounds: int
    seed: int = 0
    warmup: int = DEFAULT_WARMUP
    initiator: str | None = None
    default_demand: DemandSpec | None = None
    demand: dict[str, DemandSpec] = field(default_factory=dict)
    churn: list[ChurnEvent] = field(default_factory=list)

    def initiator_id(self) -> str:
        if self.initiator is not None:
            return self.initiator
        for v in self.graph.vertices.values():
            if v.kind is DeviceKind.PHONE:
                return v.id
        raise InvalidScenario([("initiator", "scenario has no phone")])

    def demand_for(self, link_id: str) -> DemandSpec:
        spec = self.demand.get(link_id, self.default_demand)
        if spec is None:
            return DemandSpec.constant(self.task.payload_bits_per_neighbor)
        return spec

    def validate(self) -> None:
        problems = []
        if not isinstance(self.rounds, int) or self.rounds < 1:
            problems.append(("rounds", "must be an integer >= 1"))
        if not isinstance(self.warmup, int) or self.warmup < 0:
            problems.append(("warmup", "must be an integer >= 0"))
        if not isinstance(self.seed, int) or not (0 <= self.seed <= SEED_MASK):
            problems.append(("seed", "must be an integer in [0, 2**64)"))
        if not (self.local_tp > 0) or math.isinf(self.local_tp):
            problems.append(("task.local_tp", "must be a positive finite duration"))
        try:
            init = self.initiator_id()
            if init not in self.graph.vertices:
                problems.append(("initiator", f"unknown device {init!r}"))
            elif self.graph.vertices[init].kind is not DeviceKind.PHONE:
                problems.append(("initiator", "must be a phone"))
        except InvalidScenario as exc:
            problems.extend(exc.problems)
            init = None
        for link_id in self.demand:
            if link_id not in self.graph.links:
                problems.append((f"demand.links.{link_id}", "unknown link"))
        for k, ev in enumerate(self.churn):
            if ev.vertex not in self.graph.vertices:
                problems.append((f"churn[{k}].device", f"unknown device {ev.vertex!r}"))
            elif ev.vertex == init:
                problems.append((f"churn[{k}].device", "the initiator cannot churn"))
            if not (0 <= ev.round < max(self.rounds, 1)):
                problems.append((f"churn[{k}].round", "outside the simulated rounds"))
        for link in self.graph.links.values():
            try:
                bits_per_slot(self.params, link)
            except AsymptoticCapacityViolated as exc:
                problems.append((f"links.{link.id}.rho_capacity", str(exc)))
        if problems:
            raise InvalidScenario(problems)


@dataclass(frozen=True)
class Snapshot:
    count: int
    mean: float | None
    variance: float | None
    skewness: float | None

    @classmethod
    def of(cls, est: SlotEstimator) -> "Snapshot":
        mean = est.mean_ if est.count >= 1 else None
        var = est.m2 / est.count if est.count >= 2 else None
        skew = None
        if est.count >= 3 and est.m2 > 0:
            skew = est.skewness()
        return cls(est.count, mean, var, skew)


@dataclass(frozen=True)
class RoundOutcome:
    round: int
    plan: Plan
    elapsed: float
    energy_spent: float
    comm_energy: float
    deadline_met: bool
    failures: tuple[tuple[str, str], ...] = ()
    tc_realized: float | None = None


@dataclass
class SimTrace:
    outcomes: list[RoundOutcome] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    seed: int = 0
    t0: float = 0.0


def _warmup_plan(note: str) -> Plan:
    gates = tuple(GateRecord(name, False, None, {"reason": note}) for name in ("skewness", "time", "energy"))
    return Plan(Decision.RUN_LOCALLY, 0, (), None, gates, note=note)


class Engine:
    """Step-wise simulator state for one scenario.

    ``run`` is a fold of ``step``; use the engine directly to interleave
    ``inject_churn`` calls between rounds.
    """

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.scenario = scenario
        self.graph = scenario.graph.copy()
        self.initiator = scenario.initiator_id()
        self.round = 0
        self.links = list(self.graph.links.values())
        self.per_slot = {link.id: bits_per_slot(scenario.params, link) for link in self.links}
        self.demand = {link.id: scenario.demand_for(link.id) for link in self.links}
        self.estimators = {link.id: SlotEstimator() for link in self.links}
        self.trace = SimTrace(seed=scenario.seed, t0=scenario.task.t0)
        self._pending_mid: list[tuple[str, bool]] = []

    @property
    def exhausted(self) -> bool:
        return self.round >= self.scenario.rounds

    def inject_churn(self, vertex_id: str, alive: bool, *, mid_round: bool = False) -> "Engine":
        """Flip a device's liveness now, or between scatter and gather of the next round."""
        if vertex_id not in self.graph.vertices:
            raise UnknownVertex(vertex_id)
        if mid_round:
            self._pending_mid.append((vertex_id, alive))
        else:
            self.graph.set_alive(vertex_id, alive)
        return self

    def _draw(self, u0: float) -> dict[str, int]:
        # systematic draw: link k gets (u0 + k/K) mod 1, so each round's
        # demands are stratified across links
        count = len(self.links)
        return {
            link.id: self.demand[link.id].sample((u0 + k / count) % 1.0)
            for k, link in enumerate(self.links)
        }

    def _slots(self, link_id: str, bits: int) -> int:
        return slots_required(self.per_slot[link_id], bits)

    def _candidates(self):
        out = []
        for v, lid in self.graph.neighbors(self.initiator):
            if self.graph.vertices[v].kind is DeviceKind.PHONE:
                out.append((v, self.graph.links[lid]))
        return out

    def step(self) -> RoundOutcome:
        if self.exhausted:
            raise Exhausted(f"all {self.scenario.rounds} rounds already simulated")
        sc = self.scenario
        task, f, tau0 = sc.task, sc.energy, sc.params.tau0
        r = self.round

        for ev in sc.churn:
            if ev.round == r and ev.phase is ChurnPhase.BEFORE:
                self.graph.set_alive(ev.vertex, ev.alive)
        mid = [(ev.vertex, ev.alive) for ev in sc.churn if ev.round == r and ev.phase is ChurnPhase.MID]
        mid += self._pending_mid
        self._pending_mid = []

        rng = np.random.default_rng([sc.seed, r])
        u_train, u_out, u_in = (float(u) for u in rng.random(3))

        for link_id, bits in self._draw(u_train).items():
            link = self.graph.links[link_id]
            if self.per_slot[link_id] > 0 and self.graph.link_alive(link):
                self.estimators[link_id].observe(self._slots(link_id, bits))

        candidates = self._candidates()
        usable = [link.id for _, link in candidates if self.per_slot[link.id] > 0]
        self.trace.snapshots.append(Snapshot.of(pooled(self.estimators[lid] for lid in usable)))

        if r < sc.warmup:
            plan = _warmup_plan("warmup")
        else:
            plan = split_decision(task, self.estimators, candidates, f, tau0)

        out_bits = self._draw(u_out)
        in_bits = self._draw(u_in)

        for vertex_id, alive in mid:
            self.graph.set_alive(vertex_id, alive)

        if plan.is_split:
            n = plan.n
            comm = [
                (self._slots(lid, out_bits[lid]) + self._slots(lid, in_bits[lid])) * tau0
                for _, lid in plan.cohort
            ]
            failures = tuple((v, "gather") for v, _ in plan.cohort if not self.graph.vertices[v].alive)
            tc_realized = math.fsum(comm) / (2 * len(comm))
            elapsed = task.ta + task.tp + task.ts + max(comm)
            if failures:
                # no re-dispatch: the missing part never arrives
                elapsed = math.inf
            comm_energy = 2 * (n + 1) * f(tc_realized)
            energy = (n + 1) * f(task.tp) + f(task.ta) + f(task.ts) + comm_energy
        else:
            failures = ()
            tc_realized = None
            elapsed = task.ta + sc.local_tp + task.ts
            comm_energy = 0.0
            energy = f(task.ta) + f(sc.local_tp) + f(task.ts)

        outcome = RoundOutcome(
            round=r,
            plan=plan,
            elapsed=elapsed,
            energy_spent=energy,
            comm_energy=comm_energy,
            deadline_met=elapsed <= task.t0,
            failures=failures,
            tc_realized=tc_realized,
        )
        if failures:
            log.info("round %d: cohort member(s) lost mid-round: %s", r, failures)
        self.trace.outcomes.append(outcome)
        self.round += 1
        return outcome


def run(scenario: Scenario) -> SimTrace:
    engine = Engine(scenario)
    while not engine.exhausted:
        engine.step()
    return engine.trace

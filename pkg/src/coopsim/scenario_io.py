"""JSON scenario files: parsing, validation and serialization."""

from __future__ import annotations

import json
from typing import Literal, Optional

import pydantic as pd

from coopsim.engine import (
    DEFAULT_WARMUP,
    ChurnEvent,
    DemandKind,
    DemandSpec,
    InvalidScenario,
    Scenario,
)
from coopsim.link_model import NetworkParams
from coopsim.planner import EnergyForm, EnergyModel, TaskSpec
from coopsim.topology import DeviceGraph, DuplicateId, TopologyError


class ScenarioError(Exception):
    pass


class ScenarioSyntaxError(ScenarioError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class ValidationError(ScenarioError):
    """One or more fields failed validation; ``problems`` holds (path, constraint) pairs."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{p}: {c}" for p, c in problems))

    @property
    def paths(self) -> list[str]:
        return [p for p, _ in self.problems]


class _Strict(pd.BaseModel):
    model_config = pd.ConfigDict(extra="forbid", strict=True, allow_inf_nan=False)


Positive = pd.PositiveFloat


class NetworkModel(_Strict):
    c0: Positive
    tau0: Positive
    c0_is_asymptotic: bool = False


class DeviceModel(_Strict):
    id: str
    kind: Literal["phone", "base_station", "wifi_ap"]


class LinkModel(_Strict):
    id: Optional[str] = None
    endpoints: tuple[str, str]
    kind: Literal["wifi", "cell"]
    rho_capacity: float = pd.Field(gt=0, le=1)
    rho_delay: float = pd.Field(ge=0, le=1)


class TaskModel(_Strict):
    t0: Positive
    ta: Positive
    ts: Positive
    tp: Positive
    payload_bits_per_neighbor: pd.PositiveInt
    local_tp: Positive


class EnergyFileModel(_Strict):
    form: Literal["identity", "linear", "affine", "power_law"] = "identity"
    coefficient: Optional[Positive] = None
    offset: Optional[pd.NonNegativeFloat] = None
    exponent: Optional[Positive] = None

    @pd.model_validator(mode="after")
    def _fields_match_form(self):
        needed = {
            "identity": set(),
            "linear": {"coefficient"},
            "affine": {"coefficient", "offset"},
            "power_law": {"coefficient", "exponent"},
        }[self.form]
        given = {k for k in ("coefficient", "offset", "exponent") if getattr(self, k) is not None}
        if needed - given:
            raise ValueError(f"form {self.form!r} requires {sorted(needed - given)}")
        if given - needed:
            raise ValueError(f"form {self.form!r} does not take {sorted(given - needed)}")
        return self


class DemandModel(_Strict):
    kind: Literal["constant", "uniform", "two_point"]
    bits: Optional[pd.PositiveInt] = None
    lo: Optional[pd.PositiveInt] = None
    hi: Optional[pd.PositiveInt] = None
    a: Optional[pd.PositiveInt] = None
    b: Optional[pd.PositiveInt] = None
    p: Optional[float] = pd.Field(default=None, ge=0, le=1)

    @pd.model_validator(mode="after")
    def _fields_match_kind(self):
        needed = {"constant": {"bits"}, "uniform": {"lo", "hi"}, "two_point": {"a", "b", "p"}}[self.kind]
        given = {k for k in ("bits", "lo", "hi", "a", "b", "p") if getattr(self, k) is not None}
        if needed - given:
            raise ValueError(f"kind {self.kind!r} requires {sorted(needed - given)}")
        if given - needed:
            raise ValueError(f"kind {self.kind!r} does not take {sorted(given - needed)}")
        if self.kind == "uniform" and self.hi < self.lo:
            raise ValueError("uniform demand needs lo <= hi")
        return self

    def to_spec(self) -> DemandSpec:
        if self.kind == "constant":
            return DemandSpec.constant(self.bits)
        if self.kind == "uniform":
            return DemandSpec.uniform(self.lo, self.hi)
        return DemandSpec.two_point(self.a, self.b, self.p)


class DemandSection(_Strict):
    default: Optional[DemandModel] = None
    links: dict[str, DemandModel] = {}


class ChurnModel(_Strict):
    round: pd.NonNegativeInt
    device: str
    alive: bool
    phase: Literal["before", "mid"] = "before"


class ScenarioFile(_Strict):
    network: NetworkModel
    devices: list[DeviceModel]
    links: list[LinkModel] = []
    task: TaskModel
    energy: EnergyFileModel = EnergyFileModel()
    demand: DemandSection = DemandSection()
    rounds: pd.PositiveInt
    warmup: pd.NonNegativeInt = DEFAULT_WARMUP
    churn: list[ChurnModel] = []
    seed: int = pd.Field(default=0, ge=0, lt=1 << 64)
    initiator: Optional[str] = None


def _format_loc(loc) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out or "<root>"


def _build(doc: ScenarioFile) -> Scenario:
    graph = DeviceGraph()
    problems = []
    for k, dev in enumerate(doc.devices):
        try:
            graph.add_device(dev.kind, dev.id)
        except TopologyError as exc:
            problems.append((f"devices[{k}].id", str(exc)))
    for k, ln in enumerate(doc.links):
        try:
            graph.add_link(*ln.endpoints, ln.kind, ln.rho_capacity, ln.rho_delay, link_id=ln.id)
        except DuplicateId as exc:
            problems.append((f"links[{k}].id", str(exc)))
        except TopologyError as exc:
            problems.append((f"links[{k}].endpoints", str(exc)))
    if problems:
        raise ValidationError(problems)

    energy = EnergyModel(
        EnergyForm(doc.energy.form),
        coefficient=doc.energy.coefficient or 1.0,
        offset=doc.energy.offset or 0.0,
        exponent=doc.energy.exponent or 1.0,
    )
    task = TaskSpec(doc.task.t0, doc.task.ta, doc.task.ts, doc.task.tp,
                    doc.task.payload_bits_per_neighbor)
    scenario = Scenario(
        graph=graph,
        params=NetworkParams(doc.network.c0, doc.network.tau0, doc.network.c0_is_asymptotic),
        task=task,
        energy=energy,
        local_tp=doc.task.local_tp,
        rounds=doc.rounds,
        seed=doc.seed,
        warmup=doc.warmup,
        initiator=doc.initiator,
        default_demand=doc.demand.default.to_spec() if doc.demand.default else None,
        demand={lid: m.to_spec() for lid, m in doc.demand.links.items()},
        churn=[ChurnEvent(c.round, c.device, c.alive, c.phase) for c in doc.churn],
    )
    try:
        scenario.validate()
    except InvalidScenario as exc:
        raise ValidationError(exc.problems) from None
    return scenario


def parse_scenario(text: str) -> Scenario:
    try:
        json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    try:
        doc = ScenarioFile.model_validate_json(text)
    except pd.ValidationError as exc:
        raise ValidationError([(_format_loc(e["loc"]), e["msg"]) for e in exc.errors()]) from None
    return _build(doc)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _demand_dict(spec: DemandSpec) -> dict:
    if spec.kind is DemandKind.CONSTANT:
        return {"kind": "constant", "bits": spec.a}
    if spec.kind is DemandKind.UNIFORM:
        return {"kind": "uniform", "lo": spec.a, "hi": spec.b}
    return {"kind": "two_point", "a": spec.a, "b": spec.b, "p": spec.p}


def scenario_to_dict(scenario: Scenario) -> dict:
    g = scenario.graph
    energy = {"form": scenario.energy.form.value}
    form = scenario.energy.form
    if form is not EnergyForm.IDENTITY:
        energy["coefficient"] = scenario.energy.coefficient
    if form is EnergyForm.AFFINE:
        energy["offset"] = scenario.energy.offset
    if form is EnergyForm.POWER_LAW:
        energy["exponent"] = scenario.energy.exponent
    demand = {"links": {lid: _demand_dict(s) for lid, s in scenario.demand.items()}}
    if scenario.default_demand is not None:
        demand["default"] = _demand_dict(scenario.default_demand)
    doc = {
        "network": {
            "c0": scenario.params.c0,
            "tau0": scenario.params.tau0,
            "c0_is_asymptotic": scenario.params.c0_is_asymptotic,
        },
        "devices": [{"id": v.id, "kind": v.kind.value} for v in g.vertices.values()],
        "links": [
            {
                "id": ln.id,
                "endpoints": list(ln.endpoints),
                "kind": ln.kind.value,
                "rho_capacity": ln.rho_capacity,
                "rho_delay": ln.rho_delay,
            }
            for ln in g.links.values()
        ],
        "task": {
            "t0": scenario.task.t0,
            "ta": scenario.task.ta,
            "ts": scenario.task.ts,
            "tp": scenario.task.tp,
            "payload_bits_per_neighbor": scenario.task.payload_bits_per_neighbor,
            "local_tp": scenario.local_tp,
        },
        "energy": energy,
        "demand": demand,
        "rounds": scenario.rounds,
        "warmup": scenario.warmup,
        "churn": [
            {"round": c.round, "device": c.vertex, "alive": c.alive, "phase": c.phase.value}
            for c in scenario.churn
        ],
        "seed": scenario.seed,
    }
    if scenario.initiator is not None:
        doc["initiator"] = scenario.initiator
    return doc


def serialize_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"

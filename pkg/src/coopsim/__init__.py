"""Deterministic simulator and planner for cooperative task offloading among mobile devices."""

from coopsim.engine import (
    ChurnEvent,
    ChurnPhase,
    DemandSpec,
    Engine,
    Exhausted,
    InvalidScenario,
    RoundOutcome,
    Scenario,
    SimTrace,
    run,
)
from coopsim.link_model import (
    LinkClass,
    NetworkParams,
    TransferRequest,
    bits_per_slot,
    classify_link,
    slots_required,
)
from coopsim.metrics import emit_metrics, sweep
from coopsim.moments import DegenerateDistribution, InsufficientSamples, SlotEstimator, merge
from coopsim.planner import (
    Decision,
    EnergyModel,
    Plan,
    TaskSpec,
    estimate_tc,
    max_cohort_size,
    split_decision,
    time_feasible,
)
from coopsim.scenario_io import load_scenario, parse_scenario, serialize_scenario
from coopsim.topology import DeviceGraph, DeviceKind, LinkKind

__version__ = "0.1.0"

"""Per-round metrics, summaries, and seed sweeps."""

from __future__ import annotations

import dataclasses
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from coopsim.engine import Scenario, SimTrace, run

FIELDS = ("round", "decision", "n", "tc_estimate", "skewness", "elapsed", "energy", "deadline_met")
SUMMARY_FIELDS = ("split_rate", "deadline_miss_rate", "mean_energy")


def fmt_num(x: float | None) -> str:
    """Six significant digits, shortest form; '' for missing."""
    if x is None:
        return ""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, ".6g")
    return "0" if s == "-0" else s


@dataclass(frozen=True)
class Row:
    round: int
    decision: str
    n: int
    tc_estimate: float | None
    skewness: float | None
    elapsed: float
    energy: float
    deadline_met: bool


@dataclass(frozen=True)
class Summary:
    rounds: int
    split_rate: float
    deadline_miss_rate: float
    mean_energy: float

    @classmethod
    def from_rows(cls, rows: Sequence[Row]) -> "Summary":
        k = len(rows)
        return cls(
            rounds=k,
            split_rate=sum(r.decision == "split" for r in rows) / k,
            deadline_miss_rate=sum(not r.deadline_met for r in rows) / k,
            mean_energy=math.fsum(r.energy for r in rows) / k,
        )


@dataclass(frozen=True)
class MetricsReport:
    rows: tuple[Row, ...]
    summary: Summary

    def consistent(self) -> bool:
        return Summary.from_rows(self.rows) == self.summary


def rows_from_trace(trace: SimTrace) -> list[Row]:
    rows = []
    for out, snap in zip(trace.outcomes, trace.snapshots):
        rows.append(Row(
            round=out.round,
            decision=out.plan.decision.value,
            n=out.plan.n,
            tc_estimate=out.plan.tc_estimate,
            skewness=snap.skewness,
            elapsed=out.elapsed,
            energy=out.energy_spent,
            deadline_met=out.deadline_met,
        ))
    return rows


def report(trace: SimTrace) -> MetricsReport:
    if not trace.outcomes:
        raise ValueError("empty trace")
    rows = rows_from_trace(trace)
    return MetricsReport(tuple(rows), Summary.from_rows(rows))


def _cells(row: Row) -> list[str]:
    return [
        str(row.round),
        row.decision,
        str(row.n),
        fmt_num(row.tc_estimate),
        fmt_num(row.skewness),
        fmt_num(row.elapsed),
        fmt_num(row.energy),
        "true" if row.deadline_met else "false",
    ]


def _json_line(row: Row) -> str:
    # numbers are pre-formatted so output is byte-stable; non-finite -> null
    parts = []
    for name, cell in zip(FIELDS, _cells(row)):
        if name == "decision":
            value = json.dumps(cell)
        elif cell in ("", "nan", "inf", "-inf"):
            value = "null"
        else:
            value = cell
        parts.append(f'"{name}": {value}')
    return "{" + ", ".join(parts) + "}"


def emit_metrics(trace: SimTrace, format: str = "csv") -> str:
    rows = report(trace).rows
    if format == "csv":
        lines = [",".join(FIELDS)] + [",".join(_cells(r)) for r in rows]
    elif format in ("jsonl", "json-lines"):
        lines = [_json_line(r) for r in rows]
    else:
        raise ValueError(f"unknown format {format!r}")
    return "\n".join(lines) + "\n"


class SweepError(RuntimeError):
    def __init__(self, seed: int, message: str):
        super().__init__(seed, message)
        self.seed = seed

    def __str__(self):
        return f"seed {self.seed}: {self.args[1]}"


@dataclass(frozen=True)
class SweepReport:
    seeds: tuple[int, ...]
    summaries: tuple[Summary, ...]
    mean: dict
    std: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("metric,mean,std,seeds\n")
        for name in SUMMARY_FIELDS:
            buf.write(f"{name},{fmt_num(self.mean[name])},{fmt_num(self.std[name])},{len(self.seeds)}\n")
        return buf.getvalue()


def _summary_for(args) -> tuple[int, Summary]:
    scenario, seed = args
    try:
        trace = run(dataclasses.replace(scenario, seed=seed))
    except Exception as exc:
        raise SweepError(seed, str(exc)) from exc
    return seed, report(trace).summary


def aggregate(per_seed: dict[int, Summary]) -> SweepReport:
    seeds = tuple(sorted(per_seed))
    summaries = tuple(per_seed[s] for s in seeds)
    mean, std = {}, {}
    for name in SUMMARY_FIELDS:
        values = [getattr(s, name) for s in summaries]
        mean[name] = math.fsum(values) / len(values)
        std[name] = statistics.pstdev(values) if len(values) > 1 else 0.0
    return SweepReport(seeds, summaries, mean, std)


def sweep(scenario: Scenario, seeds: Sequence[int], workers: int = 1) -> SweepReport:
    """Run ``scenario`` once per seed and aggregate the summaries.

    Aggregation is keyed by seed, so the result does not depend on seed
    order or completion order.
    """
    if not seeds:
        raise ValueError("at least one seed required")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    jobs = [(scenario, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_summary_for, jobs))
    else:
        results = [_summary_for(j) for j in jobs]
    return aggregate(dict(results))

import json
import math

import pytest

from coopsim.engine import DemandSpec, SimTrace, run
from coopsim.metrics import FIELDS, SweepError, emit_metrics, fmt_num, report, sweep

from conftest import slots, star_scenario


@pytest.mark.parametrize("x, s", [
    (None, ""), (0.0, "0"), (-0.0, "0"), (1.0, "1"), (1 / 3, "0.333333"),
    (123456789.0, "1.23457e+08"), (math.inf, "inf"), (1.5e-7, "1.5e-07"),
])
def test_fmt_num(x, s):
    assert fmt_num(x) == s


def test_one_round_csv_has_two_lines():
    text = emit_metrics(run(star_scenario([slots(1)], rounds=1)), "csv")
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0] == "round,decision,n,tc_estimate,skewness,elapsed,energy,deadline_met"


def test_jsonl_rows_and_fields(deterministic_scenario):
    trace = run(deterministic_scenario)
    text = emit_metrics(trace, "jsonl")
    rows = [json.loads(line) for line in text.splitlines()]
    assert len(rows) == deterministic_scenario.rounds
    assert tuple(rows[0]) == FIELDS
    assert rows[5]["decision"] == "split" and rows[5]["n"] == 2
    assert rows[0]["tc_estimate"] is None


def test_emit_is_byte_stable(deterministic_scenario):
    trace = run(deterministic_scenario)
    assert emit_metrics(trace, "csv") == emit_metrics(trace, "csv")
    assert emit_metrics(trace, "jsonl") == emit_metrics(trace, "jsonl")


def test_failed_round_elapsed_is_inf_in_csv_null_in_jsonl(deterministic_scenario):
    from coopsim.engine import ChurnEvent
    import dataclasses
    sc = dataclasses.replace(deterministic_scenario, rounds=8, churn=[ChurnEvent(5, "p1", False, "mid")])
    trace = run(sc)
    assert emit_metrics(trace).splitlines()[6].split(",")[5] == "inf"
    assert json.loads(emit_metrics(trace, "jsonl").splitlines()[5])["elapsed"] is None


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_metrics(run(star_scenario([slots(1)], rounds=1)), "xml")


def test_empty_trace_rejected():
    with pytest.raises(ValueError):
        emit_metrics(SimTrace())


def test_summary_recomputable(deterministic_scenario):
    rep = report(run(deterministic_scenario))
    assert rep.consistent()
    assert len(rep.rows) == deterministic_scenario.rounds
    assert rep.summary.split_rate == pytest.approx(97 / 100)


def test_sweep_singleton_equals_run():
    sc = star_scenario([DemandSpec.two_point(500, 2500, 0.2)] * 4, rounds=40)
    agg = sweep(sc, [7])
    import dataclasses
    direct = report(run(dataclasses.replace(sc, seed=7))).summary
    assert agg.summaries == (direct,)
    assert agg.mean["split_rate"] == direct.split_rate
    assert agg.std["mean_energy"] == 0


def test_sweep_order_independent():
    sc = star_scenario([DemandSpec.uniform(200, 3000)] * 4, rounds=40)
    a = sweep(sc, [3, 1, 2, 9])
    b = sweep(sc, [9, 2, 1, 3])
    assert a == b and a.to_csv() == b.to_csv()


def test_sweep_deterministic_demand_zero_std(deterministic_scenario):
    agg = sweep(deterministic_scenario, [1, 2])
    assert all(v == 0 for v in agg.std.values())


def test_sweep_parallel_matches_serial():
    sc = star_scenario([DemandSpec.uniform(200, 3000)] * 4, rounds=30)
    assert sweep(sc, [1, 2, 3], workers=2) == sweep(sc, [1, 2, 3])


def test_sweep_rejects_bad_seed_lists(deterministic_scenario):
    with pytest.raises(ValueError):
        sweep(deterministic_scenario, [])
    with pytest.raises(ValueError):
        sweep(deterministic_scenario, [1, 1])


def test_sweep_error_tagged_by_seed(deterministic_scenario):
    with pytest.raises(SweepError) as err:
        sweep(deterministic_scenario, [1, -4])
    assert err.value.seed == -4

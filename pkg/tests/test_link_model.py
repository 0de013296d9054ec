import math

import pytest
from hypothesis import assume, given, strategies as st

from coopsim.link_model import (
    AsymptoticCapacityViolated,
    LinkClass,
    NetworkParams,
    TransferRequest,
    UnusableLink,
    bits_per_slot,
    classify_link,
    slots_required,
)
from coopsim.topology import Link, LinkKind

from oracles import ceil_div_exact


def link(rc, rd):
    return Link("e", ("a", "b"), LinkKind.WIFI, rc, rd)


B0_1000 = NetworkParams(c0=100.0, tau0=10.0)


def test_b0():
    assert B0_1000.b0 == 1000.0


def test_bits_per_slot_examples():
    assert bits_per_slot(B0_1000, link(0.5, 0.2)) == pytest.approx(400.0, rel=1e-15)
    assert bits_per_slot(B0_1000, link(0.37, 1.0)) == 0.0
    assert bits_per_slot(B0_1000, link(1.0, 0.0)) == 1000.0


def test_asymptotic_capacity_rejects_full_rho():
    params = NetworkParams(100.0, 10.0, c0_is_asymptotic=True)
    with pytest.raises(AsymptoticCapacityViolated):
        bits_per_slot(params, link(1.0, 0.2))
    assert bits_per_slot(params, link(0.99, 0.0)) == pytest.approx(990.0)


@pytest.mark.parametrize("c0, tau0", [(0, 1), (1, 0), (-1, 1), (float("nan"), 1)])
def test_network_params_validated(c0, tau0):
    with pytest.raises(ValueError):
        NetworkParams(c0, tau0)


@pytest.mark.parametrize("rd, expected", [
    (1.0, LinkClass.USELESS),
    (0.0, LinkClass.NEAR_IMPOSSIBLE),
    (0.3, LinkClass.USABLE),
])
def test_classify(rd, expected):
    assert classify_link(link(0.5, rd)) is expected


@pytest.mark.parametrize("payload, per_slot, expected", [(1000, 400, 3), (800, 400, 2), (1, 400, 1)])
def test_slots_required_examples(payload, per_slot, expected):
    assert slots_required(per_slot, TransferRequest(payload)) == expected
    assert slots_required(per_slot, payload) == expected


def test_zero_capacity_is_unusable():
    with pytest.raises(UnusableLink):
        slots_required(0.0, TransferRequest(10))


@pytest.mark.parametrize("bad", [0, -3, 1.5])
def test_transfer_request_validation(bad):
    with pytest.raises(ValueError):
        TransferRequest(bad)


@given(st.floats(1.0, 1e9), st.floats(1e-3, 1),
       st.floats(0, 0.999), st.integers(1, 10**12))
def test_exactness_bracket(b0, rc, rd, payload):
    per_slot = bits_per_slot(NetworkParams(b0, 1.0), link(rc, rd))
    assume(per_slot > 0)
    k = slots_required(per_slot, payload)
    assert k >= 1
    assert (k - 1) * per_slot < payload <= k * per_slot
    # within one slot of the exact rational ceiling
    assert abs(k - ceil_div_exact(payload, per_slot)) <= 1


@given(st.floats(1e-3, 1e6), st.floats(1e-3, 1e6), st.integers(1, 10**9), st.integers(1, 10**9))
def test_slots_monotone(s1, s2, p1, p2):
    lo, hi = sorted((s1, s2))
    plo, phi = sorted((p1, p2))
    assert slots_required(hi, p1) <= slots_required(lo, p1)
    assert slots_required(s1, plo) <= slots_required(s1, phi)


@given(st.floats(1e-3, 1e6), st.floats(1e-6, 1e6), st.floats(1e-6, 1),
       st.floats(0, 1), st.floats(1e-3, 1e3))
def test_matches_raw_capacity_delay_form(c0, tau0, rc, rd, k):
    # C_ij * (tau0 - tau_ij) with C_ij = c0*rc and tau_ij = rd*tau0
    params = NetworkParams(c0, tau0)
    b = bits_per_slot(params, link(rc, rd))
    # 1 - rd cancels near rd = 1, so the bound is absolute in units of c0*rc*tau0
    assert b == pytest.approx((c0 * rc) * (tau0 - rd * tau0), rel=1e-12, abs=1e-14 * c0 * rc * tau0)
    scaled = bits_per_slot(NetworkParams(c0 * k, tau0), link(rc, rd))
    assert scaled == pytest.approx(k * b, rel=1e-12, abs=1e-300)


@given(st.floats(0.01, 1), st.floats(0, 1))
def test_useless_iff_zero_bits(rc, rd):
    lk = link(rc, rd)
    assert (classify_link(lk) is LinkClass.USELESS) == (bits_per_slot(B0_1000, lk) == 0.0)


def test_linear_in_capacity_affine_in_delay():
    base = bits_per_slot(B0_1000, link(0.2, 0.3))
    assert bits_per_slot(B0_1000, link(0.4, 0.3)) == pytest.approx(2 * base)
    vals = [bits_per_slot(B0_1000, link(0.5, d)) for d in (0.1, 0.2, 0.3)]
    assert vals[0] - vals[1] == pytest.approx(vals[1] - vals[2])
    assert math.isclose(vals[0], 450.0)

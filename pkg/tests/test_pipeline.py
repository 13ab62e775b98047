import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mavcodesign.pipeline import (
    PipelineTiming,
    ResponseProfile,
    Scheduling,
    avg_velocity,
    dv_max_dresponse,
    mission_time,
    response_profile,
    sa_latency,
    stopping_distance,
    v_max_bound,
    v_max_sequential,
    worst_case_clearance,
)

SEQ, PIPE = Scheduling.SEQUENTIAL, Scheduling.PIPELINED


def bisect_vmax(a, d, r):
    """Oracle: root of d - v r - v^2/(2a) = 0 on v >= 0 by bisection."""
    lo, hi = 0.0, math.sqrt(2 * a * d) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if d - mid * r - mid * mid / (2 * a) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize(
    "stages, expected",
    [((0.1, 0.3, 0.05), 0.45), ((0, 0, 0.02), 0.02), ((0.243, 0, 0), 0.243)],
)
def test_sa_latency(stages, expected):
    assert sa_latency(PipelineTiming(*stages)) == pytest.approx(expected, abs=1e-15)


def test_response_sequential():
    p = response_profile(PipelineTiming(0.1, 0.3, 0.05, SEQ))
    assert p.response_s == pytest.approx(0.90)
    assert p.blind_s == pytest.approx(0.45)


def test_response_pipelined():
    p = response_profile(PipelineTiming(0.1, 0.3, 0.05, PIPE))
    assert p.blind_s == pytest.approx(0.30)
    assert p.response_s == pytest.approx(0.75)
    assert p.sa_throughput_hz == pytest.approx(1 / 0.3)


def test_measured_profile_matches_table_total():
    p = ResponseProfile.from_measured(0.243, 13.3)
    assert round(p.response_s, 3) == 0.318


def test_all_zero_stages_rejected():
    with pytest.raises(ValueError):
        response_profile(PipelineTiming(0, 0, 0))


def test_negative_stage_rejected():
    with pytest.raises(ValueError):
        PipelineTiming(-0.1, 0.2, 0.1)


@pytest.mark.parametrize("sched", [SEQ, PIPE])
@given(stages=st.tuples(*[st.floats(0, 2)] * 3).filter(lambda s: max(s) > 1e-6))
def test_blind_times_throughput_is_one(sched, stages):
    p = response_profile(PipelineTiming(*stages, sched))
    assert p.blind_s * p.sa_throughput_hz == pytest.approx(1.0, rel=1e-15)
    assert p.response_s == p.sa_latency_s + p.blind_s


def test_vmax_anchor_values():
    assert v_max_bound(9.8, 6.98, 0) == pytest.approx(11.70, abs=0.005)
    assert v_max_bound(2.21, 6.98, 0) == pytest.approx(5.6, abs=0.15)
    assert v_max_bound(5.28, 6.98, 0.650) == pytest.approx(5.81, abs=0.01)
    assert v_max_bound(3.0, 0.0, 0.0) == 0.0


def test_vmax_zero_response_is_sqrt_2ad():
    for a, d in [(9.8, 6.98), (1.234, 0.5), (20.0, 100.0)]:
        assert v_max_bound(a, d, 0.0) == math.sqrt(2 * a * d)


def test_vmax_errors():
    with pytest.raises(ValueError):
        v_max_bound(float("nan"), 1, 1)
    with pytest.raises(ValueError):
        v_max_bound(1, float("inf"), 1)
    with pytest.raises(ValueError):
        v_max_bound(0, 1, 1)


@settings(max_examples=300)
@given(
    a=st.floats(0.1, 30), d=st.floats(0.1, 50), r=st.floats(0, 5),
)
def test_vmax_root_identity_and_oracle(a, d, r):
    v = v_max_bound(a, d, r)
    assert d - v * r == pytest.approx(v * v / (2 * a), rel=1e-9, abs=1e-12)
    assert v == pytest.approx(bisect_vmax(a, d, r), rel=1e-9)


def test_vmax_monotonicity_on_grids():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a, d = rng.uniform(0.5, 20), rng.uniform(0.5, 30)
        rs = np.sort(rng.uniform(0.01, 4, 20))
        vs = [v_max_bound(a, d, r) for r in rs]
        assert all(x > y for x, y in zip(vs, vs[1:]))
        ds = np.sort(rng.uniform(0.5, 30, 20))
        vd = [v_max_bound(a, dd, 0.3) for dd in ds]
        assert all(x < y for x, y in zip(vd, vd[1:]))
        As = np.sort(rng.uniform(0.5, 20, 20))
        va = [v_max_bound(aa, d, 0.3) for aa in As]
        assert all(x < y for x, y in zip(va, va[1:]))


@given(a=st.floats(0.1, 30), d=st.floats(0.1, 50), lat=st.floats(1e-3, 3))
def test_sequential_consistency(a, d, lat):
    assert v_max_bound(a, d, 2 * lat) == v_max_sequential(a, d, lat)


def test_pipelined_dominates_sequential():
    rng = np.random.default_rng(3)
    for _ in range(100):
        stage = rng.uniform(0.01, 1.0)
        a, d = rng.uniform(1, 15), rng.uniform(1, 20)
        seq = response_profile(PipelineTiming(stage, stage, stage, SEQ))
        pipe = response_profile(PipelineTiming(stage, stage, stage, PIPE))
        assert seq.sa_latency_s == pipe.sa_latency_s
        assert pipe.response_s <= seq.response_s
        assert v_max_bound(a, d, pipe.response_s) >= v_max_bound(a, d, seq.response_s)


def test_derivative_against_central_difference():
    a, d, r, h = 5.28, 6.98, 0.65, 1e-6
    fd = (v_max_bound(a, d, r + h) - v_max_bound(a, d, r - h)) / (2 * h)
    assert dv_max_dresponse(a, d, r) == pytest.approx(fd, rel=1e-6)


def test_stopping_distance():
    assert stopping_distance(11.70, 9.8) == pytest.approx(6.98, abs=0.005)
    assert stopping_distance(0, 5) == 0
    assert stopping_distance(10, 5) == 10
    with pytest.raises(ValueError):
        stopping_distance(1, 0)


def test_clearance_closes_the_loop():
    profile = response_profile(PipelineTiming(0.2, 0.3, 0.1, PIPE))
    a = 7.0
    v = v_max_bound(a, 6.98, profile.response_s)
    assert worst_case_clearance(6.98, v, profile) == pytest.approx(stopping_distance(v, a), abs=1e-9)


def test_clearance_simple():
    p = ResponseProfile(0.1, 10.0, 0.1, 0.2)
    assert worst_case_clearance(10, 0, p) == 10
    assert worst_case_clearance(1, 10, p) == pytest.approx(-1)


def test_avg_velocity():
    assert avg_velocity(11.7, 4) == pytest.approx(2.925)
    assert avg_velocity(5, 1) == 5
    assert avg_velocity(0, 3) == 0
    with pytest.raises(ValueError):
        avg_velocity(5, 0.5)


@pytest.mark.parametrize(
    "v, paper", [(11.7, 341), (5.6, 713), (5.81, 686)]
)
def test_mission_time_anchors(v, paper):
    t = mission_time(1000, avg_velocity(v, 4))
    assert t == pytest.approx(paper, rel=0.01)


def test_mission_time_exact_composition():
    L, v, s = 1000.0, 7.3, 3.0
    assert mission_time(L, avg_velocity(v, s)) == pytest.approx(L * s / v, rel=1e-15)
    with pytest.raises(ValueError):
        mission_time(100, 0)

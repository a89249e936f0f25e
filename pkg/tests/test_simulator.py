import math

import numpy as np
import pytest

from commuteq import (
    DepartureProfile,
    Segment,
    ValidationError,
    equilibrium,
    realized_cost,
    simulate,
    verify,
)
from commuteq import reserved
from commuteq.simulator import build_profile

from conftest import base_params


def test_empty_profile(P0):
    trace = simulate(P0, DepartureProfile((), 0.0, 0.0))
    assert trace.queue_at(500.0) == 0.0
    assert trace.realized_cost("efhv", P0.t_star) == pytest.approx(P0.W)


def test_on_time_rider_with_empty_queue_costs_w_only(P0):
    # a rider hitting an idle bottleneck exactly at t* pays the fixed cost alone
    trace = simulate(P0, DepartureProfile((), 0.0, 0.0))
    assert realized_cost(trace, "efhv", P0.t_star) == pytest.approx(P0.W)
    assert realized_cost(trace, "efhv", P0.t_star - 10.0) == pytest.approx(P0.W + 10.0 * P0.beta)


def test_profile_validation():
    with pytest.raises(ValidationError):
        DepartureProfile((Segment(0.0, 10.0, auto_rate=5.0, efhv_rate=5.0),), 50.0, 50.0)
    with pytest.raises(ValidationError):
        DepartureProfile((Segment(0.0, 10.0, auto_rate=5.0),
                          Segment(5.0, 15.0, auto_rate=5.0)), 100.0, 0.0)
    with pytest.raises(ValidationError):
        DepartureProfile((Segment(0.0, 10.0, auto_rate=-1.0),), -10.0, 0.0)
    with pytest.raises(ValidationError):
        DepartureProfile((Segment(0.0, 10.0, auto_rate=5.0),), 51.0, 0.0)


def test_queue_evolution_simple(P0):
    # 30 veh/min over capacity for 10 min, then drain at full capacity
    prof = DepartureProfile((Segment(0.0, 10.0, auto_rate=230.0),), 2300.0, 0.0,
                            autos_reserved=True)
    trace = simulate(P0, prof)
    assert trace.queue_at(10.0) == pytest.approx(300.0)
    assert trace.queue_at(11.5) == pytest.approx(0.0)
    assert trace.cum_exit[-1] == pytest.approx(2300.0)
    assert trace.exit_time(10.0) == pytest.approx(11.5)


def test_fifo_and_conservation(P0):
    out = equilibrium(P0, M=50000.0, reserved=True)
    trace = simulate(P0, out.profile)
    times = np.linspace(*out.profile.span, 200)
    exits = trace.exit_time(times)
    assert np.all(np.diff(exits) >= -1e-9)
    assert trace.cum_exit[-1] == pytest.approx(50000.0, rel=1e-12)


def test_refinement_invariance(P0):
    out = reserved.solve(P0, 68643.0, 10000.0)
    a = simulate(P0, out.profile)
    b = simulate(P0, out.profile.split_in_half())
    ts = np.union1d(a.breakpoints, b.breakpoints)
    assert np.allclose(a.queue_at(ts), b.queue_at(ts), atol=1e-9)
    assert np.allclose(a.entries_at(ts), b.entries_at(ts), atol=1e-9)
    assert np.allclose(a.realized_cost("auto", ts), b.realized_cost("auto", ts), atol=1e-9)


def test_every_driver_realizes_the_closed_form_cost(P0):
    out = equilibrium(P0, M=50000.0, reserved=True)
    trace = simulate(P0, out.profile)
    times = np.linspace(*out.profile.span, 500)
    costs = trace.realized_cost("auto", times)
    assert np.max(np.abs(costs - 24.9)) <= 1e-6


def test_search_time_accumulator():
    p = base_params(eps=2.0)
    out = equilibrium(p, M=60000.0, reserved=False)
    trace = simulate(p, out.profile)
    t_first, t_last = out.profile.span
    assert trace.search_time(t_first) == pytest.approx(p.S0)
    assert trace.search_time(t_last) == pytest.approx(p.S0 + p.eps)
    # reserved autos never accrue the competition term
    out_r = equilibrium(p, M=50000.0, reserved=True)
    trace_r = simulate(p, out_r.profile)
    assert trace_r.search_time(out_r.profile.span[1]) == pytest.approx(p.S0)


def test_shifted_profile_fails_verification(P0):
    out = reserved.solve(P0, 50000.0, 10000.0)
    segs = []
    for seg in out.profile.segments:
        if seg.auto_rate > 0:
            segs.append(Segment(seg.start + 5.0, seg.end + 5.0, auto_rate=seg.auto_rate))
        else:
            segs.append(seg)
    shifted = DepartureProfile(tuple(segs), out.profile.n_auto, out.profile.n_efhv,
                               autos_reserved=True)
    report = verify(P0, out, profile=shifted)
    assert not report.passed
    assert report.auto_spread_rel > 1e-6


def test_build_profile_returns_validated_copy(P0):
    out = equilibrium(P0, M=50000.0, reserved=True)
    prof = build_profile(P0, out)
    assert prof.segments == out.profile.segments
    with pytest.raises(Exception):
        build_profile(P0, object())


def test_queue_zeros_reporting(P0):
    prof = DepartureProfile(
        (Segment(0.0, 10.0, auto_rate=230.0), Segment(20.0, 30.0, auto_rate=230.0)),
        4600.0, 0.0, autos_reserved=True)
    trace = simulate(P0, prof)
    zeros = trace.queue_zeros(0.0, trace.breakpoints[-1])
    assert len(zeros) == 1
    assert 11.5 <= zeros[0] <= 20.0


def test_trace_csv(tmp_path, P0):
    out = equilibrium(P0, M=50000.0, reserved=True)
    path = tmp_path / "trace.csv"
    simulate(P0, out.profile).write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema: commuteq.trace.v1"
    assert lines[1] == "t,cum_entry_auto,cum_entry_efhv,cum_exit,queue"
    assert len(lines) >= 4

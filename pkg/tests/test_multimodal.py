import math

import numpy as np
import pytest

from commuteq import (
    NoConsistentPattern,
    Pattern,
    PrecondModeMix,
    PrecondViolation,
    ScenarioParams,
    derive,
    simulate,
    solve,
    system_cost_delta,
    total_road_users,
    validate,
    verify,
)

from conftest import base_params, draw_road_scenario


def test_total_road_users(P1):
    dc = derive(P1, 0.0)
    assert dc.K == pytest.approx(4.88)
    assert total_road_users(P1) == pytest.approx(68657.14, abs=0.01)


def test_total_road_users_requires_both_modes(P0):
    with pytest.raises(PrecondModeMix):
        total_road_users(P0.with_(W=4.6))   # exactly W0: driving dominated


def test_total_road_users_scale_invariant(P1):
    from commuteq import scale_money
    assert total_road_users(scale_money(P1, 2.0)) == pytest.approx(
        total_road_users(P1), rel=1e-12)


def test_requires_binding_parking(P1):
    with pytest.raises(PrecondViolation):
        solve(P1, M=70000.0)


def test_pattern_j(P0):
    out = solve(P0, M=30000.0)
    assert out.pattern is Pattern.j
    assert out.NC == 0.0
    assert out.NF == pytest.approx(70000.0)
    assert out.P == pytest.approx(31.0)
    assert out.TC == pytest.approx(3.1e6)
    assert out.oversupply == pytest.approx(30000.0)
    assert verify(P0, out).passed


def test_never_clears_family(P1):
    out = solve(P1, M=10000.0)
    assert out.pattern in (Pattern.a, Pattern.c, Pattern.e, Pattern.f, Pattern.g, Pattern.h)
    assert out.P == pytest.approx(32.343, abs=1e-3)
    assert out.NC + out.NF == pytest.approx(68657.14, abs=0.01)
    assert out.NC == pytest.approx(10000.0)
    assert verify(P1, out).passed


def test_cleared_gap_family(P1):
    out = solve(P1, M=2000.0)
    assert out.pattern in (Pattern.b, Pattern.d)
    assert out.P == pytest.approx(32.571, abs=1e-3)
    assert out.NF == pytest.approx(66428.6, abs=0.1)
    assert verify(P1, out).passed


def test_oversupply_pattern(P1):
    out = solve(P1, M=60000.0)
    assert out.pattern is Pattern.g
    assert out.NC < 60000.0
    assert out.oversupply > 0.0
    assert out.P == pytest.approx(32.343, abs=1e-3)   # same level: supply-independent
    assert verify(P1, out).passed


def test_drivers_only_pattern(P0):
    p = P0.with_(W=80.0)
    out = solve(p, M=30000.0)
    assert out.pattern is Pattern.i
    assert out.NF == 0.0
    assert out.P == pytest.approx(p.transit_cost(p.N - 30000.0))
    assert out.delta == pytest.approx(0.0)
    assert verify(p, out).passed


def test_pattern_d_directed():
    # queue clears before the first rider while the car wave spills past
    # its on-time departure: needs a thin cost premium over W
    p = validate(ScenarioParams(alpha=0.8, beta=0.5, gamma=1.0, s=100.0,
                                theta=0.001, R=1.0, F=2.0, W=6.0, S0=8.0,
                                eps=0.0, N=10000.0, t_star=540.0))
    out = solve(p, M=300.0)
    assert out.pattern is Pattern.d
    assert verify(p, out).passed


def test_lemma_33_supply_independence(P1):
    costs = [solve(P1, M=m).P for m in (5000.0, 10000.0, 20000.0)]
    assert max(costs) - min(costs) <= 1e-9 * max(costs)


def test_lemma_31_no_simultaneous_departures(P1):
    for m in (2000.0, 10000.0, 60000.0):
        profile = solve(P1, M=m).profile
        for seg in profile.segments:
            assert not (seg.auto_rate > 0 and seg.efhv_rate > 0)


def test_lemma_32_no_profitable_late_auto(P1):
    # after the parity time, a marginal driver can never undercut the
    # equilibrium cost (free spaces exist in this pattern, so the probe is live)
    out = solve(P1, M=60000.0)
    assert out.pattern is Pattern.g
    trace = simulate(P1, out.profile)
    t2, t4 = out.timeline.t2, out.timeline.t4
    probes = np.linspace(t2, t4 + 30.0, 500)
    costs = trace.realized_cost("auto", probes)
    assert costs.min() >= out.P - 1e-6 * out.P


def test_cleared_gap_cost_floor(P1):
    # P in the cleared-gap family decreases in M down to the never-idle level,
    # reached exactly at the mu2 threshold
    dc = derive(P1, 0.0)
    floor = P1.transit_cost(P1.N - dc.N0)
    for m in (500.0, 1500.0, 2799.0):
        assert solve(P1, M=m).P >= floor - 1e-9
    at_threshold = solve(P1, M=dc.mu2).P
    assert at_threshold == pytest.approx(floor, rel=1e-12)


def test_delta_examples(P0, P1):
    assert system_cost_delta(P0, M=30000.0) == pytest.approx(-4.0e6)
    out = solve(P1, M=2000.0)
    expected = (P1.transit_cost(P1.N - 2000.0 - out.NF)
                - P1.transit_cost(P1.N - 2000.0)) * P1.N
    assert out.delta == pytest.approx(expected, rel=1e-9)
    assert out.delta < 0.0
    assert "delta < 0" in out.delta_note


def test_timeline_ordering(P1):
    out = solve(P1, M=10000.0)
    tl = out.timeline
    assert tl.t1 < tl.tcl <= tl.t2 < tl.t4
    assert tl.t3c < tl.t3f


def test_eps_positive_patterns():
    p = base_params(eps=1.0, W=6.0)
    for m in (2000.0, 10000.0, 60000.0):
        out = solve(p, M=m)
        assert verify(p, out).passed, (m, out.pattern)


def test_eps_positive_below_congested_threshold_is_degenerate():
    # W in (W0, W1] with eps > 0: the NC-normalized search model has no
    # consistent pattern; the solver reports that instead of fabricating one
    p = base_params(eps=1.0, W=4.7)
    with pytest.raises(NoConsistentPattern):
        solve(p, M=10000.0)


def test_outcome_conservation(P1):
    for m in (2000.0, 10000.0, 60000.0):
        out = solve(P1, M=m)
        assert out.NC + out.NF + out.NT == pytest.approx(P1.N, rel=1e-12)
        assert out.NC <= m + 1e-9
        assert out.P == pytest.approx(P1.transit_cost(out.NT), rel=1e-12)

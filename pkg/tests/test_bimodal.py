import numpy as np
import pytest

from commuteq import (
    DivisionByZeroPopulation,
    auto_cost,
    departure_rates,
    derive,
    equilibrium,
    simulate,
    transit_cost,
    verify,
)

from conftest import base_params, draw_road_scenario


def test_departure_rates_eps_zero(P0):
    r1, r2 = departure_rates(P0, 12345.0)
    assert r1 == pytest.approx(300.0)
    assert r2 == pytest.approx(85.714, abs=1e-3)
    # with eps = 0 the rates reduce to the reserved forms for any NC
    assert departure_rates(P0, 1.0) == (r1, r2)


def test_departure_rates_with_search_congestion():
    p = base_params(eps=2.0)
    r1, r2 = departure_rates(p, 400.0)   # congestion factor 1 + s*eps/NC = 2
    assert r1 == pytest.approx(150.0)
    assert r2 == pytest.approx(42.857, abs=1e-3)
    with pytest.raises(DivisionByZeroPopulation):
        departure_rates(p, 0.0)


def test_rate_bounds():
    rng = np.random.default_rng(3)
    for _ in range(40):
        p, m = draw_road_scenario(rng)
        r1, r2 = departure_rates(p, max(m, 1.0))
        assert r2 < p.s
        if p.eps == 0.0:
            assert r1 > p.s > r2


def test_auto_cost_examples(P0):
    nc0 = derive(P0, 0.0).NC0
    assert auto_cost(P0, nc0) == pytest.approx(32.357, abs=1e-3)
    assert auto_cost(P0, 0.0) == pytest.approx(4.9)
    # all-reserved cost at the virtual demand coincides with the eps-free form
    assert equilibrium(P0, M=68643.0, reserved=True).P_auto == pytest.approx(32.357, abs=1e-3)


def test_transit_cost_examples(P0):
    assert transit_cost(P0, 31357.0) == pytest.approx(32.357)
    assert transit_cost(P0, 0.0) == pytest.approx(1.0)
    assert transit_cost(P0, 50000.0) == pytest.approx(51.0)


def test_cost_parity_at_virtual_demand():
    for eps in (0.0, 2.0):
        p = base_params(eps=eps)
        nc0 = derive(p, 0.0).NC0
        assert auto_cost(p, nc0) == pytest.approx(transit_cost(p, p.N - nc0), rel=1e-9)


def test_equilibrium_unconstrained_reserved(P0):
    out = equilibrium(P0, M=68643.0, reserved=True)
    assert not out.binding
    assert out.NC == pytest.approx(68642.86, abs=0.01)
    assert out.P_auto == pytest.approx(out.P_transit, rel=1e-9)
    assert out.TC == pytest.approx(3.236e6, rel=1e-3)


def test_equilibrium_binding_reserved(P0):
    out = equilibrium(P0, M=50000.0, reserved=True)
    assert out.binding
    assert out.P_auto == pytest.approx(24.9)
    assert out.P_transit == pytest.approx(51.0)
    assert out.TC == pytest.approx(3.795e6, rel=1e-6)
    assert out.P_auto <= out.P_transit + 1e-9


def test_equilibrium_binding_nonreserved(P0):
    out = equilibrium(P0, M=50000.0, reserved=False)
    assert out.binding
    assert out.P_auto == pytest.approx(51.0)
    assert out.P_transit == pytest.approx(51.0)
    assert out.TC == pytest.approx(5.1e6, rel=1e-9)


def test_reserved_never_costlier_than_nonreserved():
    rng = np.random.default_rng(5)
    for _ in range(30):
        p, m = draw_road_scenario(rng)
        nc0_reserved = derive(p.with_(eps=0.0), 0.0).NC0
        m = min(m, 0.95 * nc0_reserved)
        res = equilibrium(p, M=m, reserved=True)
        non = equilibrium(p, M=m, reserved=False)
        assert res.TC <= non.TC + 1e-6 * non.TC


@pytest.mark.parametrize("reserved_flag,M", [
    (True, 68643.0), (True, 50000.0), (False, 50000.0), (False, 68643.0),
])
def test_simulator_cross_check(P0, reserved_flag, M):
    out = equilibrium(P0, M=M, reserved=reserved_flag)
    report = verify(P0, out)
    assert report.passed, report.messages
    assert report.auto_spread_rel <= 1e-6
    assert report.deviation_margin_rel >= -1e-6


def test_simulator_cross_check_with_search_time():
    p = base_params(eps=2.0)
    for M, flag in ((70000.0, False), (60000.0, False), (50000.0, True)):
        out = equilibrium(p, M=M, reserved=flag)
        report = verify(p, out)
        assert report.passed, (M, flag, report.messages)


def test_first_driver_cost_matches_closed_form(P0):
    # first departure bears only the early penalty plus search and fee
    out = equilibrium(P0, M=50000.0, reserved=True)
    trace = simulate(P0, out.profile)
    t1 = out.profile.span[0]
    assert trace.realized_cost("auto", t1) == pytest.approx(24.9, abs=1e-6)

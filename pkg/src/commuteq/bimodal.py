"""Two-mode benchmark: private autos with parking demand versus transit.

No ride-sourcing here.  Drivers trade bottleneck queueing against
schedule delay and, without a reservation, against parking-search time
that grows as spaces fill.  The mode split equalizes door-to-door
costs unless the parking stock binds first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import DivisionByZeroPopulation, PrecondViolation
from .scenario import ScenarioParams, virtual_parking_demand
from .simulator import DepartureProfile, Segment

__all__ = ["BimodalOutcome", "departure_rates", "auto_cost", "transit_cost", "equilibrium"]


def departure_rates(p: ScenarioParams, NC: float) -> tuple[float, float]:
    """Equilibrium auto arrival rates at the bottleneck (early, late).

    The search-congestion factor 1 + s*eps/NC throttles both rates;
    with eps = 0 they reduce to s*alpha/(alpha-beta) and
    s*alpha/(alpha+gamma).
    """
    if p.eps > 0.0 and NC <= 0.0:
        raise DivisionByZeroPopulation(
            "search congestion is undefined for an empty driver population"
        )
    rho = 1.0 + p.s * p.eps / NC if p.eps > 0.0 else 1.0
    r_c1 = p.s * p.alpha / ((p.alpha - p.beta) * rho)
    r_c2 = p.s * p.alpha / ((p.alpha + p.gamma) * rho)
    return r_c1, r_c2


def auto_cost(p: ScenarioParams, NC: float) -> float:
    """Equilibrium commute cost of NC drivers without a parking cap."""
    b, g = p.beta, p.gamma
    return (
        b * g / (b + g) * NC / p.s
        + p.alpha * p.S0
        + b * (p.alpha + g) / (b + g) * p.eps
        + p.F
    )


def transit_cost(p: ScenarioParams, NT: float) -> float:
    """Fare plus crowding: R + theta * NT."""
    return p.transit_cost(NT)


@dataclass(frozen=True)
class BimodalOutcome:
    NC: float
    NT: float
    P_auto: float
    P_transit: float
    TC: float
    binding: bool
    reserved: bool
    rates: tuple[float, float]
    M: float
    profile: DepartureProfile

    @property
    def expected_auto_cost(self) -> float:
        return self.P_auto

    expected_efhv_cost = None
    efhv_available = False

    @property
    def parking_binding(self) -> bool:
        # reserved drivers may re-time freely; unreserved ones cannot enter
        # once all spaces are claimed, which blocks time deviations too
        return self.binding and not self.reserved


def equilibrium(p: ScenarioParams, M: Optional[float] = None, reserved: bool = False) -> BimodalOutcome:
    """Bi-modal user equilibrium at parking stock M.

    With M at or above the virtual demand the split equalizes costs.
    Below it, exactly M commuters drive; with reserved spaces they keep
    the low all-reserved cost, without reservation the scramble for
    spaces pushes every road user up to the transit cost level.
    """
    if M is None:
        M = p.M
    if M is None:
        raise PrecondViolation("bimodal equilibrium needs a parking supply M")
    if M < 0:
        raise PrecondViolation(f"M must be >= 0, got {M}")

    p_eff = replace(p, eps=0.0) if reserved else p
    nc0 = min(max(virtual_parking_demand(p_eff), 0.0), p.N)

    if M >= nc0:
        nc = nc0
        pa = auto_cost(p_eff, nc)
        pt = transit_cost(p, p.N - nc)
        binding = False
    else:
        nc = M
        pt = transit_cost(p, p.N - M)
        pa = auto_cost(p_eff, M) if reserved else pt
        binding = True

    nt = p.N - nc
    tc = pa * nc + pt * nt
    profile = _profile(p_eff, nc, pa)
    rates = departure_rates(p_eff, nc) if nc > 0 or p_eff.eps == 0.0 else (math.nan, math.nan)
    return BimodalOutcome(
        NC=nc, NT=nt, P_auto=pa, P_transit=pt, TC=tc,
        binding=binding, reserved=reserved, rates=rates, M=M, profile=profile,
    )


def _profile(p: ScenarioParams, nc: float, P: float) -> DepartureProfile:
    """Departure schedule of an auto wave whose drivers all bear cost P.

    The wave runs at the early rate until the on-time departure, then at
    the late rate until nc drivers are out.  At the unconstrained cost
    level the queue vanishes exactly at the last departure; at an
    elevated level (non-reserved binding M) it ends early and leaves a
    draining queue behind.  Either way the segment rates are the exact
    equilibrium rates, so the profile mass check doubles as a closure
    check on the timing formulas.
    """
    if nc <= 0.0:
        return DepartureProfile((), 0.0, 0.0, autos_reserved=(p.eps == 0.0))
    r1, r2 = departure_rates(p, nc)
    w0 = (p.alpha - p.beta) * p.S0 + p.F
    t1 = p.t_star - (P - w0) / p.beta
    t3c = p.t_star - (P - p.F) / p.alpha
    if t3c < t1 - 1e-9:
        raise PrecondViolation(
            "auto wave would start after its on-time departure: cost level too low"
        )
    early_cap = r1 * (t3c - t1)
    if nc <= early_cap:
        segments = (Segment(t1, t1 + nc / r1, auto_rate=r1),)
    else:
        tcl = t3c + (nc - early_cap) / r2
        segments = (
            Segment(t1, t3c, auto_rate=r1),
            Segment(t3c, tcl, auto_rate=r2),
        )
    return DepartureProfile(segments, n_auto=nc, n_efhv=0.0, autos_reserved=(p.eps == 0.0))

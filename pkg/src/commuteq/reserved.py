"""Finite ride-sourcing fleet with fully reserved parking.

Regime assumptions: riding beats driving pointwise (W <= W0), every
parking space is reserved (eps = 0), the fleet NF is below its virtual
demand, and parking is scarce (supply above the virtual demand NC0 is
capped, the excess can never be occupied).

Riders book first and depart in one early wave; permit holders follow
after a gap.  Two cost cases arise:

* case i  (Scenario 1): the rider queue fully drains before the first
  driver arrives, so the bottleneck idles in between and the driver
  wave is a self-contained rush.
* case ii (Scenarios 2 and 3): drivers push in while rider traffic is
  still queued; the bottleneck never rests between the waves.

Scenario 3 is case ii with some riders arriving late.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InconsistentOutcome, PrecondViolation
from .scenario import DerivedConstants, ScenarioParams, derive
from .simulator import DepartureProfile, Segment

__all__ = [
    "ReservedOutcome",
    "classify",
    "auto_count",
    "class_costs",
    "timeline",
    "total_cost",
    "solve",
    "tc_case_i",
    "tc_case_ii",
]

_TINY = 1e-9


@dataclass(frozen=True)
class ReservedOutcome:
    scenario: str          # "S1" | "S2" | "S3"
    cost_case: str         # "i" | "ii"
    NC: float
    NF: float
    NT: float
    Pr: float
    Pf: float
    TC: float
    timeline: tuple[float, float, float, float]   # (t1, tfl, t2, t4)
    M: float
    idle_spaces: float
    profile: DepartureProfile
    notes: tuple[str, ...] = ()

    @property
    def expected_auto_cost(self) -> Optional[float]:
        return self.Pr if self.NC > 0 else None

    @property
    def expected_efhv_cost(self) -> Optional[float]:
        return self.Pf if self.NF > 0 else None

    # permit holders may re-time freely, so auto deviations stay priced;
    # the fleet is fully booked, so there is no marginal ride to deviate to
    parking_binding = False
    efhv_available = False


def _context(p: ScenarioParams, M: Optional[float], NF: Optional[float]):
    M = p.M if M is None else M
    NF = p.NF if NF is None else NF
    if M is None or NF is None:
        raise PrecondViolation("reserved-regime operations need both M and NF")
    if M < 0 or NF < 0:
        raise PrecondViolation(f"M and NF must be >= 0, got M={M}, NF={NF}")
    if p.eps != 0.0:
        raise PrecondViolation(f"reserved parking requires eps = 0, got eps={p.eps}")
    dc = derive(p, NF)
    if p.W > dc.W0 + _TINY:
        raise PrecondViolation(
            f"regime requires W <= W0 (riding at least as attractive as driving); "
            f"W={p.W}, W0={dc.W0:.6g}"
        )
    if NF > dc.NF0 + _TINY:
        raise PrecondViolation(
            f"fleet NF={NF} exceeds its virtual demand NF0={dc.NF0:.6g}"
        )
    m_eff = min(M, dc.NC0)
    return m_eff, M, NF, dc


@dataclass(frozen=True)
class _Eval:
    NC: float
    Pf: float
    Pr: float
    TC: float
    cost_case: str
    scenario: str
    t1: float


def _evaluate(p: ScenarioParams, m_eff: float, NF: float, dc: DerivedConstants) -> _Eval:
    nc = min(m_eff, dc.M4 if NF <= dc.NF3 else dc.M5)
    nc = max(0.0, nc)
    case_i = NF <= dc.NF3 + _TINY or m_eff <= dc.M2 + _TINY
    pf = p.transit_cost(p.N - NF - nc)
    a, b, g, s = p.alpha, p.beta, p.gamma, p.s
    if case_i:
        pr = b * g / (b + g) * nc / s + a * p.S0 + p.F
    else:
        pr = (g * (p.W * s + b * (nc + NF) - pf * s) / (b * s)
              + (a + g) * p.S0 + p.F)
    tc = pr * nc + pf * (p.N - nc)
    t1 = p.t_star - (pf - p.W) / b
    if case_i:
        scenario = "S1"
    else:
        scenario = "S2" if t1 + NF / s <= p.t_star + _TINY else "S3"
    return _Eval(NC=nc, Pf=pf, Pr=pr, TC=tc, cost_case="i" if case_i else "ii",
                 scenario=scenario, t1=t1)


def classify(p: ScenarioParams, M: Optional[float] = None, NF: Optional[float] = None) -> tuple[str, str]:
    """(scenario, cost case) at the given parking supply and fleet size."""
    m_eff, _, nf, dc = _context(p, M, NF)
    ev = _evaluate(p, m_eff, nf, dc)
    return ev.scenario, ev.cost_case


def auto_count(p: ScenarioParams, M: Optional[float] = None, NF: Optional[float] = None) -> float:
    """Number of drivers: the parking supply or the cost-parity bound, whichever binds."""
    m_eff, _, nf, dc = _context(p, M, NF)
    return _evaluate(p, m_eff, nf, dc).NC


def class_costs(p: ScenarioParams, M: Optional[float] = None, NF: Optional[float] = None) -> tuple[float, float, float]:
    """(driver cost Pr, rider cost Pf, transit cost) at equilibrium."""
    m_eff, _, nf, dc = _context(p, M, NF)
    ev = _evaluate(p, m_eff, nf, dc)
    return ev.Pr, ev.Pf, p.transit_cost(p.N - nf - ev.NC)


def total_cost(p: ScenarioParams, M: Optional[float] = None, NF: Optional[float] = None) -> float:
    """System commute cost Pr*NC + Pf*(N - NC)."""
    m_eff, _, nf, dc = _context(p, M, NF)
    return _evaluate(p, m_eff, nf, dc).TC


def tc_case_i(p: ScenarioParams, NC: float, NF: float) -> float:
    """Case-i system cost as a free function of the driver count."""
    pf = p.transit_cost(p.N - NF - NC)
    pr = p.beta * p.gamma / (p.beta + p.gamma) * NC / p.s + p.alpha * p.S0 + p.F
    return pr * NC + pf * (p.N - NC)


def tc_case_ii(p: ScenarioParams, NC: float, NF: float) -> float:
    """Case-ii system cost as a free function of the driver count."""
    a, b, g, s = p.alpha, p.beta, p.gamma, p.s
    pf = p.transit_cost(p.N - NF - NC)
    pr = g * (p.W * s + b * (NC + NF) - pf * s) / (b * s) + (a + g) * p.S0 + p.F
    return pr * NC + pf * (p.N - NC)


def timeline(p: ScenarioParams, M: Optional[float] = None, NF: Optional[float] = None) -> tuple[float, float, float, float]:
    """(t1, tfl, t2, t4): first rider, last rider, first driver, last driver.

    In Scenario 1 ``tfl`` is the time the last rider clears the
    bottleneck (the idle period starts there); in Scenarios 2 and 3 it
    is the last rider's departure.  ``t2`` always comes from the
    constructive driver wave, which the simulator verifies; the first
    driver is indifferent there by construction.
    """
    out = solve(p, M, NF)
    return out.timeline


def solve(p: ScenarioParams, M: Optional[float] = None, NF: Optional[float] = None) -> ReservedOutcome:
    """Full equilibrium: split, class costs, clock times and profile."""
    m_eff, m_raw, nf, dc = _context(p, M, NF)
    ev = _evaluate(p, m_eff, nf, dc)
    nc, pf, pr = ev.NC, ev.Pf, ev.Pr
    a, b, g, s = p.alpha, p.beta, p.gamma, p.s
    r1 = s * a / (a - b)
    r2 = s * a / (a + g)

    segments: list[Segment] = []
    notes: list[str] = []

    if nc > 0:
        t4 = p.t_star + (pr - (a + g) * p.S0 - p.F) / g
    else:
        t4 = math.nan

    if nf > 0:
        t1 = ev.t1
        t3f = t1 + (p.t_star - t1) * (a - b) / a
        early_riders = s * (p.t_star - t1)
        if nf <= early_riders + _TINY:
            rider_dep_end = t1 + nf / r1
            segments.append(Segment(t1, rider_dep_end, efhv_rate=r1))
        else:
            rider_dep_end = t3f + (nf - early_riders) / r2
            segments.append(Segment(t1, t3f, efhv_rate=r1))
            segments.append(Segment(t3f, rider_dep_end, efhv_rate=r2))
        if ev.scenario == "S1":
            if nf > early_riders + 1e-7:
                raise InconsistentOutcome(
                    "scenario 1 with late rider arrivals should not arise"
                )
            tfl = t1 + nf / s          # last rider clears the bottleneck
        else:
            tfl = rider_dep_end
    elif nc > 0:
        # no riders: the driver rush is the whole morning
        t1 = t4 - nc / s
        tfl = t1
        rider_dep_end = t1
    else:
        t1 = tfl = rider_dep_end = math.nan

    if nc > 0:
        if ev.scenario == "S1":
            t2 = t4 - nc / s
            if nf > 0 and t2 < tfl - 1e-7:
                raise InconsistentOutcome("scenario 1 driver wave overlaps the rider queue")
            t3c_blk = t2 + (p.t_star - p.S0 - t2) * (a - b) / a
            early = r1 * (t3c_blk - t2)
            if early >= nc:
                segments.append(Segment(t2, t2 + nc / r1, auto_rate=r1))
            else:
                segments.append(Segment(t2, t3c_blk, auto_rate=r1))
                segments.append(Segment(t3c_blk, t4, auto_rate=r2))
        else:
            early = s * (p.t_star - p.S0 - t1) - nf
            early = min(max(early, 0.0), nc)
            if early >= nc - _TINY:
                raise InconsistentOutcome("case-ii driver wave cannot arrive fully early")
            t3c_blk = t4 - (nc - early) / r2
            t2 = t3c_blk - early / r1
            if t2 < rider_dep_end - 1e-7:
                raise InconsistentOutcome("driver departures may not overlap rider departures")
            if nf - s * (t2 - t1) < -1e-7:
                raise InconsistentOutcome("case ii requires a live queue at the first driver")
            if early > 0:
                segments.append(Segment(t2, t3c_blk, auto_rate=r1))
                segments.append(Segment(t3c_blk, t4, auto_rate=r2))
            else:
                segments.append(Segment(t2, t4, auto_rate=r2))
    else:
        t2 = math.nan

    profile = DepartureProfile(
        tuple(seg for seg in segments if seg.width > _TINY),
        n_auto=nc, n_efhv=nf, autos_reserved=True,
    )
    if m_eff < (m_raw if m_raw is not None else m_eff):
        notes.append(f"supply {m_raw:.6g} capped at virtual demand {dc.NC0:.6g}")

    return ReservedOutcome(
        scenario=ev.scenario, cost_case=ev.cost_case,
        NC=nc, NF=nf, NT=p.N - nc - nf,
        Pr=pr, Pf=pf, TC=ev.TC,
        timeline=(t1, tfl, t2, t4),
        M=m_raw, idle_spaces=max(0.0, m_raw - nc),
        profile=profile, notes=tuple(notes),
    )

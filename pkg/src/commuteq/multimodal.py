"""Equilibrium with unlimited ride-sourcing supply and scarce, non-reserved parking.

Drivers and ride-sourcing passengers share the bottleneck; transit absorbs
the rest.  Depending on the fixed-cost gap between driving and riding and
on the parking stock M, the morning takes one of ten qualitative shapes,
tagged (a) through (j):

* (a), (g), (h): riding reaches cost parity with driving before parking
  fills; some spaces stay idle.
* (c), (e), (f): parking fills first, the bottleneck keeps a queue, and
  riders take over once their cost falls to the common level.
* (b), (d): parking is so scarce that the queue fully drains before the
  first rider departs; the bottleneck idles in between.
* (i): riding is too expensive, drivers only.
* (j): riding dominates driving outright (W <= W0), riders only.

The solver is constructive: it builds each candidate configuration from
its defining equalities and keeps the one whose feasibility conditions
all hold.  Exact boundary ties are resolved by the fixed precedence
a < b < ... < j and flagged on the outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from scipy.optimize import brentq

from .errors import NoConsistentPattern, PrecondModeMix, PrecondViolation
from .scenario import DerivedConstants, ScenarioParams, derive
from .simulator import DepartureProfile, Segment

__all__ = [
    "Pattern",
    "Timeline",
    "MultimodalOutcome",
    "total_road_users",
    "solve",
    "system_cost_delta",
]

_TINY = 1e-9


class Pattern(str, Enum):
    a = "a"
    b = "b"
    c = "c"
    d = "d"
    e = "e"
    f = "f"
    g = "g"
    h = "h"
    i = "i"
    j = "j"


@dataclass(frozen=True)
class Timeline:
    """Key clock times of the rush; NaN where a pattern lacks the event.

    t1   first road-user departure
    t2   time road costs reach the common equilibrium level (first rider)
    t3c  on-time auto departure
    t3f  on-time ride-sourcing departure
    t4   last road-user departure
    tcl  last auto departure
    """

    t1: float
    t2: float
    t3c: float
    t3f: float
    t4: float
    tcl: float

    def as_tuple(self):
        return (self.t1, self.t2, self.t3c, self.t3f, self.t4, self.tcl)


@dataclass(frozen=True)
class MultimodalOutcome:
    pattern: Pattern
    NC: float
    NF: float
    NT: float
    P: float
    TC: float
    delta: float
    delta_note: str
    timeline: Timeline
    oversupply: float
    M: float
    profile: DepartureProfile
    boundary_tie: bool = False
    notes: tuple[str, ...] = ()

    # protocol consumed by simulator.verify
    @property
    def expected_auto_cost(self) -> float:
        return self.P

    @property
    def expected_efhv_cost(self) -> float:
        return self.P

    @property
    def parking_binding(self) -> bool:
        return self.NC >= self.M - 1e-6

    @property
    def efhv_available(self) -> bool:
        return True


def total_road_users(p: ScenarioParams) -> float:
    """Total drivers + riders N0 when the bottleneck never idles.

    Independent of the parking stock; clamped to [0, N].
    """
    dc = derive(p, NF=0.0)
    if p.W <= dc.W0:
        raise PrecondModeMix(
            f"W={p.W} <= W0={dc.W0}: driving is dominated, no two-mode road split"
        )
    return dc.N0


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------

def _road_rates(p: ScenarioParams, nc_norm: float) -> tuple[float, float]:
    """Cost-preserving auto departure rates given the search normalizer."""
    rho = 1.0 + p.s * p.eps / nc_norm if p.eps > 0.0 else 1.0
    r1 = p.s * p.alpha / ((p.alpha - p.beta) * rho)
    r2 = p.s * p.alpha / ((p.alpha + p.gamma) * rho)
    return r1, r2


def _efhv_rates(p: ScenarioParams) -> tuple[float, float]:
    return (p.s * p.alpha / (p.alpha - p.beta),
            p.s * p.alpha / (p.alpha + p.gamma))


@dataclass
class _Frame:
    """Times shared by every candidate at a given equilibrium cost P."""

    P: float
    t1: float
    t3c: float
    t3f: float
    t4: float

    @classmethod
    def at(cls, p: ScenarioParams, W0: float, P: float) -> "_Frame":
        return cls(
            P=P,
            t1=p.t_star - (P - W0) / p.beta,
            t3c=p.t_star - (P - p.F) / p.alpha,
            t3f=p.t_star - (P - p.W) / p.alpha,
            t4=p.t_star + (P - p.W) / p.gamma,
        )


def _auto_stop_time(p: ScenarioParams, fr: _Frame, nc: float, nc_norm: float) -> float:
    """Departure time of the nc-th driver under the two-rate schedule."""
    r1, r2 = _road_rates(p, nc_norm)
    early_cap = r1 * max(0.0, fr.t3c - fr.t1)
    if nc <= early_cap:
        return fr.t1 + nc / r1
    return fr.t3c + (nc - early_cap) / r2


def _rider_cost_minus_p(p: ScenarioParams, fr: _Frame, t: float, queue: float) -> float:
    """Ride cost of a departure at t facing the given queue, minus P."""
    arrival = t + queue / p.s
    if arrival <= p.t_star:
        cost = p.alpha * queue / p.s + p.beta * (p.t_star - arrival) + p.W
    else:
        cost = p.alpha * queue / p.s + p.gamma * (arrival - p.t_star) + p.W
    return cost - fr.P


def _efhv_block(p: ScenarioParams, fr: _Frame, t2: float) -> list[Segment]:
    """Rider departures from parity time t2 until the queue empties at t4."""
    r1, r2 = _efhv_rates(p)
    if t2 <= fr.t3f:
        return [Segment(t2, fr.t3f, efhv_rate=r1), Segment(fr.t3f, fr.t4, efhv_rate=r2)]
    return [Segment(t2, fr.t4, efhv_rate=r2)]


def _auto_block(p: ScenarioParams, fr: _Frame, nc: float, nc_norm: float,
                t_end: float) -> list[Segment]:
    r1, r2 = _road_rates(p, nc_norm)
    if t_end <= fr.t3c + _TINY:
        return [Segment(fr.t1, t_end, auto_rate=r1)]
    return [Segment(fr.t1, fr.t3c, auto_rate=r1), Segment(fr.t3c, t_end, auto_rate=r2)]


@dataclass
class _Candidate:
    pattern: Pattern
    NC: float
    NF: float
    P: float
    timeline: Timeline
    segments: list[Segment]
    notes: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# candidate families
# ---------------------------------------------------------------------------

def _candidate_never_clears(p: ScenarioParams, M: float, dc: DerivedConstants) -> Optional[_Candidate]:
    """Patterns (a)(c)(e)(f)(g)(h): bottleneck busy from t1 to t4."""
    if not (0.0 < dc.N0_raw < p.N):
        return None
    P = p.transit_cost(p.N - dc.N0)
    if P <= p.W + _TINY:
        return None
    fr = _Frame.at(p, dc.W0, P)
    if fr.t3c < fr.t1 - _TINY:
        return None  # whole auto wave would arrive late: outside the taxonomy

    nc_hi = min(M, dc.N0)
    nc_lo = p.s * p.eps * (p.alpha - p.beta) / p.beta if p.eps > 0.0 else 0.0
    if nc_lo >= nc_hi:
        return None

    def gap(nc: float) -> float:
        t2 = _auto_stop_time(p, fr, nc, nc)
        d2 = nc - p.s * (t2 - fr.t1)
        if d2 < -1e-7:
            return math.nan
        return _rider_cost_minus_p(p, fr, t2, max(0.0, d2))

    lo = nc_lo + max(1e-9, 1e-12 * nc_hi)
    g_lo = gap(lo)
    if math.isnan(g_lo) or g_lo < -_TINY:
        # search congestion makes the first consistent stop overshoot parity;
        # only reachable for eps > 0 with W below the congested threshold
        return None
    g_hi = gap(nc_hi)

    if g_hi <= _TINY:
        # parity strikes while spaces remain: patterns (a)/(g)/(h)
        if abs(g_hi) <= _TINY:
            nc_star = nc_hi
        else:
            grid = [lo + (nc_hi - lo) * k / 64.0 for k in range(65)]
            nc_star = None
            prev_x, prev_g = lo, g_lo
            for x in grid[1:]:
                g_x = gap(x)
                if math.isnan(g_x):
                    prev_x, prev_g = x, g_x
                    continue
                if not math.isnan(prev_g) and prev_g > 0.0 >= g_x:
                    nc_star = brentq(gap, prev_x, x, xtol=1e-10, rtol=1e-14)
                    break
                prev_x, prev_g = x, g_x
            if nc_star is None:
                return None
        if nc_star >= M - _TINY and g_hi < -_TINY:
            return None
        t2 = _auto_stop_time(p, fr, nc_star, nc_star)
        d2 = max(0.0, nc_star - p.s * (t2 - fr.t1))
        nf = dc.N0 - nc_star
        if nf <= _TINY or t2 >= fr.t4 - _TINY:
            return None
        if t2 <= fr.t3c + _TINY:
            tag = Pattern.a
        elif t2 + d2 / p.s <= p.t_star + _TINY:
            tag = Pattern.g
        else:
            tag = Pattern.h
        segments = _auto_block(p, fr, nc_star, nc_star, t2) + _efhv_block(p, fr, t2)
        tl = Timeline(fr.t1, t2, fr.t3c, fr.t3f, fr.t4, t2)
        return _Candidate(tag, nc_star, nf, P, tl, segments)

    # parking fills first: patterns (c)/(e)/(f), parity during the drain
    nf = dc.N0 - M
    if nf <= _TINY:
        return None
    tcl = _auto_stop_time(p, fr, M, M)
    t_empty = fr.t1 + M / p.s
    if M - p.s * (tcl - fr.t1) < -1e-7:
        return None  # queue would die inside the auto wave
    a, b, g_, W = p.alpha, p.beta, p.gamma, p.W
    if t_empty <= p.t_star:
        t2 = ((a - b) * t_empty + b * p.t_star + W - P) / a
    else:
        t2 = ((a + g_) * t_empty - g_ * p.t_star + W - P) / a
    if t2 < tcl - 1e-7 or t2 >= t_empty - _TINY:
        return None
    if tcl <= fr.t3c + _TINY and t_empty <= p.t_star + _TINY:
        tag = Pattern.c
    elif t_empty <= p.t_star + _TINY:
        tag = Pattern.e
    else:
        tag = Pattern.f
    segments = _auto_block(p, fr, M, M, tcl) + _efhv_block(p, fr, t2)
    tl = Timeline(fr.t1, t2, fr.t3c, fr.t3f, fr.t4, tcl)
    return _Candidate(tag, M, nf, P, tl, segments)


def _candidate_cleared_gap(p: ScenarioParams, M: float, dc: DerivedConstants) -> Optional[_Candidate]:
    """Patterns (b)/(d): the auto queue drains fully before riders start."""
    if M > dc.mu2 + _TINY:
        return None
    C = dc.C
    b, g = p.beta, p.gamma
    P = b * g / C * (p.R + p.theta * (p.N - M) - p.W) + p.W
    if P <= p.W + _TINY:
        return None
    nf = p.s * (P - p.W) * (b + g) / (b * g)
    if nf > p.N - M + _TINY:
        return None
    fr = _Frame.at(p, dc.W0, P)
    if fr.t3c < fr.t1 - _TINY:
        return None
    tcl = _auto_stop_time(p, fr, M, M)
    t_empty = fr.t1 + M / p.s
    if M - p.s * (tcl - fr.t1) < -1e-7:
        return None
    tf0 = p.t_star - (P - p.W) / b
    if tf0 < t_empty - 1e-7:
        return None  # riders would hit a live queue: never-clears family instead
    tag = Pattern.b if tcl <= fr.t3c + _TINY else Pattern.d
    segments = _auto_block(p, fr, M, M, tcl) + _efhv_block(p, fr, tf0)
    tl = Timeline(fr.t1, tf0, fr.t3c, fr.t3f, fr.t4, tcl)
    return _Candidate(tag, M, nf, P, tl, segments)


def _candidate_drivers_only(p: ScenarioParams, M: float, dc: DerivedConstants) -> Optional[_Candidate]:
    """Pattern (i): riding stays dearer than the road cost everywhere."""
    P = p.transit_cost(p.N - M)
    if P <= dc.W0 + _TINY:
        return None
    fr = _Frame.at(p, dc.W0, P)
    if fr.t3c < fr.t1 - _TINY:
        return None
    tcl = _auto_stop_time(p, fr, M, M)
    if M - p.s * (tcl - fr.t1) < -1e-7:
        return None
    t_empty = fr.t1 + M / p.s
    best_ride = p.W + p.gamma * max(0.0, t_empty - p.t_star)
    if best_ride < P - _TINY:
        return None
    segments = _auto_block(p, fr, M, M, tcl)
    tl = Timeline(fr.t1, math.nan, fr.t3c, math.nan, tcl, tcl)
    return _Candidate(Pattern.i, M, 0.0, P, tl, segments)


def _candidate_riders_only(p: ScenarioParams, dc: DerivedConstants) -> _Candidate:
    """Pattern (j): W <= W0, nobody drives."""
    nf0 = dc.NF0
    P = p.transit_cost(p.N - nf0)
    if P <= p.W - _TINY:
        raise NoConsistentPattern(
            "riders-only pattern has no positive rush (transit parity below W)"
        )
    fr = _Frame.at(p, dc.W0, P)
    t1f = p.t_star - (P - p.W) / p.beta
    segments = _efhv_block(p, fr, t1f)
    tl = Timeline(t1f, t1f, math.nan, fr.t3f, fr.t4, math.nan)
    notes = ()
    if dc.NF0_raw > p.N:
        notes = (f"virtual ride demand {dc.NF0_raw:.6g} clamped to N",)
    return _Candidate(Pattern.j, 0.0, nf0, P, tl, segments, notes)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def solve(p: ScenarioParams, M: Optional[float] = None) -> MultimodalOutcome:
    """Identify the equilibrium pattern and solve it.

    Requires a binding parking stock, M < NC0.  Raises
    NoConsistentPattern when no candidate configuration is internally
    consistent (degenerate parameter corners).
    """
    if M is None:
        M = p.M
    if M is None:
        raise PrecondViolation("multimodal solve needs a parking supply M")
    dc = derive(p, NF=0.0)
    if not M < dc.NC0:
        raise PrecondViolation(
            f"M={M} must be below the virtual parking demand NC0={dc.NC0:.6g}"
        )

    if p.W <= dc.W0:
        candidates = [_candidate_riders_only(p, dc)]
    else:
        candidates = [
            c for c in (
                _candidate_never_clears(p, M, dc),
                _candidate_cleared_gap(p, M, dc),
                _candidate_drivers_only(p, M, dc),
            ) if c is not None
        ]
    if not candidates:
        raise NoConsistentPattern(
            f"no commuting pattern is consistent at M={M} "
            f"(W={p.W}, W0={dc.W0:.6g}, congested threshold W1={dc.W1:.6g})"
        )
    candidates.sort(key=lambda c: c.pattern.value)
    chosen = candidates[0]
    tie = len(candidates) > 1

    nt = p.N - chosen.NC - chosen.NF
    tc = chosen.P * p.N
    tc_without = p.transit_cost(p.N - M) * p.N
    delta = tc - tc_without
    delta_note = _delta_sign_note(p, dc, chosen.pattern, delta)

    segments = [s for s in chosen.segments if s.width > _TINY]
    profile = DepartureProfile(
        tuple(segments), n_auto=chosen.NC, n_efhv=chosen.NF, autos_reserved=False,
    )
    return MultimodalOutcome(
        pattern=chosen.pattern,
        NC=chosen.NC, NF=chosen.NF, NT=nt,
        P=chosen.P, TC=tc,
        delta=delta, delta_note=delta_note,
        timeline=chosen.timeline,
        oversupply=max(0.0, M - chosen.NC),
        M=M,
        profile=profile,
        boundary_tie=tie,
        notes=chosen.notes + ((f"boundary tie among {[c.pattern.value for c in candidates]}",) if tie else ()),
    )


def _delta_sign_note(p: ScenarioParams, dc: DerivedConstants, pattern: Pattern, delta: float) -> str:
    if pattern is Pattern.i:
        return "drivers-only pattern: ride-sourcing changes nothing, delta = 0"
    if p.W <= dc.W2:
        return "W <= W2 guarantees delta < 0: ride-sourcing lowers the system cost"
    return f"sign resolved numerically: delta {'<' if delta < 0 else '>='} 0"


def system_cost_delta(p: ScenarioParams, M: Optional[float] = None) -> float:
    """System cost with ride-sourcing minus without, at the same parking stock.

    Negative means the ride-sourcing option lowers total commuting cost.
    The sign rationale is attached to the outcome of :func:`solve` as
    ``delta_note``.
    """
    return solve(p, M).delta

"""Independent fluid bottleneck simulator.

This module never trusts a closed-form result: it rebuilds cumulative
entry/exit curves from a piecewise-constant departure profile by exact
event-driven integration (all breakpoints are computed analytically,
there is no time step), then prices every departure slot from the
simulated queue.  Solver outputs are accepted only if every traveler
in a class realizes the same cost and no hypothetical deviation slot
is cheaper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InconsistentOutcome, ValidationError
from .scenario import ScenarioParams

__all__ = [
    "Segment",
    "DepartureProfile",
    "SimTrace",
    "VerificationReport",
    "build_profile",
    "simulate",
    "realized_cost",
    "verify",
]

_MASS_TOL = 1e-9


@dataclass(frozen=True)
class Segment:
    """One constant-rate stretch of the departure schedule."""

    start: float
    end: float
    auto_rate: float = 0.0
    efhv_rate: float = 0.0

    @property
    def width(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class DepartureProfile:
    """Piecewise-constant departure rates for both road modes.

    Invariants enforced on construction: segments are ordered and
    non-overlapping, rates are nonnegative, no segment carries both
    modes at once (equilibria never mix departures), and the rate
    integrals reproduce the class totals to 1e-9 relative.
    """

    segments: tuple[Segment, ...]
    n_auto: float
    n_efhv: float
    autos_reserved: bool = False

    def __post_init__(self):
        prev_end = -math.inf
        for seg in self.segments:
            if seg.end < seg.start:
                raise ValidationError(f"segment ends before it starts: {seg}")
            if seg.start < prev_end - 1e-12:
                raise ValidationError(f"segments overlap or are unordered at {seg}")
            if seg.auto_rate < 0 or seg.efhv_rate < 0:
                raise ValidationError(f"negative rate in {seg}")
            if seg.auto_rate > 0 and seg.efhv_rate > 0:
                raise ValidationError(f"simultaneous auto and ride-sourcing departures in {seg}")
            prev_end = seg.end
        for total, got, label in (
            (self.n_auto, self._integral("auto_rate"), "auto"),
            (self.n_efhv, self._integral("efhv_rate"), "ride-sourcing"),
        ):
            scale = max(1.0, abs(total))
            if abs(total - got) > _MASS_TOL * scale:
                raise ValidationError(
                    f"{label} rate integral {got} does not match total {total}"
                )

    def _integral(self, attr: str) -> float:
        return sum(getattr(seg, attr) * seg.width for seg in self.segments)

    @property
    def span(self) -> tuple[float, float]:
        if not self.segments:
            return (0.0, 0.0)
        return (self.segments[0].start, self.segments[-1].end)

    def split_in_half(self) -> "DepartureProfile":
        """Same schedule with every segment bisected (refinement tests)."""
        halves: list[Segment] = []
        for seg in self.segments:
            mid = 0.5 * (seg.start + seg.end)
            halves.append(Segment(seg.start, mid, seg.auto_rate, seg.efhv_rate))
            halves.append(Segment(mid, seg.end, seg.auto_rate, seg.efhv_rate))
        return DepartureProfile(tuple(halves), self.n_auto, self.n_efhv, self.autos_reserved)


class SimTrace:
    """Exact piecewise-linear state of the bottleneck over the rush.

    All curves (cumulative entries per mode, cumulative exits, queue
    length) are linear between consecutive breakpoints; breakpoints
    include every rate change and every time the queue hits zero.
    """

    def __init__(self, p: ScenarioParams, profile: DepartureProfile,
                 breakpoints, cum_auto, cum_efhv, cum_exit, queue):
        self.params = p
        self.profile = profile
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.cum_entry_auto = np.asarray(cum_auto, dtype=float)
        self.cum_entry_efhv = np.asarray(cum_efhv, dtype=float)
        self.cum_exit = np.asarray(cum_exit, dtype=float)
        self.queue = np.asarray(queue, dtype=float)

    def _interp(self, t, curve):
        if len(self.breakpoints) == 0:
            return np.zeros_like(np.asarray(t, dtype=float))
        return np.interp(t, self.breakpoints, curve)

    def queue_at(self, t):
        """Queue length D(t), vehicles."""
        return self._interp(t, self.queue)

    def entries_at(self, t, mode: str = "all"):
        if mode == "auto":
            return self._interp(t, self.cum_entry_auto)
        if mode == "efhv":
            return self._interp(t, self.cum_entry_efhv)
        return self._interp(t, self.cum_entry_auto + self.cum_entry_efhv)

    def travel_time(self, t):
        """FIFO bottleneck delay for a departure at t: D(t)/s."""
        return self.queue_at(t) / self.params.s

    def exit_time(self, t):
        return np.asarray(t, dtype=float) + self.travel_time(t)

    def search_time(self, t):
        """Parking search time of an auto departing at t.

        Reserved autos skip the competition term; non-reserved autos
        accumulate it in proportion to the share of drivers already
        on the road, normalized by the realized driver count.
        """
        p = self.params
        if self.profile.autos_reserved or p.eps == 0.0:
            return p.S0 + np.zeros_like(np.asarray(t, dtype=float))
        norm = self.profile.n_auto
        if norm <= 0.0:
            return p.S0 + np.zeros_like(np.asarray(t, dtype=float))
        return p.S0 + p.eps * self.entries_at(t, "auto") / norm

    def realized_cost(self, mode: str, t_dep):
        """Full trip cost of a (possibly hypothetical) departure at t_dep."""
        p = self.params
        t = np.asarray(t_dep, dtype=float)
        T = self.travel_time(t)
        if mode == "auto":
            delay = T + self.search_time(t)
            fixed = p.F
        elif mode == "efhv":
            delay = T
            fixed = p.W
        else:
            raise ValueError(f"unknown mode {mode!r}")
        arrival = t + delay
        early = np.maximum(0.0, p.t_star - arrival)
        late = np.maximum(0.0, arrival - p.t_star)
        cost = p.alpha * delay + p.beta * early + p.gamma * late + fixed
        return float(cost) if np.isscalar(t_dep) else cost

    def queue_zeros(self, lo: float, hi: float, atol: float = 1e-9) -> np.ndarray:
        """Times strictly inside (lo, hi) where the queue touches zero.

        A maximal zero stretch is reported by its endpoints' midpoint
        when it has positive width, otherwise by the touch point.
        """
        bk, q = self.breakpoints, self.queue
        zeros: list[float] = []
        i = 0
        while i < len(bk):
            if q[i] <= atol:
                j = i
                while j + 1 < len(bk) and q[j + 1] <= atol:
                    j += 1
                if lo < bk[i] and bk[j] < hi:
                    zeros.append(0.5 * (bk[i] + bk[j]))
                i = j + 1
            else:
                i += 1
        return np.array(zeros)

    def write_csv(self, path) -> None:
        """Dump breakpoints and cumulative curves (plot-ready)."""
        header = (
            "# schema: commuteq.trace.v1\n"
            "t,cum_entry_auto,cum_entry_efhv,cum_exit,queue\n"
        )
        rows = "\n".join(
            f"{t:.10g},{a:.10g},{f:.10g},{e:.10g},{q:.10g}"
            for t, a, f, e, q in zip(
                self.breakpoints, self.cum_entry_auto,
                self.cum_entry_efhv, self.cum_exit, self.queue,
            )
        )
        with open(path, "w") as fh:
            fh.write(header + rows + ("\n" if rows else ""))


def simulate(p: ScenarioParams, profile: DepartureProfile) -> SimTrace:
    """Integrate the fluid queue exactly over the profile's support."""
    if not profile.segments:
        return SimTrace(p, profile, [], [], [], [], [])

    s = p.s
    events = sorted({seg.start for seg in profile.segments}
                    | {seg.end for seg in profile.segments})

    def rates_at(t: float) -> tuple[float, float]:
        for seg in profile.segments:
            if seg.start <= t < seg.end:
                return seg.auto_rate, seg.efhv_rate
        return 0.0, 0.0

    bk = [events[0]]
    ca, cf, ce, q = [0.0], [0.0], [0.0], [0.0]
    t = events[0]
    idx = 1
    while idx < len(events):
        t_next = events[idx]
        ra, rf = rates_at(t)
        r = ra + rf
        D = q[-1]
        # one linear piece, possibly split where the queue vanishes
        if D > 0.0 and r < s:
            t_zero = t + D / (s - r)
            if t_zero < t_next - 1e-15:
                dt = t_zero - t
                bk.append(t_zero)
                ca.append(ca[-1] + ra * dt)
                cf.append(cf[-1] + rf * dt)
                ce.append(ce[-1] + s * dt)
                q.append(0.0)
                t = t_zero
                continue
        dt = t_next - t
        if D > 0.0:
            out_rate = s
        else:
            out_rate = min(r, s)
        bk.append(t_next)
        ca.append(ca[-1] + ra * dt)
        cf.append(cf[-1] + rf * dt)
        ce.append(ce[-1] + out_rate * dt)
        q.append(max(0.0, D + (r - out_rate) * dt))
        t = t_next
        idx += 1

    # drain whatever queue is left after the last departure
    if q[-1] > 0.0:
        dt = q[-1] / s
        bk.append(t + dt)
        ca.append(ca[-1])
        cf.append(cf[-1])
        ce.append(ce[-1] + q[-1])
        q.append(0.0)

    return SimTrace(p, profile, bk, ca, cf, ce, q)


def realized_cost(trace: SimTrace, mode: str, t_dep):
    """Module-level alias of :meth:`SimTrace.realized_cost`."""
    return trace.realized_cost(mode, t_dep)


def build_profile(p: ScenarioParams, outcome) -> DepartureProfile:
    """Departure profile implied by any solved equilibrium outcome.

    Every solver in this package attaches the profile it constructed;
    this accessor re-validates and returns it so external callers have
    a single entry point regardless of the regime.
    """
    profile = getattr(outcome, "profile", None)
    if profile is None:
        raise InconsistentOutcome(
            f"{type(outcome).__name__} carries no departure profile"
        )
    # reconstructing through the constructor re-runs all invariants
    return DepartureProfile(
        profile.segments, profile.n_auto, profile.n_efhv, profile.autos_reserved
    )


@dataclass
class VerificationReport:
    """Wardrop check of a closed-form outcome against the simulator."""

    passed: bool
    auto_spread_rel: float
    efhv_spread_rel: float
    ordering_ok: bool
    deviation_margin_rel: float
    conservation_ok: bool
    n_probes: int
    messages: list[str] = field(default_factory=list)


def _class_samples(profile: DepartureProfile, attr: str, per_segment: int = 9) -> np.ndarray:
    times: list[float] = []
    for seg in profile.segments:
        if getattr(seg, attr) > 0 and seg.width > 0:
            times.extend(np.linspace(seg.start, seg.end, per_segment))
    return np.array(times)


def verify(
    p: ScenarioParams,
    outcome,
    profile: Optional[DepartureProfile] = None,
    *,
    tol_spread: float = 1e-6,
    tol_deviation: float = 1e-6,
    n_probe: int = 1200,
    probe_pad: float = 60.0,
) -> VerificationReport:
    """Simulate an outcome's profile and check the equilibrium conditions.

    The outcome must expose ``expected_auto_cost``, ``expected_efhv_cost``
    (either may be ``None`` when the class is absent), ``parking_binding``
    and ``efhv_available``; all solver outcomes in this package do.

    Checks, in order: every occupied slot in a class realizes that
    class's cost (relative spread); the reserved-driver cost does not
    exceed the road cost; no hypothetical departure anywhere on a
    ``>= n_probe`` grid undercuts its class cost (auto deviations are
    only priced when a parking space would actually be free); entry and
    exit mass balance.
    """
    if profile is None:
        profile = build_profile(p, outcome)
    trace = simulate(p, profile)
    messages: list[str] = []

    pr = getattr(outcome, "expected_auto_cost", None)
    pf = getattr(outcome, "expected_efhv_cost", None)
    binding = bool(getattr(outcome, "parking_binding", False))
    efhv_on = bool(getattr(outcome, "efhv_available", pf is not None))

    def spread(mode: str, expected: Optional[float]) -> float:
        if expected is None:
            return 0.0
        times = _class_samples(profile, "auto_rate" if mode == "auto" else "efhv_rate")
        if times.size == 0:
            return 0.0
        costs = trace.realized_cost(mode, times)
        worst = max(abs(costs.max() - expected), abs(costs.min() - expected))
        return worst / max(1e-300, abs(expected))

    auto_spread = spread("auto", pr)
    efhv_spread = spread("efhv", pf)
    if auto_spread > tol_spread:
        messages.append(f"auto cost spread {auto_spread:.3e} exceeds {tol_spread:.1e}")
    if efhv_spread > tol_spread:
        messages.append(f"ride-sourcing cost spread {efhv_spread:.3e} exceeds {tol_spread:.1e}")

    ordering_ok = True
    if pr is not None and pf is not None and pr > pf * (1 + tol_spread):
        ordering_ok = False
        messages.append(f"driver cost {pr} exceeds road cost {pf}")

    lo, hi = profile.span
    probes = np.linspace(lo - probe_pad, hi + probe_pad, n_probe)
    probes = np.union1d(probes, trace.breakpoints)
    margin = math.inf
    if efhv_on and pf is not None:
        margin = min(margin, float((trace.realized_cost("efhv", probes) - pf).min() / pf))
    if pr is not None and not binding:
        margin = min(margin, float((trace.realized_cost("auto", probes) - pr).min() / pr))
    if margin is math.inf:
        margin = 0.0
    if margin < -tol_deviation:
        messages.append(f"profitable deviation found: margin {margin:.3e}")

    conservation_ok = True
    if len(trace.breakpoints):
        entered = trace.cum_entry_auto[-1] + trace.cum_entry_efhv[-1]
        exited = trace.cum_exit[-1]
        if abs(entered - exited) > 1e-6 * max(1.0, entered):
            conservation_ok = False
            messages.append(f"mass balance broken: in {entered}, out {exited}")
        if (trace.queue < -1e-9).any():
            conservation_ok = False
            messages.append("negative queue encountered")

    return VerificationReport(
        passed=not messages,
        auto_spread_rel=auto_spread,
        efhv_spread_rel=efhv_spread,
        ordering_ok=ordering_ok,
        deviation_margin_rel=margin,
        conservation_ok=conservation_ok,
        n_probes=len(probes),
        messages=messages,
    )

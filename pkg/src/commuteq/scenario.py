"""Exogenous scenario parameters and every derived constant built from them.

The model describes a single-bottleneck corridor into a CBD shared by
private autos (which need a parking space), ride-sourcing vehicles
(no parking demand) and a parallel transit line.  All downstream
modules consume a validated :class:`ScenarioParams` plus the constant
block computed by :func:`derive`.

Units: money amounts are in an arbitrary currency, times in minutes,
flows in vehicles per minute, populations in persons/vehicles (treated
as continuous fluid quantities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .errors import (
    FareDominance,
    NonPositiveCapacity,
    OrderingViolation,
    ParseError,
    ValidationError,
)

__all__ = [
    "ScenarioParams",
    "DerivedConstants",
    "validate",
    "derive",
    "scale_money",
    "load_scenario",
    "dump_scenario",
]


@dataclass(frozen=True)
class ScenarioParams:
    """All exogenous quantities of the corridor model.

    alpha, beta, gamma
        Value of travel time and the early/late schedule penalties
        (currency/min).  The model requires gamma > alpha > beta > 0.
    s
        Bottleneck service capacity, vehicles/min.
    theta
        Transit crowding cost slope, currency per fellow rider.
    R
        Flat transit fare, currency.
    F
        One-off parking fee, currency.
    W
        Ride-sourcing generalized fixed cost (fare plus waiting),
        currency.
    S0
        Parking search time of the first driver, min.
    eps
        Growth coefficient of the search time as spaces fill up, min.
        Zero for reserved parking.
    N
        Total commuters.
    t_star
        Common preferred arrival time on an arbitrary clock, min.
    M, NF
        Parking supply and ride-sourcing fleet size.  Optional here;
        operations that need them take explicit arguments which
        override these defaults.
    """

    alpha: float
    beta: float
    gamma: float
    s: float
    theta: float
    R: float
    F: float
    W: float
    S0: float
    eps: float
    N: float
    t_star: float
    M: Optional[float] = None
    NF: Optional[float] = None

    def transit_cost(self, n_transit: float) -> float:
        """Transit door-to-door cost R + theta * NT for NT riders."""
        return self.R + self.theta * n_transit

    def with_(self, **changes) -> "ScenarioParams":
        """Return a copy with the given fields replaced (re-validated)."""
        return validate(replace(self, **changes))


_POSITIVE = ("s", "N")
_NONNEGATIVE = ("theta", "R", "F", "W", "S0", "eps")


def validate(params: ScenarioParams) -> ScenarioParams:
    """Check every model invariant; return the params unchanged if all hold.

    Raises
    ------
    OrderingViolation
        if gamma > alpha > beta > 0 fails.
    NonPositiveCapacity
        if s or N is not strictly positive, or a nonnegative field is
        negative.
    FareDominance
        if W >= R + theta*N, in which case ride-sourcing could never
        attract a rider and the multi-modal analysis is void.
    """
    a, b, g = params.alpha, params.beta, params.gamma
    if not (g > a > b > 0.0):
        raise OrderingViolation(
            f"need gamma > alpha > beta > 0, got gamma={g}, alpha={a}, beta={b}"
        )
    for name in _POSITIVE:
        if getattr(params, name) <= 0.0:
            raise NonPositiveCapacity(f"{name} must be > 0, got {getattr(params, name)}")
    for name in _NONNEGATIVE:
        if getattr(params, name) < 0.0:
            raise NonPositiveCapacity(f"{name} must be >= 0, got {getattr(params, name)}")
    for name in ("M", "NF"):
        value = getattr(params, name)
        if value is not None and value < 0.0:
            raise NonPositiveCapacity(f"{name} must be >= 0, got {value}")
    if params.W >= params.R + params.theta * params.N:
        raise FareDominance(
            f"W={params.W} must stay below R + theta*N = "
            f"{params.R + params.theta * params.N}"
        )
    return params


@dataclass(frozen=True)
class DerivedConstants:
    """Every threshold and composite constant used by the solvers.

    Population-valued thresholds are stored unclamped except for
    ``NC0``, ``NF0`` and ``N0`` which are clamped to [0, N]; the raw
    values are kept in the ``*_raw`` diagnostics fields.

    ``NF7``, ``NF8`` and ``NF9`` depend on a parking supply M and are
    ``None`` when the scenario does not fix one.  ``mu1``/``mu3``/
    ``mu4``/``mu5`` are intentionally not computed: their printed
    definitions are unreliable and the pattern solver does not need
    them (it identifies patterns constructively).  Only ``mu2``, the
    parking level below which the bottleneck idles between the auto
    and ride-sourcing waves, is used.
    """

    C: float
    W0: float
    W1: float
    W2: float
    K: float
    D: float
    E: float
    A: float
    B: float
    mu1: Optional[float]
    mu2: float
    mu3: Optional[float]
    mu4: Optional[float]
    mu5: Optional[float]
    NF1: float
    NF2: float
    NF3: float
    NF4: float
    NF5: float
    NF6: float
    NF7: Optional[float]
    NF8: Optional[float]
    NF9: Optional[float]
    M1: float
    M2: float
    M3: float
    M4: float
    M5: float
    M6: float
    M7: float
    NC0: float
    NF0: float
    N0: float
    NC0_raw: float
    NF0_raw: float
    N0_raw: float


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


def virtual_parking_demand(p: ScenarioParams) -> float:
    """Unclamped auto demand NC0 when parking is unconstrained and NF = 0.

    Solves p_c(NC) = p_T(N - NC).  The search-congestion term enters
    with a negative sign: a larger eps raises the driving cost and so
    lowers the indifference split.
    """
    a, b, g = p.alpha, p.beta, p.gamma
    C = (b + g) * p.theta * p.s + b * g
    bracket = (
        p.theta * p.N + p.R - a * p.S0 - p.F - b * (a + g) / (b + g) * p.eps
    )
    return p.s * (b + g) / C * bracket


def derive(p: ScenarioParams, NF: Optional[float] = None) -> DerivedConstants:
    """Evaluate the full constant block for a validated scenario.

    NF defaults to ``p.NF``; the fleet-dependent members (A, B,
    M2..M5, NF7..NF9) require it.  M-dependent members use ``p.M`` and
    are ``None`` without one.
    """
    if NF is None:
        NF = p.NF
    if NF is None:
        raise ValidationError("derive() needs a fleet size: pass NF or set it on the scenario")
    if NF < 0:
        raise ValidationError(f"NF must be >= 0, got {NF}")

    a, b, g, s, th = p.alpha, p.beta, p.gamma, p.s, p.theta
    C = (b + g) * th * s + b * g
    W0 = (a - b) * p.S0 + p.F
    W1 = (a - b) * (p.S0 + p.eps) + p.F
    W2 = (a + g) * (p.S0 + p.eps) + p.F
    K = ((a - b) * g * p.S0 + b * p.W + g * p.F) / (b + g)
    D = W0 - p.W
    E = th * p.N + p.R - p.W - b * p.S0
    A = (E - D + th * (p.N - NF)) * s
    B = (E - th * NF) * s - b * NF

    NF1 = (D + E - th * p.N) * s / (2.0 * b + th * s)
    NF2 = (b * (D + E - th * p.N) + g * E) * s / (2.0 * b * b + C)
    NF3 = D * s / b
    NF4 = (E - D) / th if th > 0.0 else math.inf
    NF5 = (b * (E - D) + g * E) * s / C
    M6 = b * th * p.N * s / C
    NF6 = NF5 - M6

    M1 = (b + g) * A / (2.0 * C)
    M2 = (b + g) * B / C
    M3 = (b * A + g * B) / (2.0 * C)
    M4 = (b + g) * (A - th * p.N * s) / C
    M5 = NF5 - NF
    M7 = NF5 - NF3

    if p.M is not None:
        NF7 = (E * s - C * p.M / (b + g)) / (b + th * s)
        NF8 = NF4 - C * p.M / ((b + g) * th * s) if th > 0.0 else math.inf
        NF9 = NF5 - p.M
    else:
        NF7 = NF8 = NF9 = None

    nc0_raw = virtual_parking_demand(p)
    nf0_raw = s * (b + g) * (p.R - p.W + th * p.N) / C
    n0_raw = (b + g) * s * (p.R + th * p.N - K) / C

    return DerivedConstants(
        C=C, W0=W0, W1=W1, W2=W2, K=K, D=D, E=E, A=A, B=B,
        mu1=None, mu2=(p.W - W0) * s / b, mu3=None, mu4=None, mu5=None,
        NF1=NF1, NF2=NF2, NF3=NF3, NF4=NF4, NF5=NF5, NF6=NF6,
        NF7=NF7, NF8=NF8, NF9=NF9,
        M1=M1, M2=M2, M3=M3, M4=M4, M5=M5, M6=M6, M7=M7,
        NC0=_clamp(nc0_raw, 0.0, p.N),
        NF0=_clamp(nf0_raw, 0.0, p.N),
        N0=_clamp(n0_raw, 0.0, p.N),
        NC0_raw=nc0_raw, NF0_raw=nf0_raw, N0_raw=n0_raw,
    )


def scale_money(p: ScenarioParams, k: float) -> ScenarioParams:
    """Rescale every money-valued parameter by k > 0.

    Mode splits, populations and all threshold populations are
    invariant under this map; costs scale linearly with k.
    """
    if k <= 0:
        raise ValidationError(f"money scale must be > 0, got {k}")
    return validate(replace(
        p,
        alpha=p.alpha * k, beta=p.beta * k, gamma=p.gamma * k,
        theta=p.theta * k, R=p.R * k, F=p.F * k, W=p.W * k,
    ))


# ---------------------------------------------------------------------------
# Scenario file format: one "key = value" pair per line, keys exactly the
# ScenarioParams field names, '#' starts a comment.  Unknown keys rejected.
# ---------------------------------------------------------------------------

_FIELDS = (
    "alpha", "beta", "gamma", "s", "theta", "R", "F", "W",
    "S0", "eps", "N", "t_star", "M", "NF",
)
_REQUIRED = tuple(f for f in _FIELDS if f not in ("M", "NF"))


def load_scenario(path) -> ScenarioParams:
    """Parse and validate a scenario file."""
    text = Path(path).read_text()
    values: dict[str, float] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, _, val = line.partition(sep)
                break
        else:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw_line!r}")
        key = key.strip()
        if key not in _FIELDS:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = float(val.strip())
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad number for {key!r}: {val.strip()!r}") from exc
    missing = [f for f in _REQUIRED if f not in values]
    if missing:
        raise ParseError(f"{path}: missing required keys: {', '.join(missing)}")
    return validate(ScenarioParams(**values))


def dump_scenario(p: ScenarioParams, path) -> None:
    """Write a scenario file readable by :func:`load_scenario`."""
    lines = []
    for name in _FIELDS:
        value = getattr(p, name)
        if value is None:
            continue
        lines.append(f"{name} = {value!r}")
    Path(path).write_text("\n".join(lines) + "\n")

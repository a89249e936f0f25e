"""Optimal parking supply and optimal fleet size, with a brute-force check.

Both optimizers minimize the reserved-regime system cost.  The closed
forms pick the minimizer from a small set of threshold expressions; a
grid sweep over the same cost function independently confirms the
branch choice.  A disagreement beyond grid resolution is reported on
the result as ``branch_mismatch`` instead of being papered over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import PrecondViolation, ValidationError
from .scenario import ScenarioParams, derive
from . import reserved

__all__ = [
    "PolicyResult",
    "GridResult",
    "optimal_parking",
    "optimal_fleet",
    "tc_derivatives",
    "grid_oracle",
    "sweep_rows",
]


@dataclass(frozen=True)
class PolicyResult:
    control: str                 # "M" or "NF"
    argopt: float
    branch: str
    TC_at_opt: float
    oracle_argopt: float
    oracle_gap: float
    branch_mismatch: bool
    eta: Optional[float] = None            # fleet policy only
    tc_benchmark: Optional[float] = None   # fleet policy only: TC at NF = 0
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class GridResult:
    values: np.ndarray
    tc: np.ndarray
    argmin: float
    tc_min: float


def _require_regime(p: ScenarioParams) -> None:
    dc = derive(p, 0.0)
    if p.eps != 0.0:
        raise PrecondViolation(f"policy analysis requires eps = 0, got {p.eps}")
    if p.W > dc.W0 + 1e-9:
        raise PrecondViolation(f"policy analysis requires W <= W0; W={p.W}, W0={dc.W0:.6g}")


def optimal_parking(p: ScenarioParams, NF: Optional[float] = None, *,
                    oracle_step: float = 1.0) -> PolicyResult:
    """Parking supply minimizing system cost at a fixed fleet size."""
    _require_regime(p)
    NF = p.NF if NF is None else NF
    if NF is None:
        raise PrecondViolation("optimal_parking needs a fleet size NF")
    dc = derive(p, NF)
    if NF >= dc.NF0:
        raise PrecondViolation(f"NF={NF} must stay below the virtual demand NF0={dc.NF0:.6g}")

    if NF <= dc.NF4 and NF <= dc.NF1:
        m_opt, branch = min(dc.M1, dc.M4), "min(M1,M4)"
    elif NF <= dc.NF4 and NF <= dc.NF3:
        m_opt, branch = dc.M4, "M4"
    elif NF <= dc.NF4 and dc.NF3 < NF <= dc.NF2:
        m_opt, branch = dc.M2, "M2"
    elif NF <= dc.NF6 and NF > dc.NF3 and NF > dc.NF2:
        m_opt, branch = dc.M3, "M3"
    elif NF <= dc.NF5 and dc.NF6 < NF and NF > dc.NF3:
        m_opt, branch = dc.M5, "M5"
    else:
        m_opt, branch = 0.0, "zero"
    m_opt = min(max(m_opt, 0.0), dc.NC0)

    oracle = grid_oracle(p, NF=NF, lo=0.0, hi=dc.NC0, step=oracle_step)
    tc_opt = reserved.total_cost(p, M=m_opt, NF=NF)
    gap = abs(m_opt - oracle.argmin)
    mismatch = tc_opt - oracle.tc_min > 1e-6 * max(1.0, abs(oracle.tc_min))
    return PolicyResult(
        control="M", argopt=m_opt, branch=branch, TC_at_opt=tc_opt,
        oracle_argopt=oracle.argmin, oracle_gap=gap, branch_mismatch=mismatch,
    )


def optimal_fleet(p: ScenarioParams, M: Optional[float] = None, *,
                  oracle_step: float = 1.0) -> PolicyResult:
    """Fleet size minimizing system cost at a fixed parking supply.

    Also reports the cost reduction fraction eta against the zero-fleet
    benchmark (the all-reserved two-mode equilibrium at the same M).
    """
    _require_regime(p)
    M = p.M if M is None else M
    if M is None:
        raise PrecondViolation("optimal_fleet needs a parking supply M")
    dc0 = derive(p, 0.0)
    notes: tuple[str, ...] = ()
    if M > dc0.NC0:
        notes = (f"supply {M:.6g} capped at virtual demand {dc0.NC0:.6g}",)
        M = dc0.NC0
    dc = derive(replace(p, M=M), 0.0)

    if M > dc.M7:
        nf_opt, branch = dc.NF8, "NF8"
    elif M > dc.M6:
        nf_opt, branch = dc.NF7, "NF7"
    else:
        nf_opt, branch = dc.NF9, "NF9"
    nf_opt = min(max(nf_opt, 0.0), dc.NF0)

    oracle = grid_oracle(p, M=M, lo=0.0, hi=dc.NF0, step=oracle_step)
    tc_opt = reserved.total_cost(p, M=M, NF=nf_opt)
    tc_benchmark = reserved.total_cost(p, M=M, NF=0.0)
    eta = (tc_benchmark - tc_opt) / tc_benchmark
    gap = abs(nf_opt - oracle.argmin)
    mismatch = tc_opt - oracle.tc_min > 1e-6 * max(1.0, abs(oracle.tc_min))
    return PolicyResult(
        control="NF", argopt=nf_opt, branch=branch, TC_at_opt=tc_opt,
        oracle_argopt=oracle.argmin, oracle_gap=gap, branch_mismatch=mismatch,
        eta=eta, tc_benchmark=tc_benchmark, notes=notes,
    )


_DERIVATIVES = ("dTCi_dNC", "dTCii_dNC", "dTCi_dNF", "dTCii_dNF")


def tc_derivatives(p: ScenarioParams, NC: float, NF: float, which: str) -> float:
    """Closed-form first derivatives of the two system-cost segments.

    ``NC`` is the driver count at which the derivative is evaluated
    (on the binding branch that is the parking supply itself).
    """
    if which not in _DERIVATIVES:
        raise ValidationError(f"which must be one of {_DERIVATIVES}, got {which!r}")
    a, b, g, s, th = p.alpha, p.beta, p.gamma, p.s, p.theta
    C = (b + g) * th * s + b * g
    if which == "dTCi_dNC":
        return (2.0 * (b * g / ((b + g) * s) + th) * NC
                + p.F - p.R + a * p.S0 + th * NF - 2.0 * th * p.N)
    if which == "dTCii_dNC":
        return (2.0 * C / (b * s) * NC
                + p.F - p.R + g * NF / s + g * (p.W - p.R) / b
                + (a + g) * p.S0 + th * NF - 2.0 * th * p.N
                - g * th * (p.N - NF) / b)
    if which == "dTCi_dNF":
        return -th * (p.N - NC)
    return g * (b + s * th) * NC / (s * b) - th * (p.N - NC)


def grid_oracle(p: ScenarioParams, *, M: Optional[float] = None,
                NF: Optional[float] = None, lo: float = 0.0,
                hi: Optional[float] = None, step: float = 1.0) -> GridResult:
    """Brute-force sweep of the reserved-regime system cost.

    Fix exactly one of M / NF and sweep the other over [lo, hi] with
    the given step (the endpoint is always included).  Ties break
    toward the smaller control value.
    """
    if (M is None) == (NF is None):
        raise ValidationError("fix exactly one of M and NF")
    if step <= 0:
        raise ValidationError(f"grid step must be > 0, got {step}")
    if hi is None:
        dc = derive(p, NF if NF is not None else 0.0)
        hi = dc.NC0 if NF is not None else dc.NF0
    if hi < lo:
        raise ValidationError(f"empty grid: lo={lo}, hi={hi}")
    values = np.arange(lo, hi, step, dtype=float)
    if values.size == 0 or values[-1] < hi - 1e-12:
        values = np.append(values, hi)
    if NF is not None:
        # the constant block is fleet-dependent only: hoist it out of the sweep
        _, _, nf, dc = reserved._context(p, hi, NF)
        tc = np.array([
            reserved._evaluate(p, min(v, dc.NC0), nf, dc).TC for v in values
        ])
    else:
        tc = np.array([reserved.total_cost(p, M=M, NF=v) for v in values])
    k = int(np.argmin(tc))  # argmin returns the first minimum: smallest control
    return GridResult(values=values, tc=tc, argmin=float(values[k]), tc_min=float(tc[k]))


def sweep_rows(p: ScenarioParams, *, over: str, lo: float, hi: float, step: float,
               M: Optional[float] = None, NF: Optional[float] = None) -> list[tuple]:
    """Equilibrium summary per grid point, for CSV reporting.

    Rows are (control value, NC, NT, Pr, Pf, TC, branch).
    """
    if over == "M":
        grid = grid_oracle(p, NF=NF, lo=lo, hi=hi, step=step)
    elif over == "NF":
        grid = grid_oracle(p, M=M, lo=lo, hi=hi, step=step)
    else:
        raise ValidationError(f"over must be 'M' or 'NF', got {over!r}")
    rows = []
    for v in grid.values:
        m, nf = (v, NF) if over == "M" else (M, v)
        out = reserved.solve(p, M=m, NF=nf)
        rows.append((v, out.NC, out.NT, out.Pr, out.Pf, out.TC, out.cost_case))
    return rows

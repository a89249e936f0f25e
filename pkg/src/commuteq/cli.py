"""Command-line interface.

Five commands over a scenario file: equilibrium, optimize-parking,
optimize-fleet, sweep, verify.  Summaries go to stdout with fixed
6-significant-digit formatting so identical inputs produce identical
bytes; machine-readable output goes to --out as versioned CSV.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional

from . import bimodal, multimodal, policy, reserved, simulator
from .errors import CommuteqError, ValidationError, VerificationFailed
from .scenario import derive, load_scenario

_REGIMES = ("bimodal", "bimodal-reserved", "bimodal-nonreserved", "multimodal", "reserved")


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(x, ".6g")


def _parse_grid(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"--grid wants lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(v) for v in parts)
    except ValueError as exc:
        raise ValidationError(f"--grid wants numbers, got {text!r}") from exc
    if step <= 0:
        raise ValidationError(f"--grid step must be > 0, got {step}")
    if hi < lo:
        raise ValidationError(f"--grid range is empty: {text!r}")
    return lo, hi, step


def _solve_regime(p, regime: str, M: Optional[float], NF: Optional[float]):
    if regime in ("bimodal", "bimodal-reserved"):
        return bimodal.equilibrium(p, M=M, reserved=True)
    if regime == "bimodal-nonreserved":
        return bimodal.equilibrium(p, M=M, reserved=False)
    if regime == "multimodal":
        return multimodal.solve(p, M=M)
    if regime == "reserved":
        return reserved.solve(p, M=M, NF=NF)
    raise ValidationError(f"unknown regime {regime!r}")


def _print_outcome(out) -> None:
    print(f"regime outcome: {type(out).__name__}")
    if isinstance(out, bimodal.BimodalOutcome):
        rows = [
            ("NC", out.NC), ("NT", out.NT),
            ("P_auto", out.P_auto), ("P_transit", out.P_transit),
            ("TC", out.TC), ("binding", 1.0 if out.binding else 0.0),
        ]
    elif isinstance(out, multimodal.MultimodalOutcome):
        print(f"pattern: {out.pattern.value}")
        rows = [
            ("NC", out.NC), ("NF", out.NF), ("NT", out.NT),
            ("P", out.P), ("TC", out.TC), ("delta", out.delta),
            ("oversupply", out.oversupply),
        ]
        for name, value in zip(("t1", "t2", "t3c", "t3f", "t4", "tcl"),
                               out.timeline.as_tuple()):
            rows.append((name, value))
    else:
        print(f"scenario: {out.scenario}  cost case: {out.cost_case}")
        rows = [
            ("NC", out.NC), ("NF", out.NF), ("NT", out.NT),
            ("Pr", out.Pr), ("Pf", out.Pf), ("TC", out.TC),
            ("idle_spaces", out.idle_spaces),
        ]
        for name, value in zip(("t1", "tfl", "t2", "t4"), out.timeline):
            rows.append((name, value))
    for name, value in rows:
        print(f"{name}: {_fmt(value)}")
    for note in getattr(out, "notes", ()):
        print(f"note: {note}")


def _run_verify(p, out) -> simulator.VerificationReport:
    report = simulator.verify(p, out)
    status = "pass" if report.passed else "FAIL"
    print(f"simulator check: {status} "
          f"(auto spread {_fmt(report.auto_spread_rel)}, "
          f"ride spread {_fmt(report.efhv_spread_rel)}, "
          f"deviation margin {_fmt(report.deviation_margin_rel)}, "
          f"{report.n_probes} probes)")
    for msg in report.messages:
        print(f"  {msg}")
    return report


def _write_curve(path, grid: policy.GridResult) -> None:
    with open(path, "w") as fh:
        fh.write("# schema: commuteq.curve.v1\ncontrol,TC\n")
        for v, tc in zip(grid.values, grid.tc):
            fh.write(f"{_fmt(v)},{_fmt(tc)}\n")


def _print_policy(res: policy.PolicyResult, tc_at) -> None:
    print(f"control: {res.control}")
    print(f"optimum: {_fmt(res.argopt)}")
    print(f"optimum_floor_TC: {_fmt(tc_at(math.floor(res.argopt)))}")
    print(f"optimum_ceil_TC: {_fmt(tc_at(math.ceil(res.argopt)))}")
    print(f"branch: {res.branch}")
    print(f"TC_at_optimum: {_fmt(res.TC_at_opt)}")
    print(f"oracle_argmin: {_fmt(res.oracle_argopt)}")
    print(f"oracle_gap: {_fmt(res.oracle_gap)}")
    if res.eta is not None:
        print(f"TC_benchmark_no_fleet: {_fmt(res.tc_benchmark)}")
        print(f"eta: {_fmt(res.eta)}")
    if res.branch_mismatch:
        print("BranchMismatch: closed form and grid oracle disagree beyond resolution")
    for note in res.notes:
        print(f"note: {note}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="commuteq",
        description="Morning-commute bottleneck equilibria and parking/fleet policy",
    )
    parser.add_argument("--scenario", required=True, help="scenario parameter file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, regime=False, grid=False):
        sp.add_argument("--M", type=float, default=None, help="parking supply override")
        sp.add_argument("--NF", type=float, default=None, help="fleet size override")
        sp.add_argument("--out", default=None, help="write CSV artifact here")
        if regime:
            sp.add_argument("--regime", choices=_REGIMES, default="reserved")
            sp.add_argument("--verify", action="store_true",
                            help="cross-check against the fluid-queue simulator")
        if grid:
            sp.add_argument("--grid", required=True, help="lo:hi:step")
            sp.add_argument("--over", choices=("M", "NF"), default="M",
                            help="which control the grid sweeps")

    add_common(sub.add_parser("equilibrium", help="solve one equilibrium"), regime=True)
    add_common(sub.add_parser("optimize-parking", help="best parking supply at fixed NF"))
    add_common(sub.add_parser("optimize-fleet", help="best fleet size at fixed M"))
    add_common(sub.add_parser("sweep", help="tabulate the equilibrium over a grid"), grid=True)
    add_common(sub.add_parser("verify", help="simulator cross-check, nonzero exit on failure"),
               regime=True)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except VerificationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CommuteqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    p = load_scenario(args.scenario)
    M = args.M if args.M is not None else p.M
    NF = args.NF if args.NF is not None else p.NF

    if args.command in ("equilibrium", "verify"):
        out = _solve_regime(p, args.regime, M, NF)
        _print_outcome(out)
        if args.command == "verify" or args.verify:
            report = _run_verify(p, out)
            if args.command == "verify" and not report.passed:
                raise VerificationFailed("; ".join(report.messages))
        if args.out:
            simulator.simulate(p, out.profile).write_csv(args.out)
            print(f"trace written: {args.out}")
        return 0

    if args.command == "optimize-parking":
        res = policy.optimal_parking(p, NF=NF)
        _print_policy(res, lambda v: reserved.total_cost(p, M=v, NF=NF))
        if args.out:
            _write_curve(args.out, policy.grid_oracle(p, NF=NF, lo=0.0,
                                                      hi=derive(p, NF).NC0))
            print(f"curve written: {args.out}")
        return 0

    if args.command == "optimize-fleet":
        res = policy.optimal_fleet(p, M=M)
        _print_policy(res, lambda v: reserved.total_cost(p, M=M, NF=v))
        if args.out:
            _write_curve(args.out, policy.grid_oracle(p, M=M, lo=0.0,
                                                      hi=derive(p, 0.0).NF0))
            print(f"curve written: {args.out}")
        return 0

    if args.command == "sweep":
        lo, hi, step = _parse_grid(args.grid)
        rows = policy.sweep_rows(p, over=args.over, lo=lo, hi=hi, step=step, M=M, NF=NF)
        header = "control,NC,NT,Pr,Pf,TC,branch"
        print(header)
        lines = [",".join(_fmt(v) if not isinstance(v, str) else v for v in row)
                 for row in rows]
        for line in lines[:10]:
            print(line)
        if len(lines) > 10:
            print(f"... {len(lines) - 10} more rows")
        if args.out:
            with open(args.out, "w") as fh:
                fh.write("# schema: commuteq.sweep.v1\n" + header + "\n")
                fh.write("\n".join(lines) + "\n")
            print(f"sweep written: {args.out}")
        return 0

    raise ValidationError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())

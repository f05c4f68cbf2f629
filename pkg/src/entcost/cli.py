"""Batch command-line front end.

Reads channel files, runs monotones / simulations / brackets / distances, and
writes TSV reports with a fixed column order.  Every numeric value is
accompanied by its bound direction and the solver gap; reports are
deterministic for fixed inputs and seed, wall time being the only column
allowed to vary.  Exit codes: 0 success, 1 solver failure, 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import replace

from . import conic, fileio, metrics, monotones, simulate
from .conic import SolverFailure
from .fileio import ChannelFileError
from .monotones import FreeSetRelaxation
from .tensorcore import DimensionError

COLUMNS = ("channel", "quantity", "value", "direction", "relaxation",
           "epsilon", "status", "gap", "wall_ms", "seed")


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return format(x, ".12g")
    return str(x)


class Report:
    def __init__(self, seed: int):
        self.rows = []
        self.seed = seed
        self._t0 = time.perf_counter()

    def add(self, channel, quantity, value, direction, relaxation="-", epsilon=None,
            status="ok", gap=None):
        wall = int(1000 * (time.perf_counter() - self._t0))
        self.rows.append((channel, quantity, _fmt(value), direction, relaxation,
                          _fmt(epsilon), status, _fmt(gap), str(wall), str(self.seed)))

    def render(self) -> str:
        lines = ["\t".join(COLUMNS)]
        lines += ["\t".join(r) for r in self.rows]
        return "\n".join(lines) + "\n"


def _relaxation(args) -> FreeSetRelaxation:
    if args.relaxation == "ppt-choi":
        return FreeSetRelaxation.ppt_choi()
    if args.relaxation == "sepp-sampled":
        return FreeSetRelaxation.sepp_sampled(args.relax_samples, args.seed)
    return FreeSetRelaxation.ppt_state()


def _gap_of(bounded) -> float | None:
    sol = bounded.certificate
    return getattr(sol, "duality_gap", None)


def _load(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ChannelFileError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"{path} is not valid JSON: {exc}")
    if isinstance(data, dict) and "simulator" in data:
        data = data["simulator"]  # plan files carry their simulator inline
    ch, meta = fileio.channel_from_dict(data)
    return ch, meta.get("name") or os.path.basename(str(path))


def cmd_monotone(args, report: Report) -> None:
    ch, name = _load(args.channel)
    relax = _relaxation(args)
    for measure in args.measure:
        if measure == "dmax":
            if not args.against:
                raise ChannelFileError("dmax needs --against with a second channel")
            other, _ = _load(args.against)
            bv = monotones.dmax_channels(ch, other)
            report.add(name, "dmax_bits", bv.value, bv.direction, "-", None, "ok", 0.0)
        elif measure == "gen-rob":
            bv = monotones.gen_log_robustness_channel(
                ch, relax, args.epsilon, gap_tol=args.tol_gap, feas_tol=args.tol_feas)
            report.add(name, "gen_log_robustness_bits", bv.value, bv.direction,
                       bv.relaxation, args.epsilon, "ok", _gap_of(bv))
        elif measure == "std-rob":
            bv = monotones.std_log_robustness_channel(
                ch, relax, args.epsilon, gap_tol=args.tol_gap, feas_tol=args.tol_feas)
            report.add(name, "std_log_robustness_bits", bv.value, bv.direction,
                       bv.relaxation, args.epsilon, "ok", _gap_of(bv))
        elif measure == "power":
            bv = monotones.rob_gen_power(ch, restarts=args.restarts, seed=args.seed,
                                         gap_tol=args.tol_gap, feas_tol=args.tol_feas)
            report.add(name, "robustness_generating_power", bv.value, bv.direction,
                       bv.relaxation, None, "ok", 0.0)


def cmd_bracket(args, report: Report):
    ch, name = _load(args.channel)
    relax = _relaxation(args)
    br = simulate.cost_bracket(ch, args.epsilon, relax, seed=args.seed,
                               gap_tol=args.tol_gap, feas_tol=args.tol_feas)
    plan = br.upper_certificate
    report.add(name, "cost_lower_bits", br.lower_bits, "lower", relax.kind,
               args.epsilon, "ok", _gap_of(br.lower_certificate))
    report.add(name, "cost_upper_bits", br.upper_bits, "upper", "certified-plan",
               args.epsilon, "ok", 0.0)
    report.add(name, "plan_method", plan.method, "-", "-", args.epsilon, "ok", 0.0)
    report.add(name, "plan_k", plan.k, "-", "-", args.epsilon, "ok", 0.0)
    return plan


def cmd_simulate(args, report: Report):
    ch, name = _load(args.channel)
    if args.method == "teleport":
        plan = simulate.teleport_channel(ch)
        plan = replace(plan, fsepp_diagnostics=simulate.fsepp_sample_check(
            plan.m, samples=args.samples, seed=args.seed))
    else:
        relax = _relaxation(args)
        std = monotones.std_log_robustness_channel(
            ch, relax, args.epsilon, gap_tol=args.tol_gap, feas_tol=args.tol_feas)
        plan = simulate._gated_upper_bound(ch, std, args.epsilon, args.seed)
        if plan is None:
            raise SolverFailure("gated simulation could not be certified; "
                                "use --method teleport for an unconditional plan")
    diag = plan.fsepp_diagnostics
    report.add(name, "plan_method", plan.method, "-", "-", args.epsilon, "ok", 0.0)
    report.add(name, "plan_k", plan.k, "-", "-", args.epsilon, "ok", 0.0)
    report.add(name, "plan_ebits", plan.ebits, "upper", "-", args.epsilon, "ok", 0.0)
    report.add(name, "achieved_error", plan.achieved_error, "exact", "-",
               args.epsilon, "ok", 0.0)
    if diag is not None:
        report.add(name, "fsepp_worst_violation", diag.worst_violation, "-",
                   f"sampled:{diag.samples}", None,
                   "PASS(sampled)" if diag.passed else "FAIL", 0.0)
    return plan


def cmd_check_fsepp(args, report: Report) -> None:
    if args.samples < 1:
        raise ChannelFileError(f"samples must be >= 1, got {args.samples}")
    ch, name = _load(args.channel)
    diag = simulate.fsepp_sample_check(ch, samples=args.samples, seed=args.seed,
                                       tol=args.ptol)
    report.add(name, "fsepp_worst_violation", diag.worst_violation, "-",
               f"sampled:{diag.samples}", None,
               "PASS(sampled)" if diag.passed else "FAIL", 0.0)


def cmd_distance(args, report: Report) -> None:
    a, name_a = _load(args.channel)
    b, name_b = _load(args.against)
    res = metrics.diamond_distance(a, b, gap_tol=args.tol_gap, feas_tol=args.tol_feas)
    if res.status != "optimal":
        raise SolverFailure(f"diamond distance solve ended {res.status}")
    report.add(f"{name_a}|{name_b}", "half_diamond_distance", res.half_distance,
               "exact", "-", None, "ok", res.duality_gap)
    report.add(f"{name_a}|{name_b}", "witness_value", res.witness_value,
               "lower", "-", None, "ok", res.duality_gap)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol-feas", dest="tol_feas", type=float, default=1e-8)
    common.add_argument("--tol-gap", dest="tol_gap", type=float, default=1e-7)
    common.add_argument("--out", default=None, help="report path (default stdout)")

    parser = argparse.ArgumentParser(
        prog="entcost",
        description="Certified brackets on the one-shot entanglement cost of "
                    "bipartite channels")
    sub = parser.add_subparsers(dest="command", required=True)

    mono = sub.add_parser("monotone", parents=[common],
                          help="evaluate channel monotones")
    mono.add_argument("--channel", required=True)
    mono.add_argument("--measure", action="append", required=True,
                      choices=["dmax", "gen-rob", "std-rob", "power"])
    mono.add_argument("--against", default=None, help="second channel for dmax")
    mono.add_argument("--relaxation", default="ppt-choi",
                      choices=["ppt-choi", "sepp-sampled"])
    mono.add_argument("--relax-samples", type=int, default=64)
    mono.add_argument("--epsilon", type=float, default=0.0)
    mono.add_argument("--restarts", type=int, default=32)
    mono.set_defaults(func=cmd_monotone, writes_plan=False)

    br = sub.add_parser("bracket", parents=[common],
                        help="two-sided cost bracket with a stored plan")
    br.add_argument("--channel", required=True)
    br.add_argument("--relaxation", default="ppt-choi",
                    choices=["ppt-choi", "sepp-sampled"])
    br.add_argument("--relax-samples", type=int, default=64)
    br.add_argument("--epsilon", type=float, default=0.0)
    br.set_defaults(func=cmd_bracket, writes_plan=True)

    si = sub.add_parser("simulate", parents=[common],
                        help="construct and verify a simulating channel")
    si.add_argument("--channel", required=True)
    si.add_argument("--method", default="teleport", choices=["teleport", "bell-gated"])
    si.add_argument("--relaxation", default="ppt-choi",
                    choices=["ppt-choi", "sepp-sampled"])
    si.add_argument("--relax-samples", type=int, default=64)
    si.add_argument("--epsilon", type=float, default=0.0)
    si.add_argument("--samples", type=int, default=500,
                    help="separability-preservation samples")
    si.set_defaults(func=cmd_simulate, writes_plan=True)

    cf = sub.add_parser("check-fsepp", parents=[common],
                        help="sample a simulator for separability preservation")
    cf.add_argument("--channel", required=True)
    cf.add_argument("--samples", type=int, default=1000)
    cf.add_argument("--ptol", type=float, default=1e-8)
    cf.set_defaults(func=cmd_check_fsepp, writes_plan=False)

    di = sub.add_parser("distance", parents=[common],
                        help="half diamond distance between two channels")
    di.add_argument("--channel", required=True)
    di.add_argument("--against", required=True)
    di.set_defaults(func=cmd_distance, writes_plan=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if os.environ.get("ENTCOST_SOLVER_VERBOSE"):
        conic.VERBOSE = True

    report = Report(args.seed)
    try:
        plan = args.func(args, report)
    except (ChannelFileError, DimensionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1

    text = report.render()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        if args.writes_plan and plan is not None:
            fileio.write_plan(str(args.out) + ".plan.json", plan)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

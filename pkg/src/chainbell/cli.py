"""Command-line front door.

Subcommands: ``box`` (print a single-pair box), ``attack`` (run the
strategy against one function), ``verify`` (exhaustive non-signalling
checks), ``scan`` (CSV sweep over a function family).

Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage
error or infeasible size.  Output is a pure function of the command
line: all randomness is seeded through the function spec and echoed,
iteration orders are fixed, and numbers render deterministically
(exact values as p/q, decimals with 15 significant digits).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import analysis, nonsignalling
from .adversary import build_attack_partition, parse_function_spec
from .boxes import (
    MODE_QUANTUM,
    MODE_RATIONAL,
    BoxParams,
    SinglePairBox,
    allowed_pairs,
    bell_value,
    bias_box,
    build_unbiased_box,
)
from .nonsignalling import DEFAULT_EVAL_CAP, InfeasibleSizeError, NsReport
from .systems import build_product_system


def _decimal(value) -> str:
    return format(float(value), ".15g")


def _render(value) -> str:
    """Exact values as p/q, floats as 15-significant-digit decimals."""
    if value is None:
        return ""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return _decimal(value)
    return str(value)


def _jsonify(value):
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator,
                "decimal": _decimal(value)}
    return value


def _parse_eps(text: str) -> Fraction:
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"eps must be a fraction like 1/8, got {text!r}") from None
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2], got {text!r}")
    return eps


def _box_params(args) -> BoxParams:
    if args.mode == MODE_QUANTUM:
        if args.eps is not None:
            raise ValueError("quantum mode fixes eps to sin^2(pi/4N); drop --eps")
        return BoxParams.quantum(args.n_settings)
    eps = _parse_eps(args.eps) if args.eps is not None else Fraction(1, 8)
    return BoxParams.rational(args.n_settings, eps)


def _the_box(params: BoxParams, sigma: str) -> SinglePairBox:
    box = build_unbiased_box(params)
    if sigma != "none":
        box = bias_box(box, int(sigma), params.eps)
    return box


# ---------------------------------------------------------------------------
# box

def _cmd_box(args) -> int:
    params = _box_params(args)
    box = _the_box(params, args.sigma)
    allowed = allowed_pairs(params.n_settings)
    bell = bell_value(box)

    if args.format == "json":
        squares = []
        for a in range(params.n_settings):
            for b in range(params.n_settings):
                u, v = 2 * a, 2 * b + 1
                squares.append({
                    "u": u,
                    "v": v,
                    "allowed": (u, v) in allowed,
                    "cells": [[_jsonify(box.prob(a, b, x, y)) for x in (0, 1)]
                              for y in (0, 1)],
                })
        doc = {
            "n_settings": params.n_settings,
            "eps": _jsonify(params.eps),
            "mode": params.mode,
            "sigma": args.sigma,
            "bell_value": _jsonify(bell),
            "squares": squares,
        }
        print(json.dumps(doc, indent=2))
        return 0

    print(f"box: N={params.n_settings} eps={_render(params.eps)} "
          f"mode={params.mode} sigma={args.sigma}")
    print(f"bell value: {_render(bell)} = {_decimal(bell)}")
    cells = [_render(c) for c in box.cells]
    width = max(max(len(c) for c in cells), 4)
    for a in range(params.n_settings):
        for b in range(params.n_settings):
            u, v = 2 * a, 2 * b + 1
            tag = " (allowed)" if (u, v) in allowed else ""
            print(f"\nu={u} v={v}{tag}")
            print("      " + "  ".join(f"x={x}".ljust(width) for x in (0, 1)))
            for y in (0, 1):
                row = "  ".join(_render(box.prob(a, b, x, y)).ljust(width)
                                for x in (0, 1))
                print(f" y={y}  {row}")
    return 0


# ---------------------------------------------------------------------------
# attack

def _attack_json(report: analysis.AttackReport) -> dict:
    return {
        "function": report.function,
        "n": report.n,
        "n_settings": report.n_settings,
        "eps": _jsonify(report.eps),
        "mode": report.mode,
        "strategy": report.strategy,
        "distance": _jsonify(report.distance),
        "bound": _jsonify(report.bound),
        "ratio": _jsonify(report.ratio),
        "pr_k0_given_z0": _jsonify(report.pr_k0_given_z0),
        "pivotal_histogram": {str(k): v for k, v in sorted(report.pivotal_histogram.items())},
        "passed": report.passed,
        "z0_part": report.z0_part,
        "key_relabeled": report.key_relabeled,
        "trivial_guess": report.trivial_guess,
    }


def _cmd_attack(args) -> int:
    params = _box_params(args)
    f = parse_function_spec(args.function, args.n)
    report = analysis.run_attack(f, params)
    if args.format == "json":
        print(json.dumps(_attack_json(report), indent=2))
    else:
        print(f"function: {report.function} (n={report.n})")
        print(f"box: N={report.n_settings} eps={_render(report.eps)} mode={report.mode}")
        print(f"strategy: {report.strategy}")
        print(f"distance from uniform: {_render(report.distance)} "
              f"= {_decimal(report.distance)}")
        print(f"bound eps*2/(3n): {_render(report.bound)} = {_decimal(report.bound)}")
        if report.ratio is not None:
            print(f"ratio: {_decimal(report.ratio)}")
        print(f"pr[K=0|Z=0]: {_render(report.pr_k0_given_z0)}")
        if report.pivotal_histogram:
            hist = ", ".join(f"{i}: {c}" for i, c in
                             sorted(report.pivotal_histogram.items()))
            print(f"pivotal index histogram: {hist}")
        print(f"theorem check: {'pass' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# verify

def _verify_system(args, params: BoxParams):
    if args.system == "unbiased":
        if args.n is None:
            raise ValueError("--n is required for the unbiased system")
        return build_product_system(build_unbiased_box(params), args.n)
    if args.function is None:
        raise ValueError(f"--function is required for system {args.system!r}")
    f = parse_function_spec(args.function, args.n)
    partition = build_attack_partition(f, params)
    return partition.systems[0 if args.system == "attack-z0" else 1]


def _violation_json(v: nonsignalling.NsViolation) -> dict:
    return {
        "condition": v.condition,
        "side": v.side,
        "cut": v.cut,
        "summed_positions": list(v.summed_positions),
        "x_kept": list(v.x_kept),
        "y_kept": list(v.y_kept),
        "u_left": list(v.u_left),
        "v_left": list(v.v_left),
        "u_right": list(v.u_right),
        "v_right": list(v.v_right),
        "left": _jsonify(v.left),
        "right": _jsonify(v.right),
    }


def _report_json(report: NsReport) -> dict:
    return {
        "condition": report.condition,
        "passed": report.passed,
        "checks_performed": report.checks_performed,
        "violations_total": report.violations_total,
        "tolerance": _jsonify(report.tolerance),
        "violations": [_violation_json(v) for v in report.violations],
    }


def _cmd_verify(args) -> int:
    params = _box_params(args)
    system = _verify_system(args, params)
    if args.check == "ab":
        report = nonsignalling.check_ab(system, max_evals=args.eval_cap)
    elif args.check == "time-ordered":
        report = nonsignalling.check_time_ordered(system, max_evals=args.eval_cap)
    else:
        if not args.subset:
            raise ValueError("--subset is required for the subset check")
        subset = tuple(int(tok) for tok in args.subset.split(","))
        report = nonsignalling.check_subset(system, args.side, subset,
                                            max_evals=args.eval_cap)

    if args.format == "json":
        doc = {
            "system": args.system,
            "function": args.function,
            "n": system.n,
            "n_settings": params.n_settings,
            "eps": _jsonify(params.eps),
            "mode": params.mode,
            "report": _report_json(report),
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"system: {args.system}"
              + (f" function={args.function}" if args.function else "")
              + f" n={system.n} N={params.n_settings} eps={_render(params.eps)}")
        print(str(report))
        for v in report.violations:
            print(f"  witness side={v.side} cut={v.cut} "
                  f"u:{list(v.u_left)}->{list(v.u_right)} "
                  f"v:{list(v.v_left)}->{list(v.v_right)} "
                  f"x={list(v.x_kept)} y={list(v.y_kept)} "
                  f"left={_render(v.left)} right={_render(v.right)}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# scan

CSV_COLUMNS = ["family", "n", "N", "eps", "strategy", "distance", "bound",
               "ratio", "distance_times_n", "distance_times_sqrt_n",
               "pr_k0_given_z0"]


def _cmd_scan(args) -> int:
    params = _box_params(args)
    n_values = range(args.n_from, args.n_to + 1, args.step)
    rows = analysis.scan(args.family, n_values, params)

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        if row.error is not None:
            print(f"n={row.n}: {row.error}", file=sys.stderr)
            writer.writerow([row.family, row.n, row.n_settings,
                             _render(row.eps), "error", "", "", "", "", "", ""])
            continue
        writer.writerow([
            row.family, row.n, row.n_settings, _render(row.eps), row.strategy,
            _render(row.distance), _render(row.bound), _render(row.ratio),
            _render(row.distance_times_n), _render(row.distance_times_sqrt_n),
            _render(row.pr_k0_given_z0),
        ])
    text = out.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if any(row.passed is False for row in rows):
        return 1
    if any(row.error is not None for row in rows):
        return 2
    return 0


# ---------------------------------------------------------------------------

def _add_box_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-settings", type=int, default=2, metavar="N",
                        help="measurement settings per party (default 2)")
    parser.add_argument("--eps", default=None, metavar="P/Q",
                        help="adjacent-setting cross probability (default 1/8)")
    parser.add_argument("--mode", choices=[MODE_RATIONAL, MODE_QUANTUM],
                        default=MODE_RATIONAL)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainbell",
        description="Chained-Bell box systems, adversarial partitions and "
                    "exhaustive non-signalling verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_box = sub.add_parser("box", help="print a single-pair box")
    _add_box_flags(p_box)
    p_box.add_argument("--sigma", choices=["none", "0", "1"], default="none",
                       help="bias direction (default none)")
    p_box.add_argument("--format", choices=["table", "json"], default="table")
    p_box.set_defaults(func=_cmd_box)

    p_attack = sub.add_parser("attack", help="run the attack against one function")
    _add_box_flags(p_attack)
    p_attack.add_argument("--function", required=True, metavar="SPEC",
                          help="xor | majority | and | or | random:<seed> | hex:<digits>")
    p_attack.add_argument("--n", type=int, default=None)
    p_attack.add_argument("--format", choices=["text", "json"], default="text")
    p_attack.set_defaults(func=_cmd_attack)

    p_verify = sub.add_parser("verify", help="exhaustive non-signalling checks")
    _add_box_flags(p_verify)
    p_verify.add_argument("--system", choices=["unbiased", "attack-z0", "attack-z1"],
                          default="unbiased")
    p_verify.add_argument("--function", default=None, metavar="SPEC")
    p_verify.add_argument("--n", type=int, default=None)
    p_verify.add_argument("--check", choices=["ab", "time-ordered", "subset"],
                          default="time-ordered")
    p_verify.add_argument("--side", choices=["alice", "bob"], default="alice",
                          help="side for the subset check (default alice)")
    p_verify.add_argument("--subset", default=None, metavar="I,J,...",
                          help="1-based input positions for the subset check")
    p_verify.add_argument("--eval-cap", type=int, default=DEFAULT_EVAL_CAP)
    p_verify.add_argument("--format", choices=["text", "json"], default="text")
    p_verify.set_defaults(func=_cmd_verify)

    p_scan = sub.add_parser("scan", help="CSV sweep over a function family")
    _add_box_flags(p_scan)
    p_scan.add_argument("--family", required=True, metavar="SPEC")
    p_scan.add_argument("--n-from", type=int, required=True)
    p_scan.add_argument("--n-to", type=int, required=True)
    p_scan.add_argument("--step", type=int, default=1)
    p_scan.add_argument("--out", default=None, metavar="PATH.csv")
    p_scan.set_defaults(func=_cmd_scan)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InfeasibleSizeError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main(sys.argv[1:]))

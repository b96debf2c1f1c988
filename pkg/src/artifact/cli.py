"""The ``artifact`` command line.

Every subcommand reads its inputs in the text formats of the library
modules.  ``--format structured`` prints one JSON object instead of text.
Exit status is 0 on success, 1 when the library raises a domain error and 2
for malformed input or usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import calculus, hyper
from .errors import DomainError, InputSyntaxError
from .expr import eval_expr, parse_expr
from .formulas import (
    classify_delta_st,
    format_formula,
    parse_formula,
    rewrite_to_delta_st,
    transfer_collapse,
)
from . import forcing as fl
from .forcing.clausal import ConditionSpace
from .forcing.constructions import Staircase
from .forcing.fibers import describe_fiber


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _text_or_file(value: str) -> str:
    """Inline text, or the contents of a file when ``value`` names one.

    Semicolons separate lines, so a condition fits on one command-line argument.
    """
    if os.path.isfile(value):
        with open(value, encoding="utf-8") as fh:
            return fh.read()
    return value.replace(";", "\n")


def _condition(value: str) -> fl.Condition:
    return fl.parse_condition(_text_or_file(value))


def _fmt_condition(c: fl.Condition) -> str:
    return f"p: {fl.format_index_set(c.p)}\nq: {describe_fiber(c.q)}"


# subcommands -------------------------------------------------------------------------------

def cmd_hyper(args):
    value = eval_expr(parse_expr(args.expr), {"eps": hyper.epsilon()})
    value = hyper.truncate(value, args.order)
    kind = hyper.classify(value)
    record = {"value": hyper.format_lcnum(value), "class": kind}
    if hyper.is_limited(value):
        record["shadow"] = str(hyper.shadow(value))
    lines = [record["value"], f"class: {kind}"]
    if "shadow" in record:
        lines.append(f"shadow: {record['shadow']}")
    return "\n".join(lines), record


def cmd_deriv(args):
    value = calculus.derivative_at(parse_expr(args.expr), args.at, var=args.var)
    return str(value), {"derivative": str(value), "at": str(args.at)}


def cmd_integrate(args):
    f = parse_expr(args.expr)
    result = calculus.riemann_integral(f, args.lower, args.upper, mode=args.mode, var=args.var)
    if args.mode == "symbolic":
        return str(result), {"integral": str(result), "exact": True}
    record = {
        "integral": str(result.value),
        "exact": False,
        "order": result.order,
        "increment": str(result.increment),
        "levels": result.levels,
    }
    return f"{float(result.value):.12g} (levels {result.levels})", record


def cmd_tagged(args):
    f = parse_expr(args.expr)
    schemes = ["left", "right", "midpoint"] if args.scheme == "all" else [args.scheme]
    results = {s: calculus.tagged_sum_check(f, args.lower, args.upper, s, var=args.var) for s in schemes}
    text = "\n".join(f"{s}: {'ok' if ok else 'mismatch'}" for s, ok in results.items())
    return text, {"schemes": results}


def cmd_peano(args):
    study = calculus.peano_study(parse_expr(args.rhs), args.h0, args.x_max, levels=args.levels, grid=[args.at])[0]
    record = {
        "x": str(study.x),
        "values": [str(v) for v in study.values],
        "extrapolated": str(study.extrapolated),
        "ratios": [None if r is None else str(r) for r in study.ratios],
    }
    lines = [f"x = {study.x}"]
    for k, v in enumerate(study.values):
        lines.append(f"h = {args.h0 / 2 ** k}: {v}")
    lines.append(f"extrapolated: {study.extrapolated}")
    lines.append("ratios: " + " ".join(record["ratios"][i] or "-" for i in range(len(study.ratios))))
    return "\n".join(lines), record


def cmd_measure(args):
    e = calculus.parse_intervals(args.intervals)
    outer, inner = calculus.lebesgue_measures(e)
    record = {"set": calculus.format_intervals(e), "outer": str(outer), "inner": str(inner)}
    return f"outer: {outer}\ninner: {inner}", record


def cmd_rewrite(args):
    out, trace = rewrite_to_delta_st(parse_formula(args.formula), collapse=args.collapse)
    text = format_formula(out)
    if not args.quiet:
        text += "\n" + trace.to_text() if len(trace) else ""
    return text, {"result": format_formula(out), "trace": trace.records()}


def cmd_classify(args):
    verdict = classify_delta_st(parse_formula(args.formula))
    record = {"delta_st": verdict.delta_st, "prefix_length": verdict.prefix_length, "reason": verdict.reason}
    return str(verdict), record


def cmd_collapse(args):
    out = transfer_collapse(parse_formula(args.formula))
    return format_formula(out), {"result": format_formula(out)}


def cmd_force(args):
    c = _condition(args.condition)
    if args.mode == "los":
        verdict = fl.FORCED if fl.forces_los(c, args.formula, args.universe_rank) else "not forced"
    else:
        space = ConditionSpace.exhaustive(args.prelude_cap, args.period_cap, args.rank_cap, args.universe_rank)
        verdict = fl.forces_clausal(c, args.formula, space)
    return verdict, {"mode": args.mode, "verdict": verdict, "condition": _fmt_condition(c), "formula": args.formula}


def cmd_decide(args):
    c = _condition(args.condition)
    trace = Staircase()
    out = fl.decide_membership(c, args.name, args.bound, trace)
    bits = fl.standard_part_name(out, args.name, args.bound)
    steps = [{"n": n, "least": least, "branch": branch} for n, (_, least, branch) in enumerate(trace.steps)]
    record = {"condition": _fmt_condition(out), "bits": bits, "steps": steps}
    text = "\n".join([_fmt_condition(out), "bits: " + "".join(map(str, bits))])
    return text, record


def cmd_thick(args):
    report = fl.thickness_nu(fl.parse_family(args.family), args.m_max)
    rows = [{"m": r.m, "nu": r.nu, "witness": None if r.witness is None else sorted(r.witness)} for r in report.rows]
    lines = ["m  nu"]
    for r in report.rows:
        lines.append(f"{r.m:<2} {r.nu if r.thick else 'thin, witness ' + str(sorted(r.witness))}")
    return "\n".join(lines), {"family": fl.format_family(report.family), "rows": rows}


def _generic_rule(rule: str):
    kind, _, arg = rule.partition("=")
    if kind == "fix":
        z = fl.parse_hf(arg)
        return rule, lambda c: fl.fix_constant(c, z)[0]
    if kind == "diag":
        return rule, lambda c: fl.diag_name(c)[0]
    if kind == "restrict":
        p = fl.parse_index_set(arg)
        return rule, lambda c: c.with_p(c.p & p)
    if kind == "decide":
        name, _, bound = arg.partition(":")
        try:
            m, b = int(name), int(bound)
        except ValueError as exc:
            raise InputSyntaxError(f"decide needs NAME:BOUND, got {arg!r}") from exc
        return rule, lambda c: fl.decide_membership(c, m, b)
    raise InputSyntaxError(f"unknown rule {rule!r}; use fix=SET, diag, restrict=INDEXSET or decide=NAME:BOUND")


def cmd_generic(args):
    start = _condition(args.condition) if args.condition else fl.trivial_condition()
    chain = fl.pseudo_generic(start, [_generic_rule(s) for s in args.rule])
    texts = [_fmt_condition(c) for c in chain]
    text = "\n\n".join(f"# step {i}\n{t}" for i, t in enumerate(texts))
    return text, {"chain": texts}


def cmd_split(args):
    split = fl.split_fibers(fl.parse_fiber(_text_or_file(args.fiber)), fl.parse_index_set(args.over), args.horizon)
    record = {
        "p1": fl.format_index_set(split.p1),
        "p2": fl.format_index_set(split.p2),
        "stages": [list(s) for s in split.stages],
    }
    return f"p1: {record['p1']}\np2: {record['p2']}", record


# parser --------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=["text", "structured"], default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        return p

    def interval(p):
        p.add_argument("--from", dest="lower", type=_rational, required=True)
        p.add_argument("--to", dest="upper", type=_rational, required=True)
        p.add_argument("--var")

    p = add("hyper", cmd_hyper, "evaluate an expression in eps over Levi-Civita numbers")
    p.add_argument("expr")
    p.add_argument("--order", type=_rational, default=hyper.DEFAULT_ORDER, help="truncation order")

    p = add("deriv", cmd_deriv, "derivative as the shadow of difference quotients")
    p.add_argument("expr")
    p.add_argument("--at", type=_rational, required=True)
    p.add_argument("--var")

    p = add("integrate", cmd_integrate, "integral as the shadow of a hyperfinite Riemann sum")
    p.add_argument("expr")
    interval(p)
    p.add_argument("--mode", choices=["symbolic", "numeric"], default="symbolic")

    p = add("tagged", cmd_tagged, "compare tagged and untagged hyperfinite sums")
    p.add_argument("expr")
    interval(p)
    p.add_argument("--scheme", choices=["left", "right", "midpoint", "all"], default="all")

    p = add("peano", cmd_peano, "Euler polygons for y' = f(x, y), y(0) = 0")
    p.add_argument("rhs")
    p.add_argument("--h0", type=_rational, default=Fraction(1, 4))
    p.add_argument("--x-max", type=_rational, default=Fraction(1))
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--at", type=_rational, default=Fraction(1))

    p = add("measure", cmd_measure, "outer and inner measure of a finite union of intervals")
    p.add_argument("intervals", help="e.g. [0,1]+[2,5/2]")

    p = add("rewrite", cmd_rewrite, "rewrite a formula into Delta-st form")
    p.add_argument("formula")
    p.add_argument("--collapse", action="store_true", help="erase st marks afterwards")
    p.add_argument("--quiet", action="store_true", help="omit the trace")

    p = add("classify", cmd_classify, "report whether a formula is Delta-st")
    p.add_argument("formula")

    p = add("collapse", cmd_collapse, "erase the st prefix of a Delta-st formula")
    p.add_argument("formula")

    p = add("force", cmd_force, "decide whether a condition forces a formula")
    p.add_argument("condition", help="condition text (lines separated by ';') or a file")
    p.add_argument("formula")
    p.add_argument("--mode", choices=["los", "clausal"], default="los")
    p.add_argument("--universe-rank", type=int, default=3)
    p.add_argument("--prelude-cap", type=int, default=2)
    p.add_argument("--period-cap", type=int, default=2)
    p.add_argument("--rank-cap", type=int, default=2)

    p = add("decide", cmd_decide, "extend a condition to decide n in G_name for n <= bound")
    p.add_argument("condition")
    p.add_argument("--name", type=int, default=0)
    p.add_argument("--bound", type=int, required=True)

    p = add("thick", cmd_thick, "thickness table of a family of finite sets")
    p.add_argument("--family", required=True)
    p.add_argument("--m-max", type=int, default=8)

    p = add("generic", cmd_generic, "build a chain of extensions from extension rules")
    p.add_argument("--condition")
    p.add_argument("--rule", action="append", default=[], help="fix=SET, diag, restrict=INDEXSET, decide=NAME:BOUND")

    p = add("split", cmd_split, "split a growing rank-1 fiber over an index set")
    p.add_argument("fiber")
    p.add_argument("--over", default="N")
    p.add_argument("--horizon", type=int, default=64)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, record = args.func(args)
    except InputSyntaxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.format == "structured":
        print(json.dumps({"command": args.command, **record}, sort_keys=True))
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

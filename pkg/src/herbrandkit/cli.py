"""Command-line entry point.

Exit codes:
  0  success (normal form printed, countermodel verified, saturated, ...)
  1  input outside the unit-equational fragment, or no orientation found
  2  parse or configuration error
  3  refuted: the model fails, or the goal follows from the axioms
  4  inconclusive model check
  5  completion ran out of resources
  6  no finite model up to the requested size
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import etp, finite
from .completion import Limits, Refuted, ResourceOut, complete, oriented_system, saturate_or_load
from .completion import trace_json, trace_lines
from .errors import (
    CompletionError,
    FragmentError,
    OrderingError,
    RewriteError,
    SearchLimitError,
    SignatureError,
    TptpSyntaxError,
    UnorientedError,
)
from .model import INCONCLUSIVE, REFUTED, VERIFIED, HerbrandModel, verify_countermodel
from .ordering import OrderingConfig, Precedence, extend_ordering, load_ordering, parse_weights
from .rewriting import INNERMOST, OUTERMOST, Mode, normalize, oriented_rules
from .terms import Signature, format_term
from .tptp import (
    parse_equation,
    parse_problem,
    parse_saturation,
    parse_term,
    write_problem,
    write_saturation,
    write_trs,
)

EXIT_OK = 0
EXIT_FRAGMENT = 1
EXIT_CONFIG = 2
EXIT_REFUTED = 3
EXIT_INCONCLUSIVE = 4
EXIT_RESOURCE = 5
EXIT_NO_FINITE_MODEL = 6

ORDERING_ENV = "HERBRAND_ORDERING"


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


# ---------------------------------------------------------------------------
# shared helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _Exit(EXIT_CONFIG, f"cannot read {path}: {exc.strerror}") from None


def _ordering(args, signature: Signature) -> OrderingConfig | None:
    """The ordering named on the command line or by the environment, if any."""
    if args.lpo:
        cfg = OrderingConfig.lpo(Precedence.parse(args.lpo))
    elif args.kbo:
        weights = parse_weights(args.weights or "")
        cfg = OrderingConfig.kbo_config(
            Precedence.parse(args.kbo), signature, weights, args.variable_weight
        )
    elif args.ordering:
        cfg = load_ordering(args.ordering, signature)
    elif os.environ.get(ORDERING_ENV):
        cfg = load_ordering(os.environ[ORDERING_ENV], signature)
    else:
        return None
    return extend_ordering(cfg, signature)


def _equations(args):
    """Equations from --eq, --dump or --problem, and a signature covering them."""
    eqs = [parse_equation(text) for text in args.eq or ()]
    sig = Signature.from_terms(t for e in eqs for t in (e.lhs, e.rhs))
    if getattr(args, "dump", None):
        dump = parse_saturation(_read(args.dump))
        eqs += list(dump.equations)
        sig = sig.merge(dump.signature)
    if getattr(args, "problem", None):
        problem = parse_problem(_read(args.problem))
        if not args.dump and not args.eq:
            eqs += list(problem.axioms)
        sig = sig.merge(problem.signature)
    return eqs, sig


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text.rstrip("\n"))


def _limits(args) -> Limits:
    return Limits(args.max_steps, args.max_equations, args.max_term_size)


# ---------------------------------------------------------------------------
# commands


def cmd_normalize(args) -> int:
    eqs, sig = _equations(args)
    term = parse_term(args.term)
    sig = sig.extend([term])
    system = oriented_system(eqs, sig, _ordering(args, sig))
    trace = normalize(system, term, args.strategy)
    if args.format == "json":
        data = trace.to_dict()
        data["ordering"] = system.ordering.to_dict()
        data["mode"] = system.mode.value
        _emit(args, json.dumps(data, indent=2))
    else:
        lines = trace.lines() + [f"result: {format_term(trace.result)}"]
        _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_check_model(args) -> int:
    problem = parse_problem(_read(args.problem))
    dump = parse_saturation(_read(args.dump)) if args.dump else None
    sig = problem.signature.merge(dump.signature) if dump else problem.signature
    try:
        system = saturate_or_load(problem, dump, _ordering(args, sig), _limits(args))
    except CompletionError as exc:
        if exc.reason == "resource_out":
            raise _Exit(EXIT_RESOURCE, str(exc)) from None
        raise _Exit(EXIT_REFUTED, str(exc)) from None
    report = verify_countermodel(HerbrandModel.for_problem(system, problem), problem, args.bound)
    _emit(args, report.to_json() if args.format == "json" else report.summary())
    return {VERIFIED: EXIT_OK, REFUTED: EXIT_REFUTED, INCONCLUSIVE: EXIT_INCONCLUSIVE}[report.verdict]


def cmd_saturate(args) -> int:
    problem = parse_problem(_read(args.problem))
    outcome = complete(problem, _ordering(args, problem.signature), _limits(args))
    if isinstance(outcome, Refuted):
        code, status, body = EXIT_REFUTED, "refuted", None
    elif isinstance(outcome, ResourceOut):
        code, status, body = EXIT_RESOURCE, "resource_out", None
    else:
        code, status = EXIT_OK, "saturated"
        body = write_saturation(outcome.system.equations)
    if args.format == "json":
        data = {
            "status": status,
            "statistics": outcome.statistics.to_dict(),
            "trace": json.loads(trace_json(outcome.trace)),
        }
        if isinstance(outcome, ResourceOut):
            data["reason"] = outcome.reason
        if body is not None:
            data["ordering"] = outcome.system.ordering.to_dict()
            data["equations"] = [str(e) for e in outcome.system.equations]
        _emit(args, json.dumps(data, indent=2))
    elif body is not None:
        header = f"% saturated under {outcome.system.ordering.describe()}\n"
        _emit(args, header + body)
    elif isinstance(outcome, Refuted):
        _emit(args, "\n".join(["% refuted"] + trace_lines(outcome.trace)))
    else:
        _emit(args, f"% resource out: {outcome.reason}")
    return code


def cmd_export_trs(args) -> int:
    dump = parse_saturation(_read(args.dump))
    sig = dump.signature
    system = oriented_system(dump.equations, sig, _ordering(args, sig))
    rules = oriented_rules(system) if system.mode is Mode.ORIENTED else None
    if rules is None:
        raise UnorientedError(
            f"no reduction ordering found that orients every equation (tried {system.ordering.describe()})"
        )
    text = write_trs(rules, system.ordering)
    if args.format == "json":
        _emit(args, json.dumps({"ordering": system.ordering.to_dict(), "trs": text}, indent=2))
    else:
        _emit(args, text)
    return EXIT_OK


def cmd_finite(args) -> int:
    problem = parse_problem(_read(args.problem))
    report = finite.no_finite_model_up_to(problem, args.max_size, args.ceiling)
    _emit(args, json.dumps(report.to_dict(), indent=2) if args.format == "json" else report.summary())
    return EXIT_OK if report.witness is not None else EXIT_NO_FINITE_MODEL


def cmd_etp(args) -> int:
    if args.etp_command == "list":
        eqs = etp.enumerate_equations()
        if args.count:
            text = str(len(eqs))
        elif args.format == "json":
            text = json.dumps([{"number": i, "equation": str(e)} for i, e in enumerate(eqs, 1)], indent=2)
        else:
            text = etp.format_equation_list(eqs)
        _emit(args, text)
        return EXIT_OK
    premise = _etp_lookup(args.premise, args.mapping)
    conclusion = _etp_lookup(args.conclusion, args.mapping)
    problem = etp.implication_problem(premise, conclusion)
    _emit(args, write_problem(problem))
    return EXIT_OK


def _etp_lookup(text: str, mapping_path: str | None) -> etp.MagmaEquation:
    if text.isdigit():
        number = int(text)
        if mapping_path:
            reverse = {ext: internal for internal, ext in etp.load_index_mapping(mapping_path).items()}
            if number not in reverse:
                raise _Exit(EXIT_CONFIG, f"equation {number} is not in the mapping file")
            number = reverse[number]
        try:
            return etp.equation(number)
        except ValueError as exc:
            raise _Exit(EXIT_CONFIG, str(exc)) from None
    return etp.parse_magma_equation(text)


# ---------------------------------------------------------------------------
# parser


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", "-o", help="write the result to this file instead of stdout")


def _add_ordering(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--lpo", metavar="PREC", help='LPO with this precedence, e.g. "f>b>a"')
    group.add_argument("--kbo", metavar="PREC", help="KBO with this precedence")
    group.add_argument(
        "--ordering", metavar="FILE", help=f"ordering config file (default: ${ORDERING_ENV} if set)"
    )
    p.add_argument("--weights", help='KBO symbol weights, e.g. "f:2,a:1" (with --kbo)')
    p.add_argument("--variable-weight", type=int, default=1, help="KBO variable weight (with --kbo)")


def _add_limits(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-steps", type=int, default=Limits.max_steps)
    p.add_argument("--max-equations", type=int, default=Limits.max_equations)
    p.add_argument("--max-term-size", type=int, default=Limits.max_term_size)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="herbrandkit",
        description="Rewriting-based Herbrand countermodels for unit-equational problems.",
        epilog="exit codes: 0 ok, 1 fragment/unorientable, 2 parse/config error, 3 refuted, "
        "4 inconclusive, 5 resource out, 6 no finite model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="normalize a ground term and print the trace")
    p.add_argument("--eq", action="append", help='an equation such as "f(X,Y)=f(Y,X)" (repeatable)')
    p.add_argument("--dump", help="saturation file supplying the equations")
    p.add_argument("--problem", help="problem file supplying axioms and signature")
    p.add_argument("--term", required=True, help="ground term to normalize")
    p.add_argument("--strategy", choices=(INNERMOST, OUTERMOST), default=INNERMOST)
    _add_ordering(p)
    _add_output(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("check-model", help="verify the Herbrand countermodel of a problem")
    p.add_argument("problem", help="TPTP CNF problem file")
    p.add_argument("--dump", help="saturation file; completion runs when omitted")
    p.add_argument("--bound", type=int, default=2, help="operation bound for axiom instances")
    _add_ordering(p)
    _add_limits(p)
    _add_output(p)
    p.set_defaults(func=cmd_check_model)

    p = sub.add_parser("saturate", help="run completion on a problem")
    p.add_argument("problem", help="TPTP CNF problem file")
    _add_ordering(p)
    _add_limits(p)
    _add_output(p)
    p.set_defaults(func=cmd_saturate)

    p = sub.add_parser("export-trs", help="write a saturation as a TRS file")
    p.add_argument("dump", help="saturation file")
    _add_ordering(p)
    _add_output(p)
    p.set_defaults(func=cmd_export_trs)

    p = sub.add_parser("finite", help="search for finite models up to a size")
    p.add_argument("problem", help="TPTP CNF problem file")
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--ceiling", type=int, default=finite.DEFAULT_CEILING)
    _add_output(p)
    p.set_defaults(func=cmd_finite)

    p = sub.add_parser("etp", help="magma equations with at most four operations")
    etp_sub = p.add_subparsers(dest="etp_command", required=True)
    q = etp_sub.add_parser("list", help="print the numbered equation list")
    q.add_argument("--count", action="store_true", help="print only the number of equations")
    _add_output(q)
    q.set_defaults(func=cmd_etp)
    q = etp_sub.add_parser("gen", help="write the implication problem premise => conclusion")
    q.add_argument("premise", help="equation number or equation text")
    q.add_argument("conclusion", help="equation number or equation text")
    q.add_argument("--mapping", help="file of 'internal external' number pairs")
    _add_output(q)
    q.set_defaults(func=cmd_etp)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"herbrandkit: {exc}", file=sys.stderr)
        return exc.code
    except (FragmentError, UnorientedError, RewriteError) as exc:
        print(f"herbrandkit: {exc}", file=sys.stderr)
        return EXIT_FRAGMENT
    except (TptpSyntaxError, OrderingError, SignatureError, SearchLimitError, ValueError) as exc:
        print(f"herbrandkit: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CompletionError as exc:
        print(f"herbrandkit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE if exc.reason == "resource_out" else EXIT_REFUTED


if __name__ == "__main__":
    sys.exit(main())

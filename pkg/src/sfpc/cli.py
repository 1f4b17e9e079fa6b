"""``sfpc`` command line: check, run, translate, equiv, prims.

Exit codes: 0 success; 1 ill-typed program (check) or failed comparison
(equiv); 2 / 3 a Bottom / Top result (run); 64 usage error; 65 malformed
program (run, translate, equiv); 66 unreadable input or unwritable output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

from sfpc import prims
from sfpc.church import LAMBDA_REAL, church_payload, parse_church, translate_church
from sfpc.evaluator import DEFAULT_FUEL, church_eval_direct, eval_indexed
from sfpc.inference import (
    Bottom, Posterior, Top, dump_traces, emit, normalize, run_importance, summarize,
)
from sfpc.lexer import ParseError
from sfpc.oracles import OracleError, ComparisonTypeError, compare_programs
from sfpc.printer import print_program, print_type
from sfpc.surface import DesugarError, desugar, parse_sfpc
from sfpc.syntax import RealLit, Term, Type
from sfpc.typecheck import TypeCheckError, infer_type

EX_OK, EX_FAIL, EX_BOTTOM, EX_TOP = 0, 1, 2, 3
EX_USAGE, EX_DATAERR, EX_NOINPUT = 64, 65, 66

CHURCH_ALIAS = "LamReal"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonnegative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sfpc", description="Statistical fixed-point calculus toolkit.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("check", help="type-check a program and print its type")
    c.add_argument("file", help="a .sfpc or .church source file")

    r = sub.add_parser("run", help="importance sampling of a program")
    r.add_argument("file", help="a .sfpc or .church source file")
    r.add_argument("--samples", type=_positive, default=10_000, help="number of traces (default 10000)")
    r.add_argument("--seed", type=_nonnegative, default=0, help="base random seed (default 0)")
    r.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL,
                   help=f"evaluation index cap (default {DEFAULT_FUEL})")
    r.add_argument("--out", help="write samples or histogram to this path")
    r.add_argument("--format", choices=["csv", "hist"], default="csv", help="output format (default csv)")
    r.add_argument("--bins", type=_positive, help="histogram bin count (default Freedman-Diaconis)")
    r.add_argument("--direct", action="store_true",
                   help="evaluate Church programs directly instead of via the translation")
    r.add_argument("--traces", help="dump one line per trace to this path")
    r.add_argument("--emit-sfpc", dest="emit_sfpc", metavar="PATH",
                   help="write the translated SFPC program of a Church file to PATH")

    t = sub.add_parser("translate", help="translate a Church program to SFPC")
    t.add_argument("file", help="a .church source file")
    t.add_argument("--out", help="write the SFPC program here instead of stdout")

    e = sub.add_parser("equiv", help="test two programs for equivalence")
    e.add_argument("file1")
    e.add_argument("file2")
    e.add_argument("--mode", choices=["quad", "mc"], default="quad", help="comparison mode (default quad)")
    e.add_argument("--grid", type=_positive, help="quadrature points per dimension")
    e.add_argument("--samples", type=_positive, default=100_000, help="Monte Carlo traces (default 100000)")
    e.add_argument("--seed", type=_nonnegative, default=0, help="Monte Carlo seed (default 0)")
    e.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL,
                   help=f"evaluation index cap (default {DEFAULT_FUEL})")

    sub.add_parser("prims", help="list the primitive and kernel registry")
    return p


# --------------------------------------------------------------------------
# Loading programs
# --------------------------------------------------------------------------


@dataclass
class Loaded:
    path: Path
    language: str
    term: Term
    aliases: Mapping[str, Type]
    church: object | None = None


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def load_program(path: str) -> Loaded:
    """Parse, desugar or translate a source file; the language follows the extension."""
    src = _read(path)
    if path.endswith(".church"):
        prog = parse_church(src)
        return Loaded(Path(path), "church", translate_church(prog), {CHURCH_ALIAS: LAMBDA_REAL},
                      prog.raw)
    prog = parse_sfpc(src)
    return Loaded(Path(path), "sfpc", desugar(prog), dict(prog.aliases))


def _church_result(v):
    kind = church_payload(v)
    return RealLit(kind[1]) if kind[0] == "val" else "<fun>"


def _diagnostic(path, exc) -> str:
    return f"{path}: {exc}"


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_check(args) -> int:
    try:
        prog = load_program(args.file)
        ty = infer_type({}, prog.term)
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EX_NOINPUT
    except (ParseError, DesugarError, TypeCheckError) as exc:
        print(_diagnostic(args.file, exc), file=sys.stderr)
        return EX_FAIL
    print(print_type(ty, prog.aliases))
    return EX_OK


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_run(args) -> int:
    prog = load_program(args.file)
    infer_type({}, prog.term)
    if args.direct and prog.language != "church":
        raise UsageError("--direct applies to Church programs only")
    if args.emit_sfpc:
        if prog.language != "church":
            raise UsageError("--emit-sfpc applies to Church programs only")
        _write_text(args.emit_sfpc, print_program(prog.term, prog.aliases))
    if args.direct:
        subject, runner = prog.church, church_eval_direct
    else:
        subject, runner = prog.term, eval_indexed
    ws = run_importance(subject, args.samples, args.seed, args.fuel, runner=runner)
    if prog.language == "church":
        ws.samples = [replace(s, value=_church_result(s.value)) for s in ws.samples]
    if args.traces:
        try:
            dump_traces(subject, args.samples, args.traces, args.seed, args.fuel, runner=runner)
        except OSError as exc:
            raise InputError(f"cannot write {args.traces}: {exc.strerror or exc}") from exc
    result = normalize(ws)
    counts = ", ".join(f"{k}={v}" for k, v in sorted(ws.zero_counts.items())) or "none"
    print(f"traces: {ws.n}  converged: {len(ws.samples)}  measure-zero: {counts}")
    if isinstance(result, Bottom):
        print("result: bottom (zero total measure)")
        return EX_BOTTOM
    if isinstance(result, Top):
        print("result: top (weight overflow)")
        return EX_TOP
    print(f"result: posterior  Z-hat = {result.z_hat!r}")
    real = all(isinstance(v, RealLit) for v in ws.values)
    if real:
        s = summarize(ws)
        print(f"mean = {s.estimates['mean']!r}  sd = {s.estimates['sd']!r}  ESS = {s.ess:.1f}")
    if args.out:
        if args.format == "hist" and not real:
            raise UsageError("histograms need a Real-valued program")
        try:
            emit(result, args.out, args.format, args.bins)
        except OSError as exc:
            raise InputError(str(exc)) from exc
    assert isinstance(result, Posterior)
    return EX_OK


def cmd_translate(args) -> int:
    if not args.file.endswith(".church"):
        raise UsageError("translate expects a .church file")
    prog = load_program(args.file)
    text = print_program(prog.term, prog.aliases)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EX_OK


def cmd_equiv(args) -> int:
    p1, p2 = load_program(args.file1), load_program(args.file2)
    report = compare_programs(p1.term, p2.term, args.mode, m=args.grid, n=args.samples,
                              seed=args.seed, fuel_cap=args.fuel)
    print(report)
    return EX_OK if report.passed else EX_FAIL


def cmd_prims(args) -> int:
    for name, spec in sorted(prims.builtin_registry().items()):
        if isinstance(spec, prims.KernelSpec):
            print(f"{name}\tkernel\t{spec.arity}\t{spec.doc} (randomiser {spec.randomizer_name})")
        else:
            print(f"{name}\tprimitive\t{spec.arity}\t{spec.domain}")
    return EX_OK


COMMANDS = {"check": cmd_check, "run": cmd_run, "translate": cmd_translate,
            "equiv": cmd_equiv, "prims": cmd_prims}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"sfpc: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EX_NOINPUT
    except (ParseError, DesugarError, TypeCheckError, ComparisonTypeError, OracleError) as exc:
        print(f"sfpc: {exc}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())

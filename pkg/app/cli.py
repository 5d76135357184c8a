"""
Batch driver: check, flatten, run and fuzz.

Exit codes: 0 success, 1 program error (diagnostic on stderr), 2 usage error.

    python -m app.cli check corpus/section2.l42mu
    python -m app.cli flatten --trace corpus/rename.l42mu
    python -m app.cli run corpus/expression_problem.l42mu --expr "Plus.of(Num.of(1), Num.of(2)).eval()"
    python -m app.cli fuzz --check a2 --seed 0 --count 100
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from app.core.config import settings
from app.models.diagnostics import Reuse42Error
from app.services import harness_service, pipeline_service
from app.services.pipeline_service import PipelineOptions

EXIT_OK = 0
EXIT_PROGRAM_ERROR = 1
EXIT_USAGE = 2


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reuse42", description=settings.APP_DESCRIPTION)
    commands = parser.add_subparsers(dest="command", required=True)

    program = argparse.ArgumentParser(add_help=False)
    program.add_argument("paths", nargs="+", help=f"{settings.SOURCE_SUFFIX} files, concatenated in order")
    program.add_argument("--strict", action="store_true", default=settings.STRICT_MODE,
                         help="do not import abstract methods from implemented interfaces")
    program.add_argument("--no-prelude", dest="prelude", action="store_false", default=settings.PRELUDE_ENABLED,
                         help="disable the Int, Bool and Void intrinsics")
    program.add_argument("--dependency-mode", choices=settings.DEPENDENCY_MODES,
                         default=settings.DEFAULT_DEPENDENCY_MODE,
                         help="which compiled declarations are checked before each one")

    check = commands.add_parser("check", parents=[program], help="parse, flatten and type-check")
    check.add_argument("--explain-coherence", metavar="TYPE", help="print the abstract state of TYPE")

    flatten = commands.add_parser("flatten", parents=[program], help="print the flattened program")
    flatten.add_argument("--trace", action="store_true", help="print composition steps on stderr")

    run = commands.add_parser("run", parents=[program], help="evaluate an expression")
    run.add_argument("--expr", required=True, help="closed expression to evaluate")
    run.add_argument("--steps", action="store_true", help="print every reduction step")
    run.add_argument("--fuel", type=_positive, default=settings.DEFAULT_FUEL, help="step budget")
    run.add_argument("--in", dest="scope", metavar="CLASS", help="resolve bare nested names inside CLASS")

    fuzz = commands.add_parser("fuzz", help="run a property check on generated programs")
    fuzz.add_argument("--check", choices=sorted(settings.FUZZ_CHECKS), default="a2")
    fuzz.add_argument("--seed", type=int, default=0)
    fuzz.add_argument("--count", type=_positive, help="number of samples (default depends on the check)")
    fuzz.add_argument("--out", type=Path, default=None, help="directory for shrunken counterexamples")
    return parser


def _options(args: argparse.Namespace) -> PipelineOptions:
    return PipelineOptions(
        strict=args.strict,
        prelude=args.prelude,
        dependency_mode=args.dependency_mode,
        fuel=getattr(args, "fuel", None),
    )


def cmd_check(args: argparse.Namespace) -> int:
    result = pipeline_service.check(pipeline_service.read_sources(args.paths), _options(args))
    if args.explain_coherence:
        print(pipeline_service.explain_coherence(result.table, args.explain_coherence))
    else:
        print(f"ok: {len(result.table)} declarations")
    return EXIT_OK


def cmd_flatten(args: argparse.Namespace) -> int:
    result = pipeline_service.check(pipeline_service.read_sources(args.paths), _options(args))
    if args.trace:
        for line in result.trace_lines():
            print(line, file=sys.stderr)
    sys.stdout.write(pipeline_service.flatten_text(result))
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    options = _options(args)
    result = pipeline_service.check(pipeline_service.read_sources(args.paths), options)
    outcome, value = pipeline_service.run_expression(result, args.expr, options, args.scope, trace=args.steps)
    for line in outcome.trace:
        print(line)
    print(value)
    return EXIT_OK


def cmd_fuzz(args: argparse.Namespace) -> int:
    verdict = harness_service.run_fuzz(args.check, args.seed, args.count, args.out)
    status = "pass" if verdict.passed else "FAIL"
    print(f"{verdict.check}: {status} ({verdict.samples} samples, {verdict.failures} failures)")
    if verdict.message:
        print(verdict.message)
    for key, value in verdict.details.items():
        print(f"  {key}: {value}")
    for example in verdict.counterexamples:
        print(example)
    return EXIT_OK if verdict.passed else EXIT_PROGRAM_ERROR


COMMANDS = {
    "check": cmd_check,
    "flatten": cmd_flatten,
    "run": cmd_run,
    "fuzz": cmd_fuzz,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Reuse42Error as exc:
        print(exc.diagnostic.render(), file=sys.stderr)
        return EXIT_PROGRAM_ERROR
    except OSError as exc:
        print(f"reuse42: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command line: ``routeguard {protect,run,inspect-graph,bench,lint}``.

Exit codes: 0 ok, 1 pipeline error, 2 usage error, 13 tamper detected.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, router
from .bench import MODES, REPETITIONS, WARMUP, run_bench
from .cryptobox import seeded_source
from .depgraph import break_cycles, build_graph
from .errors import RouteguardError
from .manifest import load_manifest
from .minilang import ExitStatus, parse, run
from .protector import emit_config, load_protected, protect
from .rewriter import lint_return_types, print_warnings

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2
EXIT_TAMPER = router.TAMPER_EXIT_STATUS


def _out(args, text: str) -> None:
    if not args.quiet:
        sys.stdout.write(text)


def cmd_protect(args) -> int:
    manifest = load_manifest(args.manifest)
    program = manifest.program()
    rng = seeded_source(args.seed) if args.seed is not None else None
    warnings = lint_return_types(program, manifest.selects)
    if not args.quiet:
        print_warnings(warnings)
    result = protect(program, manifest.selects, rng, hint=args.hint)
    if args.dry_run:
        _out(args, f"descriptors: {result.descriptor_count}\n")
        return EXIT_OK
    if args.output is None:
        raise RouteguardError("protect needs -o/--output (or --dry-run)")
    result.write(args.output)
    _out(args, emit_config(result.config))
    return EXIT_OK


@dataclass(frozen=True)
class RunOutcome:
    exit_code: int
    stdout: list
    stderr: list


def run_protected(config, files, *, cache: bool = True) -> RunOutcome:
    """Init the router over ``files``, then interpret the entry point.

    Mirrors ``routeguard run`` without touching the process streams: the
    tamper message lands in ``stderr`` and the exit code is 13.
    """
    try:
        state = router.init(config, files, cache=cache)
    except router.TamperDetected as exc:
        return RunOutcome(EXIT_TAMPER, [], [exc.message])
    program = parse(files, config.entry)
    report = run(program, state)
    if report.status is ExitStatus.TAMPER_DETECTED:
        return RunOutcome(EXIT_TAMPER, report.output[:-1], [report.error])
    if report.status is ExitStatus.RUNTIME_ERROR:
        return RunOutcome(EXIT_ERROR, report.output, [f"runtime error: {report.error}"])
    return RunOutcome(EXIT_OK, report.output, [])


def cmd_run(args) -> int:
    config, files = load_protected(args.directory)
    outcome = run_protected(config, files)
    for line in outcome.stdout:
        print(line)
    sys.stdout.flush()
    for line in outcome.stderr:
        print(line, file=sys.stderr)
    return outcome.exit_code


def cmd_inspect_graph(args) -> int:
    program = load_manifest(args.manifest).program()
    graph = break_cycles(build_graph(program))
    sys.stdout.write(graph.to_dot() if args.dot else graph.to_text())
    return EXIT_OK


def cmd_bench(args) -> int:
    modes = MODES if args.mode == "all" else (args.mode,)
    report = run_bench(args.calls, modes, warmup=args.warmup, reps=args.reps)
    _out(args, report.format())
    return EXIT_OK


def cmd_lint(args) -> int:
    manifest = load_manifest(args.manifest)
    print_warnings(lint_return_types(manifest.program(), manifest.selects))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="deterministic randomness (tests only)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress informational output")

    p = argparse.ArgumentParser(prog="routeguard", parents=[common],
                                description="Protect minilang projects by routing cross-file calls.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("protect", parents=[common], help="rewrite, seal and emit a protected project")
    sp.add_argument("manifest", type=Path)
    sp.add_argument("-o", "--output", type=Path, help="output directory")
    sp.add_argument("--dry-run", action="store_true", help="count descriptors, write nothing")
    sp.add_argument("--hint", action="store_true",
                    help="add a plaintext callee hint to each forward_call (faster key choice, leaks the callee file)")
    sp.set_defaults(func=cmd_protect)

    sp = sub.add_parser("run", parents=[common], help="verify and run a protected project")
    sp.add_argument("directory", type=Path)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("inspect-graph", parents=[common], help="print the file dependency graph")
    sp.add_argument("manifest", type=Path)
    sp.add_argument("--dot", action="store_true", help="emit Graphviz digraph text")
    sp.set_defaults(func=cmd_inspect_graph)

    sp = sub.add_parser("bench", parents=[common], help="time direct vs routed calls")
    sp.add_argument("-n", "--calls", type=int, default=1_000_000, help="calls per mode (default 10^6)")
    sp.add_argument("--mode", choices=("all",) + MODES, default="all")
    sp.add_argument("--reps", type=int, default=REPETITIONS, help="timed repetitions per mode")
    sp.add_argument("--warmup", type=int, default=WARMUP, help="untimed calls per mode")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("lint", parents=[common], help="warn about callees with a unique return type")
    sp.add_argument("manifest", type=Path)
    sp.set_defaults(func=cmd_lint)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.seed = getattr(args, "seed", None)
    args.quiet = getattr(args, "quiet", False)
    try:
        return args.func(args)
    except (RouteguardError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

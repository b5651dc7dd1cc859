"""Command line front end.

`folwerk check FILE` parses a suite file, runs its queued checks in order,
prints one line per check, and exits 0 only when every check passed.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 any input
or usage error, 3 a rewrite or completion budget ran out.
"""

from __future__ import annotations

import argparse
import os
import sys

from .dsl import parse
from .errors import BudgetExceededError, FolwerkError
from .runner import run
from .windows import DEFAULT_WINDOW, Window

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET = 3


def _window_arg(text: str) -> Window:
    fields = {}
    for piece in text.split(","):
        key, _, value = piece.partition("=")
        if key not in ("w", "d") or not value.isdigit():
            raise argparse.ArgumentTypeError(
                f"bad window spec {text!r}, expected w=W,d=D"
            )
        fields[key] = int(value)
    if not fields:
        raise argparse.ArgumentTypeError("empty window spec")
    return Window(
        weight=fields.get("w", DEFAULT_WINDOW.weight),
        poly_degree=fields.get("d", DEFAULT_WINDOW.poly_degree),
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="folwerk",
        description="exact-arithmetic checks for derived foliation presentations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    chk = sub.add_parser("check", help="run the checks queued in a suite file")
    chk.add_argument("file", help="suite file to parse and run")
    chk.add_argument(
        "--json",
        metavar="DIR",
        default=None,
        help="write one JSON report per check into DIR",
    )
    chk.add_argument(
        "--trace",
        action="store_true",
        help="include rewrite traces in mate check reports",
    )
    chk.add_argument(
        "--window",
        type=_window_arg,
        default=None,
        metavar="w=W,d=D",
        help="override the verification window for every check",
    )
    chk.add_argument(
        "--parallel",
        action="store_true",
        help="run independent checks on a thread pool",
    )
    return parser


def _report_error(e: FolwerkError) -> None:
    where = ""
    index = getattr(e, "check_index", None)
    if index is not None:
        where = f" in check {index} ({getattr(e, 'check_target', '?')})"
    print(f"folwerk: error{where}: {e.kind}: {e}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    try:
        with open(args.file, encoding="utf-8") as handle:
            source = handle.read()
    except OSError as e:
        print(f"folwerk: cannot read {args.file}: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        ws = parse(source)
        res = run(
            ws,
            json_dir=args.json,
            trace=args.trace,
            window=args.window,
            parallel=args.parallel,
            source_name=os.path.basename(args.file),
        )
    except BudgetExceededError as e:
        _report_error(e)
        return EXIT_BUDGET
    except FolwerkError as e:
        _report_error(e)
        return EXIT_INPUT_ERROR

    for out in res.outcomes:
        line = f"check {out.index}: {out.target} ({out.kind}) "
        if out.passed:
            line += "pass"
        else:
            line += "FAIL [" + ", ".join(out.failing_conditions()) + "]"
        print(line)
    n = len(res.outcomes)
    failed = sum(1 for o in res.outcomes if not o.passed)
    tail = f", {failed} failed" if failed else ""
    print(f"{n} checks: {n - failed} passed{tail}")
    return EXIT_PASS if res.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())

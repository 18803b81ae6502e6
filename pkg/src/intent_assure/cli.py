"""Command line entry point: ``intent-assure run <scenario>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import AssuranceError
from .loop import run_scenario
from .planner import PLANNER_MODES, make_planner
from .report import FORMATS, emit_report
from .scenario import BUNDLED, load_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="intent-assure", description="Fulfil and assure an intent on a simulated testbed.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and emit a report")
    run.add_argument("scenario", help=f"scenario file or bundled name ({', '.join(BUNDLED)})")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--planner", choices=PLANNER_MODES, default=None, help="override the scenario planner mode")
    run.add_argument("--format", choices=FORMATS, default="text")
    run.add_argument("--output", "-o", type=Path, default=None, help="write the report here instead of stdout")
    run.add_argument("--transcript", type=Path, default=None, help="transcript to replay (replay mode)")
    run.add_argument("--record", type=Path, default=None, help="record the chat exchanges here (llm mode)")

    sub.add_parser("scenarios", help="list bundled scenarios")
    return parser


def _run(args) -> int:
    scenario = load_scenario(args.scenario)
    mode = args.planner or scenario.planner
    transcript = args.transcript or scenario.transcript
    planner = make_planner(mode, transcript=transcript, record=args.record)
    result = run_scenario(scenario, seed=args.seed, planner=planner, record_latency=mode == "llm")
    text = emit_report(result, args.format)
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text, encoding="utf-8")
    return 0 if result.phase != "failed" else 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "scenarios":
        print("\n".join(BUNDLED))
        return 0
    try:
        return _run(args)
    except AssuranceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

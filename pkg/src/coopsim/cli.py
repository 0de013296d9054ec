"""Command line entry point.

Exit codes: 0 success, 1 invalid scenario, 2 runtime failure.
Log verbosity comes from ``COOPSIM_LOG_LEVEL`` (default WARNING).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from coopsim.engine import InvalidScenario, run
from coopsim.metrics import emit_metrics, sweep
from coopsim.scenario_io import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

log = logging.getLogger("coopsim")


def _seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    if len(set(seeds)) != len(seeds):
        raise argparse.ArgumentTypeError("seeds must be distinct")
    return seeds


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for runtime failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coopsim", description="Cooperative offloading simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("file")

    p = sub.add_parser("run", help="simulate one scenario and emit per-round metrics")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", default=None)

    p = sub.add_parser("sweep", help="run once per seed and aggregate summaries")
    p.add_argument("file")
    p.add_argument("--seeds", type=_seeds, required=True, help="comma separated, e.g. 1,2,3")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("COOPSIM_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.file)
        if getattr(args, "seed", None) is not None:
            scenario = dataclasses.replace(scenario, seed=args.seed)
            scenario.validate()
    except (ScenarioError, InvalidScenario, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        if args.command == "validate":
            print(f"ok: {len(scenario.graph.vertices)} devices, "
                  f"{len(scenario.graph.links)} links, {scenario.rounds} rounds")
        elif args.command == "run":
            _write(emit_metrics(run(scenario), args.format), args.out)
        else:
            _write(sweep(scenario, args.seeds, workers=args.workers).to_csv(), args.out)
    except Exception as exc:
        log.debug("run failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``stablefund run|replay|fee-report|check-log``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .amount import parse_amount
from .errors import EngineError, InvariantViolation, MalformedScenario
from .eventlog import check_log
from .fees import FRAMEWORK_BPS, TRADITIONAL_BPS, fee_comparison
from .scenario import replay_verify, run_scenario, write_outputs


def _run(args) -> int:
    result = run_scenario(args.scenario, verify=args.verify)
    out = write_outputs(result, args.out)
    engine = result.engine
    print(f"{result.scenario.name}: {len(result.outcomes)} commands, {len(result.rejections)} rejected, "
          f"{len(engine.log)} events")
    print(f"final hash {result.final_hash}")
    if args.verify:
        print(f"invariants checked after {engine.events_checked} events: ok")
    print(f"outputs written to {out}")
    return 0


def _replay(args) -> int:
    verdict = replay_verify(args.scenario)
    print("match" if verdict else "mismatch", verdict.first_hash, verdict.second_hash)
    return 0 if verdict else 1


def _fee_report(args) -> int:
    report = fee_comparison(parse_amount(args.gross), args.traditional_bps, args.framework_bps)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def _check_log(args) -> int:
    verdict = check_log(Path(args.events).read_text(encoding="utf-8", errors="surrogateescape"))
    print(verdict)
    return 0 if verdict else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablefund", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario and write its outputs")
    p.add_argument("scenario")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--verify", action="store_true", help="check invariants after every event")
    p.set_defaults(func=_run)

    p = sub.add_parser("replay", help="run a scenario twice and compare final chain hashes")
    p.add_argument("scenario")
    p.set_defaults(func=_replay)

    p = sub.add_parser("fee-report", help="compare platform and framework fees")
    p.add_argument("--gross", required=True,
                   help="gross raised: integer minor units or a decimal coin amount like 100000.0")
    p.add_argument("--traditional-bps", type=int, default=TRADITIONAL_BPS)
    p.add_argument("--framework-bps", type=int, default=FRAMEWORK_BPS)
    p.set_defaults(func=_fee_report)

    p = sub.add_parser("check-log", help="verify the hash chain of an exported events.jsonl")
    p.add_argument("events")
    p.set_defaults(func=_check_log)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except MalformedScenario as exc:
        print(f"malformed scenario: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except (EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

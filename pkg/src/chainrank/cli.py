"""Command-line entry point.

    chainrank <stage> --config experiment.json [overrides...]

Stages: index, simulate, chains, prefs, train, rerank, interleave, report.
Exit codes: 0 success, 1 usage error, 2 data error.  Set CHAINRANK_LOG to
debug/info/warning to control verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import ChainrankError
from .pipeline import ExperimentConfig, run_stage

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage errors are 1 here
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="chainrank", description=__doc__)
    sub = parser.add_subparsers(dest="stage", required=True)

    def add(name, **extra_help):
        p = sub.add_parser(name, **extra_help)
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--workdir", help="override the artifact directory")
        p.add_argument("--sessions", type=int, help="override training session count")
        p.add_argument("--eval-sessions", type=int, dest="eval_sessions",
                       help="override evaluation session count")
        return p

    add("index", help="build the document index")
    add("simulate", help="generate a click log with ground truth")
    add("chains", help="segment the log into query chains")
    p = add("prefs", help="generate preference judgments")
    p.add_argument("--mode", choices=["qc", "nc"], default="qc")
    p = add("train", help="train a ranking model from preferences")
    p.add_argument("--mode", choices=["qc", "nc"], default="qc")
    p = add("rerank", help="rank a query with a trained model")
    p.add_argument("--query", required=True)
    p.add_argument("--mode", choices=["qc", "nc", "base"], default="qc")
    p.add_argument("--k", type=int)
    p = add("interleave", help="run interleaved evaluation")
    p.add_argument("--pair", help="e.g. qc,base (default: all configured comparisons)")
    add("report", help="summarize interleaved evaluations")
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("CHAINRANK_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT

    overrides = {
        key: getattr(args, key)
        for key in ("seed", "workdir", "sessions", "eval_sessions")
        if getattr(args, key, None) is not None
    }
    try:
        cfg = ExperimentConfig.from_file(args.config, overrides)
        if args.stage == "rerank":
            ranking = run_stage("rerank", cfg, query=args.query, mode=args.mode, k=args.k)
            for e in ranking.entries:
                print(f"{e.doc_id}\t{e.score:.6f}\t{e.origin}")
        elif args.stage in ("prefs", "train"):
            run_stage(args.stage, cfg, mode=args.mode)
        elif args.stage == "interleave":
            pair = tuple(args.pair.split(",")) if args.pair else None
            if pair is not None and len(pair) != 2:
                parser.error("--pair must look like qc,base")
            run_stage("interleave", cfg, pair=pair)
        elif args.stage == "report":
            report, text = run_stage("report", cfg)
            print(text)
            print(json.dumps(report, sort_keys=True))
        else:
            run_stage(args.stage, cfg)
    except ChainrankError as exc:
        print(f"chainrank: {exc}", file=sys.stderr)
        return DATA_EXIT
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point: ``obldamp {baseline,optimize,indices,oracle,bench}``.

On failure the last line written to stderr is a single JSON object, e.g.
``{"status": "error", "type": "ParseError", "message": "...", "file": "x.at2", "line": 7}``,
and the exit code is nonzero (2 for bad input, 3 for simulation failure,
1 otherwise).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import experiments
from .config import ExperimentConfig, load_config
from .errors import DegenerateRecordError, InputError, ParseError, SimulationError


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config (defaults when omitted)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
    common.add_argument("--seed", type=int, metavar="N", help="master seed (overrides the config)")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="concurrent runs")

    parser = argparse.ArgumentParser(prog="obldamp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("baseline", parents=[common], help="uncontrolled responses and J normalizers")
    sub.add_parser("optimize", parents=[common], help="damper placement campaign over all cells")
    p = sub.add_parser("indices", parents=[common], help="J1-J6 for given layout files")
    p.add_argument("--layout", action="append", default=[], metavar="PATH",
                   help="story,count CSV; repeat for several methods")
    sub.add_parser("oracle", parents=[common], help="exhaustive optimum and hit rates on a small frame")
    sub.add_parser("bench", parents=[common], help="benchmark-function statistics")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.out:
        cfg = replace(cfg, output=args.out)
    return cfg


def _error_line(exc: BaseException) -> dict:
    info = {"status": "error", "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        info["message"] = exc.message
        if exc.path:
            info["file"] = exc.path
        if exc.line is not None:
            info["line"] = exc.line
    if isinstance(exc, SimulationError) and exc.step is not None:
        info["step"] = exc.step
    if isinstance(exc, experiments.CampaignError):
        info["failed_cells"] = sorted(exc.failed)
    return info


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads < 1:
        print(json.dumps({"status": "error", "type": "InputError", "message": "--threads must be >= 1"}),
              file=sys.stderr)
        return 2
    try:
        cfg = _config(args)
        out = cfg.output
        if args.command == "baseline":
            experiments.cmd_baseline(cfg, out)
        elif args.command == "optimize":
            experiments.cmd_optimize(cfg, out, args.threads)
        elif args.command == "indices":
            experiments.cmd_indices(cfg, out, args.layout)
        elif args.command == "oracle":
            experiments.cmd_oracle(cfg, out, args.threads)
        elif args.command == "bench":
            experiments.cmd_bench(cfg, out, args.threads)
    except (InputError, ParseError, DegenerateRecordError) as exc:
        print(json.dumps(_error_line(exc)), file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(json.dumps(_error_line(exc)), file=sys.stderr)
        return 3
    except (experiments.CampaignError, OSError) as exc:
        print(json.dumps(_error_line(exc)), file=sys.stderr)
        return 1
    print(f"wrote {args.command} results to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

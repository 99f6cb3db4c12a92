"""``lab`` command line: run, list and audit scenarios.

Exit codes: 0 when every verdict passes, 2 when any verdict fails,
1 on an execution error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .report import ScenarioConfig, emit_report
from .scenarios import SCENARIOS, run_scenario

FORMATS = ("json", "csv", "md")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description="Run registered boundary-value experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("scenario")
    run.add_argument("--config", help="JSON configuration file")
    run.add_argument("--mesh", type=float, action="append",
                     help="mesh width; repeat for a sweep (overrides the config)")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="output directory for json, csv and md reports")
    run.add_argument("--format", choices=FORMATS, action="append", help="restrict output formats")
    sub.add_parser("list", help="list registered scenarios")
    audit = sub.add_parser("audit", help="regularity audit of one shape")
    audit.add_argument("shape")
    audit.add_argument("--mesh", type=float, action="append")
    audit.add_argument("--seed", type=int, default=0)
    audit.add_argument("--out")
    return p


def _config(args) -> ScenarioConfig:
    over = {"meshes": args.mesh, "seed": args.seed, "out": args.out}
    if args.config:
        return ScenarioConfig.from_json(args.config, scenario=args.scenario, **over)
    return ScenarioConfig.from_dict({"scenario": args.scenario,
                                     **{k: v for k, v in over.items() if v is not None}})


def _finish(rep, out, formats) -> int:
    for line in rep.summary_lines():
        print(line)
    for k, v in sorted(rep.constants.items()):
        print(f"  {k} = {v:.6g}" if isinstance(v, float) else f"  {k} = {v}")
    if out:
        for fmt in formats or FORMATS:
            emit_report(rep, fmt, Path(out) / fmt if len(formats or FORMATS) > 1 else out)
    verdict = "PASS" if rep.passed else "FAIL"
    print(f"{rep.scenario}: {verdict} ({sum(c.passed for c in rep.checks)}/{len(rep.checks)} checks,"
          f" {rep.wall_time:.2f} s)")
    return 0 if rep.passed else 2


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list":
            for name, sc in SCENARIOS.items():
                print(f"{name:28s} {sc.summary}")
            return 0
        if args.command == "audit":
            cfg = ScenarioConfig.from_dict({
                "scenario": "regularity-audit", "seed": args.seed,
                "options": {"shapes": [args.shape], "tubes": []},
                **({"meshes": args.mesh} if args.mesh else {})})
            return _finish(run_scenario(cfg), args.out, None)
        cfg = _config(args)
        return _finish(run_scenario(cfg), cfg.out, args.format)
    except Exception as exc:  # noqa: BLE001 - any failure maps to exit code 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: verify, run, sweep, report, config."""

from __future__ import annotations

import argparse
import json
import sys

from .harness import RunConfig, cmd_report, cmd_run, cmd_sweep, cmd_verify


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="stripflow",
        description="Pseudo-spectral strip-flow experiments: property "
        "verification, decay runs, and aspect-ratio sweeps.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the property suite")
    p_verify.add_argument("--nx", type=int, default=64, help="grid Nx for the suite")
    p_verify.add_argument("--ny", type=int, default=33, help="grid Ny for the suite")
    p_verify.add_argument(
        "--inject-fault",
        choices=["phi"],
        default=None,
        help="corrupt the dyadic cutoffs to exercise the failure path",
    )

    p_run = sub.add_parser("run", help="execute one configured solver run")
    p_run.add_argument("--config", required=True, help="path to the JSON config")

    p_sweep = sub.add_parser("sweep", help="execute the aspect-ratio sweep")
    p_sweep.add_argument("--config", required=True, help="path to the JSON config")

    p_report = sub.add_parser("report", help="summarize a run or sweep directory")
    p_report.add_argument("directory", help="directory written by run or sweep")

    p_config = sub.add_parser("config", help="configuration helpers")
    p_config.add_argument(
        "--schema",
        action="store_true",
        help="print every key with its default and documentation",
    )

    args = ap.parse_args(argv)

    if args.command == "verify":
        report = cmd_verify(Nx=args.nx, Ny=args.ny, corrupt=args.inject_fault)
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0 if report["passed"] else 1

    if args.command == "run":
        out = cmd_run(RunConfig.from_json(args.config))
        print(out)
        return 0

    if args.command == "sweep":
        result = cmd_sweep(RunConfig.from_json(args.config))
        for eps, err in zip(result.eps, result.sup_errors):
            print(f"eps={eps:g}  sup_error={err:.6e}")
        if result.slope is not None:
            print(f"slope={result.slope:.4f}")
        else:
            print("slope fit skipped")
        print(result.directory)
        return 0

    if args.command == "report":
        for path in cmd_report(args.directory):
            print(path)
        return 0

    if args.command == "config":
        if args.schema:
            json.dump(RunConfig.schema(), sys.stdout, indent=2)
        else:
            json.dump(RunConfig().to_dict(), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())

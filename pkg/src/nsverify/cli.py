"""Command-line entry point.

Subcommands:

* ``run <config>``    execute one scenario file, emit CSV/JSON/summary
* ``suite <name>``    run a named acceptance group (identities, decay, ode,
                      scaling, weakform, all)
* ``profiles``        export the cutoff tables as CSV

``NSVERIFY_FFT_WORKERS`` caps the FFT thread count.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cutoffs import export_profile_table, make_profile
from .errors import ConfigurationError
from .harness import (
    SUITES,
    format_summary_table,
    load_scenario,
    run_scenario,
    run_suite,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsverify",
        description="pseudospectral Navier-Stokes energy-identity verifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario config file")
    run_p.add_argument("config", type=Path)
    run_p.add_argument("--seed", type=int, default=None, help="override the seed")
    run_p.add_argument("--out-dir", type=Path, default=Path("out"))
    run_p.add_argument("--tolerance-scale", type=float, default=None)

    suite_p = sub.add_parser("suite", help="run a named acceptance group")
    suite_p.add_argument("name", choices=sorted(SUITES))
    suite_p.add_argument("--out-dir", type=Path, default=Path("out"))

    prof_p = sub.add_parser("profiles", help="emit cutoff profile tables")
    prof_p.add_argument("--alpha", type=float, default=0.1)
    prof_p.add_argument("--out-dir", type=Path, default=Path("out"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        try:
            cfg = load_scenario(args.config)
        except (ConfigurationError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        if args.seed is not None:
            cfg.seed = args.seed
        if args.tolerance_scale is not None:
            cfg.tolerance_scale = args.tolerance_scale
        result = run_scenario(cfg, args.out_dir, scenario_name=args.config.stem)
        if result.exit_code in (2, 3):
            print(result.message, file=sys.stderr)
        else:
            print(format_summary_table(result.scenario, result.summaries), end="")
            if result.message:
                print(result.message)
        return result.exit_code

    if args.command == "suite":
        try:
            code, _ = run_suite(args.name, out_dir=args.out_dir)
        except ConfigurationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return code

    if args.command == "profiles":
        out = args.out_dir
        out.mkdir(parents=True, exist_ok=True)
        for kind in ("phi", "one_minus_phi", "tilde"):
            export_profile_table(make_profile(kind), out / f"{kind}.csv")
        chi = make_profile("chi", args.alpha)
        export_profile_table(chi, out / f"chi_alpha{args.alpha:g}.csv")
        print(f"profile tables written to {out}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())

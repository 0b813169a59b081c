"""Command-line entry point: ``pimc run | compare | scan``.

Settings are resolved as flags > environment > config file > defaults. The
only environment setting is ``PIMC_OUTPUT_DIR``. Progress goes to stderr.

Exit codes: 0 success, 2 configuration error, 3 runtime or corrupted
chain, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from pimc.config import parse_config
from pimc.errors import ConfigurationError, CorruptedStateError
from pimc.runner import compare, run_experiment, tau_scan

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4

OUTPUT_ENV = "PIMC_OUTPUT_DIR"


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="flat TOML configuration file")
    p.add_argument("--seed", type=int, help="run a single chain with this seed")
    p.add_argument("--seeds", type=_csv_ints, help="comma-separated seeds, one chain each")
    p.add_argument("--action", choices=["primitive", "constant_force", "simplified"])
    p.add_argument("--potential", choices=["coulomb", "harmonic", "free"])
    p.add_argument("--tau", type=float)
    p.add_argument("--n-beads", type=int, dest="n_beads")
    p.add_argument("--mass", type=float)
    p.add_argument("--A", type=float, dest="A", help="repulsion constant of the effective potential")
    p.add_argument("--omega", type=float)
    p.add_argument("--delta", type=float, help="proposal half-width (bohr)")
    p.add_argument("--burn-in", type=int, dest="burn_in")
    p.add_argument("--measure", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--jobs", type=int, default=1, help="chains run in parallel processes")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pimc", description="Path-integral Monte Carlo for one particle")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured chains")
    _add_common(p_run)

    p_cmp = sub.add_parser("compare", help="run several actions with matched settings and seeds")
    _add_common(p_cmp)
    p_cmp.add_argument("--actions", required=True, type=lambda s: [a.strip() for a in s.split(",") if a.strip()])

    p_scan = sub.add_parser("scan", help="timestep scan at fixed total imaginary time")
    _add_common(p_scan)
    p_scan.add_argument("--beta", required=True, type=float)
    p_scan.add_argument("--taus", required=True, type=_csv_floats)
    return parser


_OVERRIDE_KEYS = (
    "action", "potential", "tau", "n_beads", "mass", "A", "omega", "delta",
    "burn_in", "measure", "thin",
)


def _overrides(args) -> dict:
    out = {k: getattr(args, k) for k in _OVERRIDE_KEYS if getattr(args, k) is not None}
    if args.seeds is not None:
        out["seeds"] = args.seeds
    if args.seed is not None:
        out["seeds"] = [args.seed]
    if args.output_dir is not None:
        out["output_dir"] = args.output_dir
    elif os.environ.get(OUTPUT_ENV):
        out["output_dir"] = os.environ[OUTPUT_ENV]
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return EXIT_IO
        cfg = parse_config(text, _overrides(args))
        if args.command == "run":
            report = run_experiment(cfg, jobs=args.jobs)
            summary = {"output_dir": cfg.output_dir, "energy": report.energy, "collapse": report.collapse}
        elif args.command == "compare":
            summary = compare(cfg, args.actions, jobs=args.jobs)
        else:
            rows = tau_scan(cfg, args.taus, args.beta, jobs=args.jobs)
            summary = {"output_dir": cfg.output_dir, "scan": rows}
        print(json.dumps(summary, indent=2, default=str), file=sys.stderr)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CorruptedStateError as exc:
        print(f"corrupted chain: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

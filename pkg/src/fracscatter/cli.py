"""Command line entry point: `fracscatter <kind> --config <path> [--out DIR]
[--threads K]`.

Exit codes: 0 success, 1 configuration error, 2 numerical-validation failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import KINDS, load_config, parse_config
from .experiments import run_experiment
from .grid import ConfigError, ValidationError, set_fft_workers

log = logging.getLogger("fracscatter")


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1, not argparse's 2)."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="fracscatter",
        description="Scattering experiments for fractional dispersion with "
                    "power-law potentials",
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="<kind>")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--out", help="output directory (overrides config out_dir)")
        p.add_argument("--threads", type=int, default=1,
                       help="FFT worker threads (default 1)")
        p.add_argument("-v", "--verbose", action="store_true",
                       help="progress logging to stderr")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            stream=sys.stderr,
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(message)s",
        )
        set_fft_workers(max(1, args.threads))
        if args.config is not None:
            cfg = load_config(args.config, kind=args.kind)
        else:
            cfg = parse_config("", kind=args.kind)
        summary = run_experiment(cfg, out_dir=args.out)
        for name, path in sorted(summary.get("paths", {}).items()):
            print(f"{name}: {path}")
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

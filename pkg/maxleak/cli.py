"""Command-line front end: ``maxleak <command> [options]``.

Reports go to stdout as JSON (or to ``--json PATH``); logs go to stderr.
Exit codes: 0 success, 1 an asserted property failed, 2 budget exceeded,
3 usage or input error.
"""

import argparse
import logging
import sys
from typing import List, NoReturn, Optional

from maxleak import __version__
from maxleak.config import (
    BudgetExceededError,
    ExperimentConfig,
    budget_from_env,
    get_budget,
    parse_lambda,
)
from maxleak.suite import EXIT_BUDGET, EXIT_USAGE, exit_code, run_suite

logger = logging.getLogger("maxleak.cli")


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 3 instead of 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable)")
    p.add_argument("--json", dest="output_path", help="Write the report here instead of stdout")
    p.add_argument("--budget", default="desk", help="Budget preset: quick, desk or deep")
    p.add_argument("--workers", type=int, default=1, help="Processes for exhaustive sweeps")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input_path", help="Input file")
    p.add_argument("--x", dest="text", help="Inline sequence, e.g. abba or 0110")
    p.add_argument("--alpha", type=int, default=2, help="Alphabet size")
    p.add_argument("--mod", action="store_true", help="Remap out-of-alphabet bytes modulo alpha")


def _add_spec(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", dest="spec_path", help="Encrypter spec JSON")
    p.add_argument("--machine", help="Preset encrypter name (xor, toggle, ...)")


def _add_key(p: argparse.ArgumentParser) -> None:
    p.add_argument("--key", dest="key_path", help="Key file, consumed MSB-first")
    p.add_argument("--seed", type=int, help="Seeded PRNG key (experiments only)")


def _add_scheme(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", default="0", help="Leakage allowance as p/q")
    p.add_argument("--padded", action="store_true", help="Pad codewords to equal length")
    p.add_argument("--raw", action="store_true", help="Skip compression (raw base-alpha block)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="maxleak",
        description="LZ78 compression, finite-state encrypters and exact maximal-leakage audits.",
    )
    parser.add_argument("--version", action="version", version=f"maxleak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("compress", "decompress"):
        p = sub.add_parser(name, help=f"LZ78 {name} a sequence")
        _add_common(p)
        _add_input(p)
        p.add_argument("--out", dest="out_path", help="Output file")
        p.add_argument("--plain", action="store_true", help="Uncapped LZ78 body (no flag bit); decompress takes the codec from the header")

    for name in ("encrypt", "decrypt"):
        p = sub.add_parser(name, help=f"LZ + one-time pad {name}")
        _add_common(p)
        _add_input(p)
        _add_key(p)
        _add_scheme(p)
        p.add_argument("--out", dest="out_path", help="Output file")

    fse = sub.add_parser("fse", help="Finite-state encrypter tools")
    fse_sub = fse.add_subparsers(dest="fse_command", required=True)
    p = fse_sub.add_parser("run", help="Run an encrypter on a sequence")
    _add_common(p)
    _add_input(p)
    _add_spec(p)
    _add_key(p)
    p = fse_sub.add_parser("audit-il", help="Information-losslessness audit")
    _add_common(p)
    _add_spec(p)
    p.add_argument("--horizon", type=int, help="Largest segment length - 1 to search")
    p = fse_sub.add_parser("types", help="Type classes at length n")
    _add_common(p)
    _add_spec(p)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("leakage", help="Exact maximal leakage of an encrypter or the LZ-OTP scheme")
    _add_common(p)
    _add_spec(p)
    _add_scheme(p)
    p.add_argument("--alpha", type=int, default=2, help="Alphabet size for --scheme")
    p.add_argument("--scheme", choices=["lz-otp"], help="Audit the LZ + one-time pad scheme")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dump", help="Also write the channel JSON here")

    bounds = sub.add_parser("bounds", help="Converse-bound audits")
    bounds_sub = bounds.add_subparsers(dest="bounds_command", required=True)
    p = bounds_sub.add_parser("audit", help="LZ-type and converse audits")
    _add_common(p)
    _add_spec(p)
    _add_input(p)
    p.add_argument("--n", type=int)
    p.add_argument("--all-x", action="store_true", help="Every sequence of length n")
    p.add_argument("--lambda", dest="lam", default="0", help="Leakage allowance as p/q")

    p = sub.add_parser("selftest", help="Fast checks against the worked examples")
    _add_common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Translate parsed arguments into an ExperimentConfig."""
    command = args.command
    if command == "fse":
        command = f"fse {args.fse_command}"
    elif command == "bounds":
        command = f"bounds {args.bounds_command}"
    options = {}
    if getattr(args, "plain", False):
        options["codec"] = "plain"
    if getattr(args, "raw", False):
        options["compressor"] = "raw"
    if getattr(args, "scheme", None):
        options["scheme"] = args.scheme
    if getattr(args, "dump", None):
        options["dump"] = args.dump
    budget = budget_from_env(get_budget(args.budget))
    return ExperimentConfig(
        command=command,
        input_path=getattr(args, "input_path", None),
        text=getattr(args, "text", None),
        alpha=getattr(args, "alpha", 2),
        lam=parse_lambda(getattr(args, "lam", "0")),
        spec_path=getattr(args, "spec_path", None),
        machine=getattr(args, "machine", None),
        n=getattr(args, "n", None),
        key_path=getattr(args, "key_path", None),
        seed=getattr(args, "seed", None),
        budget=budget,
        workers=args.workers,
        output_path=args.output_path,
        out_path=getattr(args, "out_path", None),
        mod=getattr(args, "mod", False),
        padded=getattr(args, "padded", False),
        all_x=getattr(args, "all_x", False),
        horizon=getattr(args, "horizon", None),
        options=options,
    )


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        cfg = config_from_args(args)
        report = run_suite(cfg)
    except BudgetExceededError as exc:
        logger.error("%s", exc)
        return EXIT_BUDGET
    except (ValueError, KeyError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    if cfg.output_path is not None:
        report.save(cfg.output_path)
    else:
        sys.stdout.write(report.render())
    for failure in report.failures:
        logger.warning("check failed: %s on %s %s", failure.name, failure.instance, failure.detail)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())

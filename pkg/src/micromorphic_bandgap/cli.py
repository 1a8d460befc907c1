"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 indefinite parameters,
4 numerical failure. Diagnostics go to stderr; data goes to ``--out``, the
path named in the config's output block, or stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from pathlib import Path

from .bandgap import analyze, gap_condition, require_definite, sweep_mu_c, sweep_mu_c_values
from .config import AnalysisConfig, parse_config, parse_quantity
from .dispersion import default_k_grid, sample_branches
from .errors import ConfigError, IndefiniteParameters, NumericalFailure, OutsideStatedRegime
from .material import characteristic_scales, validate_definiteness
from .output import emit_curves, emit_gap_report

logger = logging.getLogger("micromorphic_bandgap")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INDEFINITE = 3
EXIT_NUMERICAL = 4

DEFAULT_FACTORS = (1.0, 2.0, 3.0)


def format_sci(x: float) -> str:
    """Compact scientific notation: 1.5e8 rather than 1.5e+08."""
    mantissa, _, exponent = f"{x:.6g}".partition("e")
    if not exponent:
        return mantissa
    return f"{mantissa}e{int(exponent)}"


def _factors(text: str) -> tuple[float, ...]:
    try:
        factors = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")
    if any(not f > 0 for f in factors):
        raise argparse.ArgumentTypeError(f"factors must be > 0, got {text!r}")
    return factors


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="micromorphic-bandgap",
        description="Dispersion branches and band gaps of the relaxed micromorphic continuum.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON configuration file")
    common.add_argument("--out", help="output path, or '-' for stdout")
    common.add_argument("--k-max", type=float, help="largest wavenumber in rad/m")
    common.add_argument("--samples", type=int, help="number of k samples")
    common.add_argument("--mu-c", help="override mu_c, e.g. 300MPa or 3e8 (Pa)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads (output is identical)")

    sub.add_parser("check", parents=[common], help="report definiteness margins and the gap condition")
    sub.add_parser("disperse", parents=[common], help="write dispersion curves as CSV")
    sub.add_parser("gaps", parents=[common], help="write the band-gap report as JSON")
    sweep = sub.add_parser("sweep", parents=[common], help="band-gap reports over a range of mu_c")
    sweep.add_argument("--factors", type=_factors, help="comma-separated multiples of mu_c0")
    return parser


def load_config(args) -> AnalysisConfig:
    try:
        text = Path(args.config).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
    config = parse_config(text)
    overrides = {}
    if args.mu_c is not None:
        mu_c = parse_quantity(args.mu_c, "modulus", "--mu-c")
        overrides["material"] = config.material.with_mu_c(mu_c)
    if args.k_max is not None:
        if not args.k_max > 0:
            raise ConfigError(f"--k-max must be > 0, got {args.k_max}")
        overrides["k_max"] = args.k_max
    if args.samples is not None:
        if args.samples < 2:
            raise ConfigError(f"--samples must be >= 2, got {args.samples}")
        overrides["samples"] = args.samples
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _destination(args, config: AnalysisConfig, key: str):
    target = args.out if args.out is not None else config.outputs.get(key, "-")
    if target == "-":
        return sys.stdout, "stdout"
    return target, target


def _executor(jobs: int):
    return ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else nullcontext(None)


def cmd_check(args, config: AnalysisConfig) -> int:
    lines = []
    conditions = validate_definiteness(config.material)
    for c in conditions:
        lines.append(f"  {c.name:<24} {'PASS' if c.passed else 'FAIL'}  margin = {format_sci(c.margin)}")
    overall = all(c.passed for c in conditions)
    lines.insert(0, f"definiteness: {'PASS' if overall else 'FAIL'}")
    try:
        cond = gap_condition(config.material)
    except OutsideStatedRegime as exc:
        lines.append(f"gap condition: N/A ({exc})")
    else:
        lines.append(f"gap condition: {'PASS' if cond.passed else 'FAIL'}, mu_c0 = {format_sci(cond.threshold)} Pa")
        for name, ok in cond.clauses:
            lines.append(f"  {name:<24} {'PASS' if ok else 'FAIL'}")
    if overall:
        scales = characteristic_scales(config.material)
        lines.append("characteristic scales:")
        for name, value in scales.as_dict().items():
            unit = "m/s" if name.startswith("c_") else "rad/s"
            lines.append(f"  {name:<8} = {format_sci(value)} {unit}")
    text = "\n".join(lines) + "\n"
    dest, _ = _destination(args, config, "check")
    if isinstance(dest, str):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)
    return EXIT_OK


def cmd_disperse(args, config: AnalysisConfig) -> int:
    params = config.material
    require_definite(params)
    scales = characteristic_scales(params)
    grid = default_k_grid(scales, config.samples, config.k_max)
    with _executor(args.jobs) as pool:
        branches = sample_branches(
            params, scales, grid, asymptote_tolerance=config.asymptote_tolerance, executor=pool
        )
    dest, where = _destination(args, config, "curves")
    rows = emit_curves(branches, dest)
    logger.info("wrote %d rows to %s", rows, where)
    return EXIT_OK


def cmd_gaps(args, config: AnalysisConfig) -> int:
    with _executor(args.jobs) as pool:
        report = analyze(config.material, executor=pool, **config.analysis_options())
    dest, where = _destination(args, config, "report")
    emit_gap_report(report, dest)
    logger.info("gap report written to %s", where)
    return EXIT_OK


def cmd_sweep(args, config: AnalysisConfig) -> int:
    options = config.analysis_options()
    with _executor(args.jobs) as pool:
        if args.factors is not None:
            cases = sweep_mu_c(config.material, args.factors, executor=pool, **options)
        elif config.sweep_mu_c is not None and config.sweep_factors is None:
            require_definite(config.material)
            cases = sweep_mu_c_values(config.material, config.sweep_mu_c, executor=pool, **options)
        else:
            factors = config.sweep_factors if config.sweep_factors is not None else DEFAULT_FACTORS
            cases = sweep_mu_c(config.material, factors, executor=pool, **options)
    dest, where = _destination(args, config, "sweep")
    emit_gap_report(cases, dest)
    logger.info("sweep of %d cases written to %s", len(cases), where)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "disperse": cmd_disperse, "gaps": cmd_gaps, "sweep": cmd_sweep}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = load_config(args)
        return COMMANDS[args.command](args, config)
    except (ConfigError, OutsideStatedRegime) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IndefiniteParameters as exc:
        print(f"indefinite parameters: {exc}", file=sys.stderr)
        return EXIT_INDEFINITE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

"""Command-line experiment runner.

Sub-commands:

* ``construct pi1..pi6``: evaluate the three security conditions of a construction
* ``attack rot|ot|rabin|and|or``: run the impossibility chains against the attack bound
* ``bounds``: tabulate attack bounds, ε thresholds and the concentration envelopes
* ``trace <case label>``: write one run's transcript with its causality audit
* ``list``: print every registered case and attack label

Exit status is 0 on success, 1 when a measured value contradicts its claim and 2 on bad usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from . import __version__
from .attacks import (
    THEOREMS,
    attack_labels,
    constructible,
    impossibility_bound,
    make_target,
    run_attack,
    sweep_rot,
    threshold,
)
from .engine import run
from .errors import EnumerationSizeError, InputError, RelboxError, UnknownTargetError
from .protocols import CONSTRUCTIONS, ConstructionCase, case_labels, evaluate_case, get_case, get_cases
from .settings import ExperimentConfig, Settings
from .stats.advantage import AdvantageReport
from .stats.bounds import (
    quantum_ot_abort_probability,
    quantum_ot_both_known_probability,
    quantum_ot_envelopes,
    rabin_ot_abort_probability,
    rabin_ot_both_known_probability,
    rabin_ot_envelopes,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CLAIM, EXIT_USAGE = 0, 1, 2


# =============================================================================
# REPORTS
# =============================================================================


def write_report(records: list[dict[str, Any]], config: ExperimentConfig, name: str) -> Path:
    """Write ``records`` as ``<out>/<name>.<format>`` and return the path."""
    config.out.mkdir(parents=True, exist_ok=True)
    path = config.out / f"{name}.{config.format}"
    if config.format == "json":
        payload = {"version": __version__, "config": config.model_dump(mode="json"), "records": records}
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    else:
        header = {"version": __version__, "config": json.dumps(config.model_dump(mode="json"))}
        rows = [{**r, **header} for r in records]
        fields = list(dict.fromkeys(key for row in rows for key in row))
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)
    logger.info("Report written to %s", path)
    return path


def verdict(report: AdvantageReport, claimed: Fraction) -> bool:
    """Exact values must not exceed the claim; Monte Carlo intervals must not lie above it."""
    if report.fraction is not None:
        return report.fraction <= claimed
    return report.lower() <= float(claimed)


def case_record(case: ConstructionCase, distinguisher: str, report: AdvantageReport) -> dict[str, Any]:
    held = verdict(report, case.claimed)
    return {
        "label": case.label,
        "condition": case.condition,
        "distinguisher": distinguisher,
        "claimed_bound": str(case.claimed),
        "verdict": "pass" if held else "fail",
        **report.to_record(),
    }


# =============================================================================
# COMMANDS
# =============================================================================


def _evaluate(case: ConstructionCase, factory: Any, config: ExperimentConfig, settings: Settings) -> AdvantageReport:
    if config.mode == "exact":
        try:
            return evaluate_case(case, factory(), "exact", settings=settings)
        except EnumerationSizeError as e:
            logger.warning("%s: %s; falling back to Monte Carlo with %d trials", case.label, e, config.trials)
    return evaluate_case(case, factory(), "montecarlo", config.trials, config.seed, settings)


def cmd_construct(config: ExperimentConfig, settings: Settings) -> int:
    """Evaluate every reference distinguisher of the three cases of one construction."""
    if config.target not in CONSTRUCTIONS:
        raise UnknownTargetError(config.target, sorted(CONSTRUCTIONS))
    cases = get_cases(config.target, k=config.k, n=config.n)
    records = []
    for case in cases:
        for name, factory in case.distinguishers.items():
            records.append(case_record(case, name, _evaluate(case, factory, config, settings)))
        if config.mode == "exact" and case.input_space is not None:
            try:
                best, inputs = case.best_deterministic(settings)
            except EnumerationSizeError as e:
                logger.warning("%s: skipping the input scan (%s)", case.label, e)
            else:
                logger.debug("%s: best scanning inputs %s", case.label, inputs)
                records.append(case_record(case, "best-deterministic", best))
    for r in records:
        logger.info(
            "%s %s: %s %s (claimed %s) %s",
            r["label"],
            r["distinguisher"],
            r["mode"],
            r["value"],
            r["claimed_bound"],
            r["verdict"],
        )
    write_report(records, config, f"construct-{config.target}")
    return EXIT_OK if all(r["verdict"] == "pass" for r in records) else EXIT_CLAIM


def cmd_attack(config: ExperimentConfig, settings: Settings) -> int:
    """Run the impossibility chains of one primitive kind over the requested (p, s) grid."""
    if config.target not in THEOREMS:
        raise UnknownTargetError(config.target, attack_labels())
    ps = config.p if config.target == "rabin" else [0.5]
    records = []
    for p in ps:
        for s in config.s:
            target = make_target(config.target, p, s)
            results = run_attack(target, config.mode, config.trials, config.seed, settings)
            records += [r.to_record() for r in results]
            if target.kind == "rot" and target.s == 1 and config.mode == "exact":
                lowest, ideal = sweep_rot(settings)
                held = lowest >= target.bound() and ideal == 0
                logger.info(
                    "%s sweep over deterministic strategies: minimum %s, ideal %s", target.label, lowest, ideal
                )
                records.append(
                    {
                        "label": target.label,
                        "strategy": "deterministic-sweep",
                        "distinguisher": "d-rot",
                        "claimed_bound": str(target.bound()),
                        "verdict": "pass" if held else "fail",
                        **AdvantageReport.exact(lowest - ideal, lowest, ideal).to_record(),
                    }
                )
    write_report(records, config, f"attack-{config.target}")
    return EXIT_OK if all(r["verdict"] == "pass" for r in records) else EXIT_CLAIM


def bounds_rows(config: ExperimentConfig) -> list[dict[str, Any]]:
    """Attack bounds and ε thresholds over the (p, s) grid, then the envelopes for k and n."""
    rows = []
    for theorem in THEOREMS:
        for p in config.p if theorem == "rabin" else [0.5]:
            for s in config.s if theorem in ("rot", "ot", "rabin") else [1]:
                bound = impossibility_bound(theorem, p, s)
                rows.append(
                    {
                        "theorem": theorem,
                        "p": p,
                        "s": s,
                        "bound": str(bound),
                        "threshold": str(threshold(theorem, p, s)),
                        "threshold_float": float(bound / 3),
                        "note": "constructible" if constructible(theorem, p) else "",
                    }
                )
    abort_env, known_env = rabin_ot_envelopes(config.k)
    rows.append(
        {
            "theorem": "pi4",
            "k": config.k,
            "abort": str(rabin_ot_abort_probability(config.k)),
            "abort_envelope": abort_env,
            "both_known": str(rabin_ot_both_known_probability(config.k)),
            "both_known_envelope": known_env,
        }
    )
    if config.n % 2 == 0 and (config.n // 2) % 3 == 0:
        abort_env, known_env = quantum_ot_envelopes(config.n)
        rows.append(
            {
                "theorem": "pi5",
                "n": config.n,
                "abort": str(quantum_ot_abort_probability(config.n)),
                "abort_envelope": abort_env,
                "both_known": str(quantum_ot_both_known_probability(config.n)),
                "both_known_envelope": known_env,
            }
        )
    return rows


def cmd_bounds(config: ExperimentConfig, settings: Settings) -> int:  # noqa: ARG001
    """Write the bound table."""
    rows = bounds_rows(config)
    for row in rows:
        print("  ".join(f"{key}={value}" for key, value in row.items()))
    write_report(rows, config, "bounds")
    return EXIT_OK


def cmd_trace(config: ExperimentConfig, settings: Settings) -> int:
    """Run one case's real system once and write its transcript as JSON lines."""
    case = get_case(config.target, k=config.k, n=config.n)
    if not case.distinguishers:
        raise InputError(f"{case.label} has no reference distinguisher to drive a trace")
    name, factory = next(iter(case.distinguishers.items()))
    result = run(case.real, factory(), config.seed, settings=settings, clauses=case.clauses, strict=False)
    config.out.mkdir(parents=True, exist_ok=True)
    path = config.out / f"trace-{case.label}-{config.seed}.jsonl"
    result.transcript.write_jsonl(path)
    for label, held in sorted(result.transcript.audit.items()):
        print(f"{'pass' if held else 'FAIL'}  {label}")
    events = len(result.transcript.events)
    logger.info("%s driven by %s: %d events, output %d, transcript %s", case.label, name, events, result.output, path)
    return EXIT_OK if result.transcript.audit_passed else EXIT_CLAIM


def cmd_list(config: ExperimentConfig, settings: Settings) -> int:  # noqa: ARG001
    """Print every case and attack label."""
    for label in [*case_labels(), *attack_labels()]:
        print(label)
    return EXIT_OK


COMMANDS = {
    "construct": cmd_construct,
    "attack": cmd_attack,
    "bounds": cmd_bounds,
    "trace": cmd_trace,
    "list": cmd_list,
}


# =============================================================================
# ENTRY POINT
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-parser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with Settings overrides")
    common.add_argument("--workers", type=int, help="Processes for Monte Carlo estimation")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log every run at DEBUG level")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors")

    experiment = argparse.ArgumentParser(add_help=False)
    experiment.add_argument("--mode", choices=["exact", "montecarlo"], help="Exact enumeration or Monte Carlo")
    experiment.add_argument("--trials", type=int, help="Monte Carlo trials per system")
    experiment.add_argument("--seed", type=int, help="Master seed")
    experiment.add_argument("--k", type=int, help="Security parameter of pi4 and pi6")
    experiment.add_argument("--n", type=int, help="Number of BB84 states in pi5")
    experiment.add_argument("--p", type=float, nargs="+", help="Erasure probabilities")
    experiment.add_argument("--s", type=float, nargs="+", help="String lengths (inf allowed in bounds)")
    experiment.add_argument("--format", choices=["json", "csv"], help="Report format")
    experiment.add_argument("--out", type=Path, help="Output directory (default ./reports)")

    parser = argparse.ArgumentParser(prog="relbox", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    construct = sub.add_parser("construct", parents=[common, experiment], help="Check a construction")
    construct.add_argument("target", help="Construction: " + ", ".join(CONSTRUCTIONS))
    attack = sub.add_parser("attack", parents=[common, experiment], help="Run an impossibility chain")
    attack.add_argument("target", help="Primitive kind: " + ", ".join(THEOREMS))
    sub.add_parser("bounds", parents=[common, experiment], help="Tabulate bounds and thresholds")
    trace = sub.add_parser("trace", parents=[common, experiment], help="Write one transcript")
    trace.add_argument("target", help="Case label, e.g. pi3.honest")
    sub.add_parser("list", parents=[common], help="List case and attack labels")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Validated experiment description from the command-line flags.

    Raises:
        InputError: If a flag fails validation

    """
    values = {
        key: value
        for key in ("target", "mode", "trials", "seed", "k", "n", "p", "s", "format", "out", "config")
        if (value := getattr(args, key, None)) is not None
    }
    try:
        return ExperimentConfig(command=args.command, **values)
    except ValidationError as e:
        raise InputError(str(e)) from None


def load_settings(config: ExperimentConfig, args: argparse.Namespace) -> Settings:
    """Settings from the ``--config`` file, with ``--workers`` taking precedence."""
    try:
        settings = config.load_settings()
    except (OSError, ValidationError) as e:
        raise InputError(f"Cannot load settings from {config.config}: {e}") from None
    if args.workers is not None:
        settings = Settings.from_dict({**settings.to_dict(), "workers": args.workers})
    return settings


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    package_logger = logging.getLogger("relbox")
    package_logger.setLevel(level)
    for handler in package_logger.handlers:
        handler.setLevel(level)


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    try:
        config = load_config(args)
        settings = load_settings(config, args)
        return COMMANDS[config.command](config, settings)
    except (InputError, UnknownTargetError, ValidationError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except RelboxError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_CLAIM


if __name__ == "__main__":
    sys.exit(main())

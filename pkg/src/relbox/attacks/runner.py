"""Run the impossibility experiments: every library strategy against the matching distinguishers."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Literal

from pydantic import BaseModel

from ..engine import Distinguisher, System
from ..errors import EnumerationSizeError, InputError, UnknownTargetError
from ..primitives import PrimitiveTriple, and_bits, make_mpc, make_ot, make_rabin, make_rot, or_bits
from ..randomness import to_fraction
from ..settings import Settings, get_settings
from ..stats.advantage import AdvantageReport, estimate_advantage, exact_advantage, exact_probability
from .bounds import THEOREMS, impossibility_bound
from .chain import build_chain
from .distinguishers import DISTINGUISHERS, d_rot
from .strategies import SimulatorStrategy, deterministic_rot_strategies, strategy_library

logger = logging.getLogger(__name__)

Mode = Literal["exact", "montecarlo"]

_LABEL = re.compile(r"^(?:attack\.)?(?P<kind>[a-z]+)(?::(?P<params>.*))?$")


@dataclass(frozen=True)
class AttackTarget:
    """Primitive kind with its erasure probability and string length."""

    kind: str
    p: Fraction = Fraction(1, 2)
    s: int = 1

    @property
    def label(self) -> str:
        if self.kind == "rabin":
            return f"attack.rabin:p={float(self.p):g},s={self.s}"
        return f"attack.{self.kind}" if self.s == 1 else f"attack.{self.kind}:s={self.s}"

    def primitive(self) -> PrimitiveTriple:
        """Fresh primitive triple the chain is built from."""
        if self.kind == "rot":
            return make_rot(self.s)
        if self.kind == "ot":
            return make_ot(self.s)
        if self.kind == "rabin":
            return make_rabin(self.p, self.s)
        return make_mpc(and_bits if self.kind == "and" else or_bits)

    def distinguishers(self) -> list[Distinguisher]:
        return DISTINGUISHERS[self.kind](self.s)

    def bound(self) -> Fraction:
        return impossibility_bound(self.kind, self.p, self.s)


def attack_labels() -> list[str]:
    """Registered attack labels with their default parameters."""
    return [AttackTarget(kind).label for kind in THEOREMS]


def parse_attack_label(label: str) -> AttackTarget:
    """Parse ``"attack.rot"``, ``"rot"`` or ``"attack.rabin:p=0.5,s=2"``.

    Raises:
        UnknownTargetError: On an unknown kind
        InputError: On malformed or invalid parameters

    """
    match = _LABEL.match(label.strip())
    if match is None or match["kind"] not in THEOREMS:
        raise UnknownTargetError(label, attack_labels())
    values: dict[str, Any] = {}
    for item in filter(None, (match["params"] or "").split(",")):
        key, sep, value = item.partition("=")
        if not sep or key not in ("p", "s"):
            raise InputError(f"Bad attack parameter {item!r} in {label!r}; use p=<prob>,s=<int>")
        values[key] = value
    return make_target(match["kind"], float(values.get("p", 0.5)), float(values.get("s", 1)))


def make_target(kind: str, p: float | Fraction = Fraction(1, 2), s: float = 1) -> AttackTarget:
    """Validated attack target.

    Raises:
        UnknownTargetError: On an unknown kind
        InputError: On p outside [0, 1] or a string length that is not a positive integer

    """
    if kind not in THEOREMS:
        raise UnknownTargetError(kind, attack_labels())
    if not float(s).is_integer() or s < 1:
        raise InputError(f"Attacks need a finite positive integer string length, got {s}")
    if kind in ("and", "or") and s != 1:
        raise InputError(f"The {kind} attack works on single bits, got s={s}")
    return AttackTarget(kind, to_fraction(p), int(s))


class StrategyResult(BaseModel):
    """Best distinguisher against one chained strategy, compared with the attack probability."""

    label: str
    strategy: str
    distinguisher: str
    report: AdvantageReport
    bound: str
    meets_bound: bool

    def to_record(self) -> dict[str, Any]:
        """Flat dictionary for CSV/JSON reports."""
        return {
            "label": self.label,
            "strategy": self.strategy,
            "distinguisher": self.distinguisher,
            "claimed_bound": self.bound,
            "verdict": "pass" if self.meets_bound else "fail",
            **self.report.to_record(),
        }


def measure(
    distinguisher: Distinguisher,
    real: System,
    ideal: System,
    mode: Mode = "exact",
    trials: int = 10_000,
    seed: int = 0,
    settings: Settings | None = None,
) -> AdvantageReport:
    """Advantage in the requested mode; exact mode falls back to Monte Carlo when the tree is too large."""
    settings = settings or get_settings()
    if mode == "exact":
        try:
            return exact_advantage(distinguisher, real, ideal, settings=settings)
        except EnumerationSizeError as e:
            logger.warning("%s; falling back to Monte Carlo with %d trials", e, trials)
    return estimate_advantage(distinguisher, real, ideal, trials, seed, settings)


def meets(report: AdvantageReport, bound: Fraction) -> bool:
    """Exact reports must reach the bound; Monte Carlo reports must not exclude it."""
    if report.fraction is not None:
        return report.fraction >= bound
    return report.upper() >= float(bound)


def run_attack(
    target: AttackTarget,
    mode: Mode = "exact",
    trials: int = 10_000,
    seed: int = 0,
    settings: Settings | None = None,
    strategies: list[SimulatorStrategy] | None = None,
) -> list[StrategyResult]:
    """Evaluate every strategy of the target's library; one result per strategy."""
    settings = settings or get_settings()
    bound = target.bound()
    results = []
    for strategy in strategies or strategy_library(target.kind):
        chain = build_chain(target.primitive(), strategy, settings)
        best: tuple[AdvantageReport, str] | None = None
        for distinguisher in target.distinguishers():
            report = measure(distinguisher, chain.system, chain.ideal, mode, trials, seed, settings)
            if best is None or report.value > best[0].value:
                best = (report, distinguisher.name)
        report, name = best
        result = StrategyResult(
            label=target.label,
            strategy=strategy.name,
            distinguisher=name,
            report=report,
            bound=str(bound),
            meets_bound=meets(report, bound),
        )
        logger.info(
            "%s %s: %s advantage %.6g (bound %s) %s",
            target.label,
            strategy.name,
            name,
            report.value,
            bound,
            "ok" if result.meets_bound else "BELOW BOUND",
        )
        results.append(result)
    return results


def sweep_rot(settings: Settings | None = None) -> tuple[Fraction, Fraction]:
    """Exact d_rot trigger probabilities over every deterministic single-bit ROT strategy.

    Returns:
        The smallest trigger probability over the chains and the trigger probability on the
        honest resource

    """
    settings = settings or get_settings()
    target = AttackTarget("rot")
    lowest = None
    ideal = None
    for strategy in deterministic_rot_strategies():
        chain = build_chain(target.primitive(), strategy, settings)
        p = exact_probability(d_rot(), chain.system, settings)
        logger.debug("Sweep %s: trigger %s", strategy.name, p)
        lowest = p if lowest is None else min(lowest, p)
        if ideal is None:
            ideal = exact_probability(d_rot(), chain.ideal, settings)
    return lowest, ideal

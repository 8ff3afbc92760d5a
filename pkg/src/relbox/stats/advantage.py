"""Distinguishing advantage: exact enumeration and Monte Carlo estimation.

The advantage of D on (R, S) is |P[D(R) = 1] − P[D(S) = 1]|. Exact mode enumerates every random
draw of D and the system (see :func:`relbox.randomness.explore`). Monte Carlo mode runs R and S
on the same per-trial seeds and reports a two-sided confidence interval built from one interval
per acceptance probability.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Literal

from pydantic import BaseModel, Field, model_validator
from scipy import stats as sps

from ..distinguishers import ScanningDistinguisher
from ..engine import Distinguisher, OrderClause, System, run
from ..errors import InputError
from ..randomness import TapeSource, distribution, explore
from ..settings import Settings, get_settings

logger = logging.getLogger(__name__)

MIN_TRIALS = 100



class AdvantageReport(BaseModel):
    """Advantage (or acceptance probability) with its provenance.

    ``exact_value`` holds the rational value as a string (``"1/8"``) in exact mode; Monte Carlo
    reports carry the interval, the number of trials and the seed.
    """

    mode: Literal["exact", "montecarlo"]
    value: float = Field(ge=0, le=1)
    exact_value: str | None = None
    ci_low: float | None = Field(default=None, ge=0, le=1)
    ci_high: float | None = Field(default=None, ge=0, le=1)
    trials: int | None = None
    seed: int | None = None
    p_real: float | None = None
    p_ideal: float | None = None

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def validate_interval(self) -> AdvantageReport:
        """Ensure ci_low ≤ value ≤ ci_high."""
        if self.ci_low is not None and self.ci_high is not None and not self.ci_low <= self.value <= self.ci_high:
            raise ValueError(f"Interval [{self.ci_low}, {self.ci_high}] does not contain {self.value}")
        return self

    @classmethod
    def exact(
        cls, value: Fraction, p_real: Fraction | None = None, p_ideal: Fraction | None = None
    ) -> AdvantageReport:
        """Report for an exactly computed value."""
        return cls(
            mode="exact",
            value=float(value),
            exact_value=str(value),
            ci_low=float(value),
            ci_high=float(value),
            p_real=None if p_real is None else float(p_real),
            p_ideal=None if p_ideal is None else float(p_ideal),
        )

    @property
    def fraction(self) -> Fraction | None:
        """Exact value, when known."""
        return None if self.exact_value is None else Fraction(self.exact_value)

    def upper(self) -> float:
        """Largest value consistent with the report."""
        return self.value if self.ci_high is None else self.ci_high

    def lower(self) -> float:
        """Smallest value consistent with the report."""
        return self.value if self.ci_low is None else self.ci_low

    def to_record(self) -> dict[str, Any]:
        """Flat dictionary for CSV/JSON reports."""
        return self.model_dump()


# =============================================================================
# EXACT
# =============================================================================


def exact_probability(
    distinguisher: Distinguisher,
    system: System,
    settings: Settings | None = None,
    clauses: Iterable[OrderClause] = (),
    limit: int | None = None,
) -> Fraction:
    """Exact P[D(system) = 1].

    Raises:
        EnumerationSizeError: If the probability tree has more leaves than ``limit``

    """
    settings = settings or get_settings()
    clauses = tuple(clauses)

    def experiment(source: TapeSource) -> int:
        return run(system, distinguisher, source=source, settings=settings, clauses=clauses).output

    outcomes = explore(experiment, limit or settings.enumeration_limit)
    return sum((w for w, out in outcomes if out == 1), Fraction(0))


def exact_advantage(
    distinguisher: Distinguisher,
    real: System,
    ideal: System,
    limit: int | None = None,
    settings: Settings | None = None,
    clauses: Iterable[OrderClause] = (),
) -> AdvantageReport:
    """Exact |P[D(real) = 1] − P[D(ideal) = 1]|.

    Raises:
        EnumerationSizeError: If either probability tree is too large

    """
    p_real = exact_probability(distinguisher, real, settings, clauses, limit)
    p_ideal = exact_probability(distinguisher, ideal, settings, (), limit)
    return AdvantageReport.exact(abs(p_real - p_ideal), p_real, p_ideal)


def observation_distribution(
    distinguisher: Distinguisher,
    system: System,
    settings: Settings | None = None,
    limit: int | None = None,
) -> dict[tuple, Fraction]:
    """Exact distribution of everything ``distinguisher`` receives from ``system``."""
    settings = settings or get_settings()

    def experiment(source: TapeSource) -> tuple:
        run(system, distinguisher, source=source, settings=settings)
        return distinguisher.observation()

    return distribution(explore(experiment, limit or settings.enumeration_limit))


def total_variation(p: Mapping[Any, Fraction], q: Mapping[Any, Fraction]) -> Fraction:
    """½ Σ |p − q| over the union of supports."""
    return sum((abs(p.get(k, Fraction(0)) - q.get(k, Fraction(0))) for k in set(p) | set(q)), Fraction(0)) / 2


def input_assignments(input_space: Mapping[str, Sequence[Any]]) -> list[dict[str, Any]]:
    """Every combination of per-port input values."""
    names = sorted(input_space)
    return [dict(zip(names, values, strict=True)) for values in itertools.product(*(input_space[n] for n in names))]


def best_deterministic_advantage(
    real: System,
    ideal: System,
    input_space: Mapping[str, Sequence[Any]],
    settings: Settings | None = None,
    limit: int | None = None,
    delays: Mapping[str, float] | None = None,
) -> tuple[AdvantageReport, dict[str, Any]]:
    """Largest advantage of any deterministic non-adaptive distinguisher over ``input_space``.

    For a fixed input assignment the best acceptance set is the set of observations more likely
    under ``real``, whose advantage is the total-variation distance of the two observation
    distributions. The maximum is taken over all assignments.

    Returns:
        The exact report and the maximising input assignment

    """
    best, witness = Fraction(-1), {}
    for inputs in input_assignments(input_space):
        d = ScanningDistinguisher.for_system(real, inputs, delays=delays)
        tv = total_variation(
            observation_distribution(d, real, settings, limit), observation_distribution(d, ideal, settings, limit)
        )
        logger.debug("Inputs %s: total variation %s", inputs, tv)
        if tv > best:
            best, witness = tv, inputs
    return AdvantageReport.exact(max(best, Fraction(0))), witness


# =============================================================================
# MONTE CARLO
# =============================================================================


def proportion_interval(
    hits: int, trials: int, alpha: float, method: Literal["hoeffding", "wilson"] = "hoeffding"
) -> tuple[float, float]:
    """Two-sided (1 − α) interval for a Bernoulli mean."""
    p = hits / trials
    if method == "hoeffding":
        eps = math.sqrt(math.log(2 / alpha) / (2 * trials))
        return max(0.0, p - eps), min(1.0, p + eps)
    z = float(sps.norm.ppf(1 - alpha / 2))
    denom = 1 + z**2 / trials
    centre = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _absolute_interval(low: float, high: float) -> tuple[float, float]:
    if low >= 0:
        return low, high
    if high <= 0:
        return -high, -low
    return 0.0, max(-low, high)


def _count(args: tuple) -> tuple[int, int]:
    distinguisher, real, ideal, seed, start, stop, settings, clauses = args
    hits_real = hits_ideal = 0
    for trial in range(start, stop):
        hits_real += run(real, distinguisher, seed, trial=trial, settings=settings, clauses=clauses).output
        if ideal is not None:
            hits_ideal += run(ideal, distinguisher, seed, trial=trial, settings=settings).output
    return hits_real, hits_ideal


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = math.ceil(trials / workers)
    return [(start, min(trials, start + size)) for start in range(0, trials, size)]


def _count_all(
    distinguisher: Distinguisher,
    real: System,
    ideal: System | None,
    trials: int,
    seed: int,
    settings: Settings,
    clauses: tuple[OrderClause, ...],
) -> tuple[int, int]:
    if trials < MIN_TRIALS:
        raise InputError(f"Monte Carlo needs at least {MIN_TRIALS} trials, got {trials}")
    jobs = [(distinguisher, real, ideal, seed, a, b, settings, clauses) for a, b in _chunks(trials, settings.workers)]
    if settings.workers == 1:
        counts = [_count(job) for job in jobs]
    else:
        logger.debug("Splitting %d trials over %d workers", trials, len(jobs))
        with ProcessPoolExecutor(max_workers=settings.workers) as pool:
            counts = list(pool.map(_count, jobs))
    return sum(c[0] for c in counts), sum(c[1] for c in counts)


def estimate_probability(
    distinguisher: Distinguisher,
    system: System,
    trials: int = 10_000,
    seed: int = 0,
    settings: Settings | None = None,
    clauses: Iterable[OrderClause] = (),
) -> AdvantageReport:
    """Monte Carlo estimate of P[D(system) = 1] with its confidence interval.

    Raises:
        InputError: If ``trials`` is below 100

    """
    settings = settings or get_settings()
    hits, _ = _count_all(distinguisher, system, None, trials, seed, settings, tuple(clauses))
    low, high = proportion_interval(hits, trials, 1 - settings.confidence, settings.interval)
    return AdvantageReport(mode="montecarlo", value=hits / trials, ci_low=low, ci_high=high, trials=trials, seed=seed)


def estimate_advantage(
    distinguisher: Distinguisher,
    real: System,
    ideal: System,
    trials: int = 10_000,
    seed: int = 0,
    settings: Settings | None = None,
    clauses: Iterable[OrderClause] = (),
) -> AdvantageReport:
    """Monte Carlo estimate of the advantage with a two-sided interval.

    Both systems see the same per-trial seeds. Each acceptance probability gets a (1 − α/2)
    interval; their difference is mapped to an interval for the absolute value.

    Raises:
        InputError: If ``trials`` is below 100

    """
    settings = settings or get_settings()
    hits_real, hits_ideal = _count_all(distinguisher, real, ideal, trials, seed, settings, tuple(clauses))
    alpha = (1 - settings.confidence) / 2
    low_r, high_r = proportion_interval(hits_real, trials, alpha, settings.interval)
    low_i, high_i = proportion_interval(hits_ideal, trials, alpha, settings.interval)
    p_real, p_ideal = hits_real / trials, hits_ideal / trials
    low, high = _absolute_interval(low_r - high_i, high_r - low_i)
    value = abs(p_real - p_ideal)
    return AdvantageReport(
        mode="montecarlo",
        value=value,
        ci_low=max(0.0, min(low, value)),
        ci_high=min(1.0, max(high, value)),
        trials=trials,
        seed=seed,
        p_real=p_real,
        p_ideal=p_ideal,
    )

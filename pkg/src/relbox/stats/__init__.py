"""Advantage estimation, exact tail oracles, concentration bounds and lemma checks."""

from .advantage import (
    AdvantageReport,
    best_deterministic_advantage,
    estimate_advantage,
    estimate_probability,
    exact_advantage,
    exact_probability,
    observation_distribution,
    proportion_interval,
    total_variation,
)
from .bounds import (
    binomial_tail,
    chernoff_upper,
    hoeffding_hypergeometric,
    hypergeometric_tail,
    pi5_cheat_bound,
    pi5_cheat_pass_probability,
)
from .lemmas import LemmaCheck, assert_difference_lemma, assert_separation_lemma

__all__ = [
    "AdvantageReport",
    "LemmaCheck",
    "assert_difference_lemma",
    "assert_separation_lemma",
    "best_deterministic_advantage",
    "binomial_tail",
    "chernoff_upper",
    "estimate_advantage",
    "estimate_probability",
    "exact_advantage",
    "exact_probability",
    "hoeffding_hypergeometric",
    "hypergeometric_tail",
    "observation_distribution",
    "pi5_cheat_bound",
    "pi5_cheat_pass_probability",
    "proportion_interval",
    "total_variation",
]

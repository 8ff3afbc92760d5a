"""Exact and Monte Carlo distinguishing advantage."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from relbox.attacks import build_chain, d_rot, strategy_library
from relbox.distinguishers import AbortDistinguisher, ConstantDistinguisher, ForwardingDistinguisher
from relbox.engine import BOTTOM
from relbox.errors import EnumerationSizeError, InputError
from relbox.primitives import RabinBox, make_rot
from relbox.protocols import get_case
from relbox.settings import Settings
from relbox.stats.advantage import (
    AdvantageReport,
    best_deterministic_advantage,
    estimate_advantage,
    estimate_probability,
    exact_advantage,
    exact_probability,
    proportion_interval,
    total_variation,
)


class NoisyErasure(RabinBox):
    """Delivers x with probability p, flipped with probability q once delivered."""

    def __init__(self, p: Fraction, q: Fraction) -> None:
        super().__init__(p)
        self.q = q

    def on_message(self, msg, ctx) -> None:
        self.store(msg)
        if not ctx.rng.bernoulli(self.p):
            ctx.emit("out", BOTTOM)
            return
        ctx.emit("out", msg.payload ^ int(ctx.rng.bernoulli(self.q)))


def eighths(rng: np.random.Generator) -> Fraction:
    return Fraction(int(rng.integers(0, 9)), 8)


def distance(real: NoisyErasure, ideal: NoisyErasure) -> Fraction:
    report, _ = best_deterministic_advantage(real, ideal, {"x": (0, 1)})
    return report.fraction


@pytest.fixture
def coins():
    """Two erasure boxes that differ only in their delivery probability."""
    fair, biased = RabinBox(Fraction(1, 2)), RabinBox(Fraction(3, 4))
    return fair, biased, AbortDistinguisher.for_system(fair, {"x": 1}, "out")


class TestExact:
    def test_biased_coins(self, coins):
        fair, biased, d = coins
        report = exact_advantage(d, fair, biased)
        assert report.fraction == Fraction(1, 4)
        assert report.p_real == 0.5
        assert report.p_ideal == 0.25
        assert report.mode == "exact"

    def test_constant_distinguisher(self, coins):
        fair, biased, _ = coins
        assert exact_advantage(ConstantDistinguisher.for_system(fair), fair, biased).fraction == 0

    def test_perfect_construction(self):
        case = get_case("pi1.honest")
        report = exact_advantage(case.distinguishers["forward-out"](), case.real, case.ideal, clauses=case.clauses)
        assert report.fraction == 0

    def test_rot_chain(self):
        chain = build_chain(make_rot(), strategy_library("rot")[0])
        assert exact_advantage(d_rot(), chain.system, chain.ideal).fraction == Fraction(1, 4)

    def test_limit(self, coins):
        fair, _, d = coins
        with pytest.raises(EnumerationSizeError):
            exact_probability(d, fair, limit=1)

    def test_settings_limit(self, coins):
        fair, _, d = coins
        with pytest.raises(EnumerationSizeError):
            exact_probability(d, fair, Settings(enumeration_limit=1))


class TestBestDeterministic:
    def test_finds_the_gap(self, coins):
        fair, biased, _ = coins
        report, inputs = best_deterministic_advantage(fair, biased, {"x": (0, 1)})
        assert report.fraction == Fraction(1, 4)
        assert inputs["x"] in (0, 1)

    def test_total_variation(self):
        p = {"a": Fraction(1, 2), "b": Fraction(1, 2)}
        q = {"a": Fraction(1, 4), "c": Fraction(3, 4)}
        assert total_variation(p, q) == Fraction(3, 4)
        assert total_variation(p, p) == 0


class TestPseudoMetric:
    @pytest.fixture(scope="class")
    def triples(self):
        rng = np.random.default_rng(2024)
        return [tuple(NoisyErasure(eighths(rng), eighths(rng)) for _ in range(3)) for _ in range(50)]

    def test_matches_total_variation_of_outputs(self, triples):
        for r, s, _ in triples:
            erased = abs(r.p - s.p)
            kept = abs(r.p * (1 - r.q) - s.p * (1 - s.q))
            flipped = abs(r.p * r.q - s.p * s.q)
            assert distance(r, s) == (erased + kept + flipped) / 2

    def test_axioms(self, triples):
        for r, s, t in triples:
            assert distance(r, r) == 0
            for a, b in itertools.permutations((r, s, t), 2):
                assert distance(a, b) == distance(b, a)
            assert distance(r, t) <= distance(r, s) + distance(s, t)

    def test_axioms_for_a_fixed_distinguisher(self, triples):
        d = ForwardingDistinguisher.for_system(RabinBox(), {"x": 1}, "out")

        def advantage(a, b):
            return exact_advantage(d, a, b).fraction

        for r, s, t in triples:
            assert advantage(r, r) == 0
            assert advantage(r, s) == advantage(s, r) == abs(r.p * (1 - r.q) - s.p * (1 - s.q))
            assert advantage(r, t) <= advantage(r, s) + advantage(s, t)


class TestMonteCarlo:
    def test_identical_systems(self):
        d = AbortDistinguisher.for_system(RabinBox(), {"x": 1}, "out")
        report = estimate_advantage(d, RabinBox(), RabinBox(), trials=500, seed=3)
        assert report.value == 0
        assert report.ci_low == 0
        assert report.trials == 500

    def test_constant_distinguisher(self, coins):
        fair, biased, _ = coins
        report = estimate_advantage(ConstantDistinguisher.for_system(fair), fair, biased, trials=200)
        assert report.value == 0
        assert report.p_real == report.p_ideal == 1

    def test_interval_contains_the_exact_value(self, coins):
        fair, biased, d = coins
        report = estimate_advantage(d, fair, biased, trials=4000, seed=1)
        assert report.ci_low <= 0.25 <= report.ci_high

    def test_reproducible(self, coins):
        fair, biased, d = coins
        first = estimate_advantage(d, fair, biased, trials=300, seed=8)
        assert estimate_advantage(d, fair, biased, trials=300, seed=8) == first

    def test_probability_estimate(self, coins):
        fair, _, d = coins
        report = estimate_probability(d, fair, trials=2000, seed=4)
        assert report.ci_low <= 0.5 <= report.ci_high

    def test_too_few_trials(self, coins):
        fair, biased, d = coins
        with pytest.raises(InputError):
            estimate_advantage(d, fair, biased, trials=99)

    @pytest.mark.slow
    def test_interval_coverage(self, coins):
        fair, biased, d = coins
        box = RabinBox(Fraction(3, 8))
        settings = Settings(confidence=0.99, interval="hoeffding")
        exact = exact_probability(d, box)
        assert exact == Fraction(5, 8)
        estimates = [estimate_probability(d, box, trials=100, seed=s, settings=settings) for s in range(200)]
        assert sum(r.ci_low <= exact <= r.ci_high for r in estimates) >= 198
        gaps = [estimate_advantage(d, fair, biased, trials=100, seed=s, settings=settings) for s in range(200)]
        assert sum(r.ci_low <= 0.25 <= r.ci_high for r in gaps) >= 198

    @pytest.mark.slow
    def test_workers_do_not_change_counts(self, coins):
        fair, biased, d = coins
        one = estimate_advantage(d, fair, biased, trials=1000, seed=2, settings=Settings(workers=1))
        two = estimate_advantage(d, fair, biased, trials=1000, seed=2, settings=Settings(workers=2))
        assert one == two

    @pytest.mark.slow
    def test_rot_chain(self):
        chain = build_chain(make_rot(), strategy_library("rot")[0])
        report = estimate_advantage(d_rot(), chain.system, chain.ideal, trials=100_000, seed=5)
        assert report.ci_low <= 0.25 <= report.ci_high


class TestIntervals:
    @pytest.mark.parametrize("method", ["hoeffding", "wilson"])
    def test_contains_point_estimate(self, method):
        low, high = proportion_interval(30, 100, 0.01, method)
        assert low <= 0.3 <= high

    def test_wilson_is_tighter_at_the_edge(self):
        h_low, h_high = proportion_interval(0, 1000, 0.01, "hoeffding")
        w_low, w_high = proportion_interval(0, 1000, 0.01, "wilson")
        assert h_low == 0
        assert w_low == pytest.approx(0, abs=1e-12)
        assert w_high < h_high


class TestReport:
    def test_exact_report(self):
        report = AdvantageReport.exact(Fraction(1, 8))
        assert report.value == 0.125
        assert report.exact_value == "1/8"
        assert report.lower() == report.upper() == 0.125

    def test_interval_must_contain_value(self):
        with pytest.raises(ValidationError):
            AdvantageReport(mode="montecarlo", value=0.5, ci_low=0.6, ci_high=0.7)

    def test_record(self):
        record = AdvantageReport.exact(Fraction(0)).to_record()
        assert record["mode"] == "exact"
        assert record["exact_value"] == "0"

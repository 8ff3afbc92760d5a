"""The six constructions: registry, correctness and exact security values."""

from fractions import Fraction

import pytest

from relbox.distinguishers import ForwardingDistinguisher, ScanningDistinguisher
from relbox.engine import BOTTOM, Symbol, run
from relbox.errors import InputError, UnknownTargetError, WiringError
from relbox.primitives import OTBox, RabinBox
from relbox.protocols import case_labels, evaluate_case, get_case, get_cases
from relbox.protocols.base import ConstructionCase
from relbox.protocols.pi5 import SkipMeasurementDistinguisher
from relbox.protocols.pi6 import consistent_opening
from relbox.randomness import EnumeratingRandomness, TapeSource, explore
from relbox.stats.advantage import estimate_probability, observation_distribution
from relbox.stats.bounds import binomial_tail, pi5_cheat_pass_probability, rabin_ot_envelopes

HALF = Fraction(1, 2)


class PinnedSampleRandomness(EnumeratingRandomness):
    """Enumerating stream whose subset draws always return the same subset."""

    def __init__(self, tape, subset):
        super().__init__(tape)
        self.subset = frozenset(subset)

    def sample(self, population, k):
        assert len(self.subset) == k
        return self.subset


class PinnedSampleSource(TapeSource):
    def __init__(self, tape, subset):
        super().__init__(tape)
        self.subset = subset

    def stream(self, key):
        return PinnedSampleRandomness(self.tape, self.subset)


def out_distribution(system, inputs, port="out"):
    """Exact distribution of the first payload on ``port``."""
    d = ScanningDistinguisher.for_system(system, inputs)
    dist = {}
    for obs, weight in observation_distribution(d, system).items():
        value = dict(obs).get(port, ())
        key = value[0] if value else None
        dist[key] = dist.get(key, Fraction(0)) + weight
    return dist


class TestRegistry:
    def test_labels(self):
        labels = case_labels()
        assert len(labels) == 18
        assert "pi4.dB" in labels

    def test_unknown_construction(self):
        with pytest.raises(UnknownTargetError):
            get_cases("pi7")

    @pytest.mark.parametrize("label", ["pi1", "pi1.dC", "pi9.honest"])
    def test_unknown_case(self, label):
        with pytest.raises(UnknownTargetError):
            get_case(label)

    def test_extra_parameters_are_ignored(self):
        assert [c.label for c in get_cases("pi1", k=3, n=12)] == ["pi1.honest", "pi1.dA", "pi1.dB"]

    @pytest.mark.parametrize(
        ("name", "params"), [("pi4", {"k": 0}), ("pi6", {"k": -1}), ("pi5", {"n": 8}), ("pi5", {"n": 7})]
    )
    def test_bad_parameters(self, name, params):
        with pytest.raises(InputError):
            get_cases(name, **params)

    def test_bad_policy(self):
        with pytest.raises(InputError):
            get_cases("pi4", policy="greedy")

    def test_real_and_ideal_must_share_ports(self):
        with pytest.raises(WiringError):
            ConstructionCase("broken.honest", "honest", OTBox(), RabinBox(), Fraction(0))

    def test_unknown_mode(self):
        case = get_case("pi1.honest")
        with pytest.raises(InputError):
            evaluate_case(case, case.distinguishers["forward-out"](), mode="guess")


def audited_runs(case, factory, seeds):
    for seed in seeds:
        yield run(case.real, factory(), seed, clauses=case.clauses).transcript
        yield run(case.ideal, factory(), seed).transcript


class TestCausalityAudit:
    @pytest.mark.parametrize("label", case_labels())
    def test_every_reference_distinguisher(self, label):
        case = get_case(label)
        for factory in case.distinguishers.values():
            for transcript in audited_runs(case, factory, range(10)):
                assert transcript.audit_passed

    @pytest.mark.slow
    @pytest.mark.parametrize("label", case_labels())
    def test_thousand_seeds(self, label):
        case = get_case(label)
        factory = next(iter(case.distinguishers.values()))
        assert all(t.audit_passed for t in audited_runs(case, factory, range(1000)))


class TestOneTimePadOT:
    @pytest.mark.parametrize("seed", range(5))
    def test_honest_output(self, seed):
        case = get_case("pi1.honest")
        d = ForwardingDistinguisher.for_system(case.real, {"a0": 1, "a1": 0, "b": 0}, "out")
        assert run(case.real, d, seed=seed, clauses=case.clauses).output == 1

    @pytest.mark.parametrize("case", get_cases("pi1"), ids=lambda c: c.label)
    def test_perfect(self, case):
        report, _ = case.best_deterministic()
        assert report.fraction == 0
        for factory in case.distinguishers.values():
            assert evaluate_case(case, factory()).fraction == 0

    def test_simulated_pad_is_uniform(self):
        case = get_case("pi1.dB")
        for a1 in (0, 1):
            assert out_distribution(case.ideal, {"a0": 0, "a1": a1, "rot.b": 0}, "c1.recv") == {0: HALF, 1: HALF}


class TestRandomizedOT:
    @pytest.mark.parametrize("case", get_cases("pi2"), ids=lambda c: c.label)
    def test_perfect(self, case):
        report, _ = case.best_deterministic()
        assert report.fraction == 0

    def test_honest_keys(self):
        case = get_case("pi2.honest")
        d = ScanningDistinguisher.for_system(case.real, {"b": 1})
        for obs in observation_distribution(d, case.real):
            values = {name: payloads[0] for name, payloads in obs}
            assert values["sb"] == values["s1"]


class TestOTToRabin:
    @pytest.mark.parametrize("case", get_cases("pi3"), ids=lambda c: c.label)
    def test_perfect(self, case):
        report, _ = case.best_deterministic()
        assert report.fraction == 0

    @pytest.mark.parametrize("x", [0, 1])
    def test_delivered_values_equal_input(self, x):
        assert out_distribution(get_case("pi3.honest").real, {"x": x}) == {x: HALF, BOTTOM: HALF}

    def test_trace_is_audited(self):
        case = get_case("pi3.honest")
        result = run(case.real, case.distinguishers["abort-out"](), seed=7, clauses=case.clauses)
        assert result.transcript.audit_passed


class TestRabinToOT:
    def test_claims(self):
        honest, dishonest_alice, dishonest_bob = get_cases("pi4", k=1)
        assert honest.claimed == Fraction(1, 8)
        assert dishonest_alice.claimed == 0
        assert dishonest_bob.claimed == HALF

    def test_honest_abort_probability(self):
        case = get_case("pi4.honest", k=1)
        assert evaluate_case(case, case.distinguishers["abort-out"]()).fraction == Fraction(1, 8)

    def test_honest_output_is_chosen_input_or_abort(self):
        case = get_case("pi4.honest", k=1)
        assert out_distribution(case.real, {"a0": 1, "a1": 0, "b": 0}) == {1: Fraction(7, 8), BOTTOM: Fraction(1, 8)}

    def test_honest_scan_stays_within_claim(self):
        case = get_case("pi4.honest", k=1)
        report, _ = case.best_deterministic()
        assert 0 < report.fraction <= case.claimed

    @pytest.mark.slow
    def test_honest_abort_at_k_two(self):
        case = get_case("pi4.honest", k=2)
        report = evaluate_case(case, case.distinguishers["abort-out"]())
        assert report.fraction == binomial_tail(6, HALF, 2, "lt") == Fraction(7, 64)

    def test_both_sets_attack(self):
        case = get_case("pi4.dB", k=1)
        assert evaluate_case(case, case.distinguishers["both-sets"]()).fraction == HALF

    def test_dishonest_alice_reference(self):
        case = get_case("pi4.dA", k=1)
        assert evaluate_case(case, case.distinguishers["forward-out"]()).fraction == 0

    @pytest.mark.slow
    def test_dishonest_alice_scan(self):
        report, _ = get_case("pi4.dA", k=1).best_deterministic()
        assert report.fraction == 0

    @pytest.mark.slow
    def test_honest_abort_at_k_four(self):
        case = get_case("pi4.honest", k=4)
        report = evaluate_case(case, case.distinguishers["abort-out"]())
        assert report.fraction == case.claimed == binomial_tail(12, HALF, 4, "lt") == Fraction(299, 4096)
        assert float(report.fraction) <= rabin_ot_envelopes(4)[0]

    @pytest.mark.slow
    def test_both_sets_at_k_four(self):
        case = get_case("pi4.dB", k=4)
        report = evaluate_case(case, case.distinguishers["both-sets"]())
        assert report.fraction == case.claimed == binomial_tail(12, HALF, 8, "ge") == Fraction(397, 2048)
        assert float(report.fraction) <= rabin_ot_envelopes(4)[1]

    @pytest.mark.slow
    def test_honest_montecarlo_at_k_four(self, wilson):
        case = get_case("pi4.honest", k=4)
        d = case.distinguishers["abort-out"]()
        report = evaluate_case(case, d, mode="montecarlo", trials=5000, seed=1, settings=wilson)
        assert report.lower() <= float(case.claimed) <= report.upper()
        assert report.upper() - report.lower() < 0.04


class TestQuantumOT:
    def test_claims(self):
        honest, dishonest_alice, dishonest_bob = get_cases("pi5", n=6)
        assert honest.claimed == Fraction(1, 8)
        assert dishonest_alice.claimed == 0
        assert dishonest_bob.claimed == HALF
        assert honest.params["k"] == 3

    def test_claim_at_twelve_states(self):
        assert get_case("pi5.honest", n=12).claimed == binomial_tail(6, HALF, 2, "lt")

    @pytest.mark.slow
    def test_honest_abort_probability(self):
        case = get_case("pi5.honest", n=6)
        assert evaluate_case(case, case.distinguishers["abort-out"]()).fraction == Fraction(1, 8)

    @pytest.mark.slow
    @pytest.mark.parametrize("test_set", [range(6), range(0, 12, 2)])
    def test_honest_abort_at_twelve_states(self, test_set):
        # The abort probability does not depend on which states are tested, so pinning the
        # test set leaves only the 2^12 basis agreements to enumerate.
        case = get_case("pi5.honest", n=12)
        d = case.distinguishers["abort-out"]()

        def experiment(source):
            pinned = PinnedSampleSource(source.tape, test_set)
            return run(case.real, d, source=pinned, clauses=case.clauses).output

        outcomes = explore(experiment)
        assert sum(w for w, out in outcomes if out == 1) == case.claimed == Fraction(7, 64)

    @pytest.mark.slow
    def test_honest_montecarlo_at_twelve_states(self, wilson):
        case = get_case("pi5.honest", n=12)
        report = estimate_probability(
            case.distinguishers["abort-out"](), case.real, trials=2000, seed=5, settings=wilson, clauses=case.clauses
        )
        assert report.lower() <= float(case.claimed) <= report.upper()

    @pytest.mark.slow
    @pytest.mark.parametrize("skip", [6, 12])
    def test_skipped_measurements_pass_rate(self, skip, wilson):
        case = get_case("pi5.dB", n=12)
        d = SkipMeasurementDistinguisher(case.real, 12, skip=skip)
        report = estimate_probability(d, case.real, trials=3000, seed=11, settings=wilson, clauses=case.clauses)
        assert report.lower() <= float(pi5_cheat_pass_probability(12, 6, skip)) <= report.upper()

    def test_fully_skipping_bob_passes_with_three_quarters_per_tested_state(self):
        assert pi5_cheat_pass_probability(12, 6, 12) == Fraction(3, 4) ** 6

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["honest-alice", "honest-alice-abort"])
    def test_dishonest_alice_is_perfect(self, name):
        case = get_case("pi5.dA", n=6)
        assert evaluate_case(case, case.distinguishers[name]()).fraction == case.claimed == 0

    @pytest.mark.slow
    def test_both_intervals_attack(self):
        case = get_case("pi5.dB", n=6)
        report = evaluate_case(case, case.distinguishers["both-intervals"]())
        assert report.p_real == 0.5
        assert report.fraction <= case.claimed


class TestOTToBC:
    @pytest.mark.parametrize("seed", range(4))
    def test_honest_open(self, seed):
        case = get_case("pi6.honest")
        d = case.distinguishers["forward-reveal"]()
        assert run(case.real, d, seed=seed, clauses=case.clauses).output == 1

    @pytest.mark.parametrize("condition", ["honest", "dB"])
    def test_perfect(self, condition):
        report, _ = get_case(f"pi6.{condition}").best_deterministic()
        assert report.fraction == 0

    @pytest.mark.parametrize("k", [1, 2, 4])
    def test_binding_attack(self, k):
        case = get_case("pi6.dA", k=k)
        report = evaluate_case(case, case.distinguishers["binding-attack"]())
        assert report.fraction == case.claimed == Fraction(1, 2**k)

    def test_binding_scan(self):
        case = get_case("pi6.dA", k=1)
        report, _ = case.best_deterministic()
        assert report.fraction == HALF

    def test_hiding(self):
        case = get_case("pi6.dB", k=2)
        views = []
        for x in (0, 1):
            inputs = {"x": x, "open": BOTTOM, "ot0.b": 0, "ot1.b": 1}
            views.append(observation_distribution(ScanningDistinguisher.for_system(case.real, inputs), case.real))
        assert views[0] == views[1]

    def test_opening_check(self):
        pairs = ((0, 1), (1, 0))
        assert consistent_opening(pairs, (0, 1), (0, 0)) == 1
        assert consistent_opening(pairs, (0, 1), (1, 0)) is None
        assert consistent_opening(((0, 1), (1, 1)), (0, 0), (0, 1)) is None
        assert consistent_opening(((0, BOTTOM),), (0,), (0,)) is None

    def test_open_symbol_is_required_after_commit(self):
        case = get_case("pi6.honest")
        d = ScanningDistinguisher.for_system(case.real, {"x": 0, "open": Symbol.OPEN}, delays={"open": 10})
        run(case.real, d, clauses=case.clauses)
        assert d.first("recv") is Symbol.RECV
        assert d.first("reveal") == 0

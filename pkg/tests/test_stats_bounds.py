"""Exact tail oracles and the concentration bounds checked against them."""

import math
from fractions import Fraction

import pytest

from relbox.errors import InputError
from relbox.stats.bounds import (
    binomial_pmf,
    binomial_tail,
    binomial_tail_float,
    chernoff_upper,
    hoeffding_hypergeometric,
    hypergeometric_pmf,
    hypergeometric_tail,
    hypergeometric_tail_float,
    pi5_cheat_bound,
    pi5_cheat_pass_probability,
    quantum_ot_abort_probability,
    quantum_ot_envelopes,
    rabin_ot_abort_probability,
    rabin_ot_both_known_probability,
    rabin_ot_envelopes,
)

HALF = Fraction(1, 2)


class TestBinomial:
    def test_no_success_in_three(self):
        assert binomial_tail(3, HALF, 1, "lt") == Fraction(1, 8)

    @pytest.mark.parametrize(("n", "p"), [(5, Fraction(1, 3)), (12, HALF), (0, 0.25)])
    def test_everything_is_at_least_zero(self, n, p):
        assert binomial_tail(n, p, 0, "ge") == 1

    def test_twelve_coins_below_four(self):
        expected = Fraction(sum(math.comb(12, j) for j in range(4)), 4096)
        assert binomial_tail(12, HALF, 4, "lt") == expected == Fraction(299, 4096)

    def test_modes_are_complementary(self):
        assert binomial_tail(9, Fraction(1, 3), 4, "lt") + binomial_tail(9, Fraction(1, 3), 4, "ge") == 1
        assert binomial_tail(9, Fraction(1, 3), 4, "le") + binomial_tail(9, Fraction(1, 3), 4, "gt") == 1

    def test_pmf_outside_support(self):
        assert binomial_pmf(4, HALF, 5) == 0

    @pytest.mark.parametrize("mode", ["lt", "le", "ge", "gt"])
    def test_scipy_agrees(self, mode):
        exact = binomial_tail(30, Fraction(3, 10), 9, mode)
        assert binomial_tail_float(30, 0.3, 9, mode) == pytest.approx(float(exact))

    @pytest.mark.parametrize(("n", "k"), [(-1, 0), (3, 5)])
    def test_bad_arguments(self, n, k):
        with pytest.raises(InputError):
            binomial_tail(n, HALF, k)

    def test_bad_mode(self):
        with pytest.raises(InputError):
            binomial_tail(3, HALF, 1, "eq")


class TestHypergeometric:
    def test_pmf_sums_to_one(self):
        assert sum(hypergeometric_pmf(10, 4, 5, z) for z in range(5)) == 1

    def test_known_value(self):
        # two marked among four, draw two: both marked with probability 1/6
        assert hypergeometric_pmf(4, 2, 2, 2) == Fraction(1, 6)

    def test_scipy_agrees(self):
        assert hypergeometric_tail_float(24, 12, 12, 4) == pytest.approx(float(hypergeometric_tail(24, 12, 12, 4)))

    def test_bad_arguments(self):
        with pytest.raises(InputError):
            hypergeometric_pmf(5, 6, 2, 1)


class TestChernoff:
    def test_zero_delta(self):
        assert chernoff_upper(5.0, 0.0) == 1.0
        assert chernoff_upper(5.0, 0.0, "lower") == 1.0

    def test_upper_value(self):
        assert chernoff_upper(6.0, 1.0, "upper") == pytest.approx(math.exp(-2))

    @pytest.mark.parametrize(("mu", "delta"), [(0.0, 0.5), (1.0, -0.1)])
    def test_bad_arguments(self, mu, delta):
        with pytest.raises(InputError):
            chernoff_upper(mu, delta)

    @pytest.mark.parametrize("n", [6, 12, 24])
    @pytest.mark.parametrize("delta", [Fraction(1, 3), Fraction(1, 2), Fraction(1)])
    def test_dominates_exact_tails(self, n, delta):
        mu = Fraction(n, 2)
        upper = binomial_tail(n, HALF, math.ceil((1 + delta) * mu), "ge")
        lower = binomial_tail(n, HALF, math.floor((1 - delta) * mu), "le")
        assert upper <= chernoff_upper(float(mu), float(delta), "upper")
        assert lower <= chernoff_upper(float(mu), float(delta), "lower")


class TestHoeffding:
    def test_formula(self):
        assert hoeffding_hypergeometric(24, 12, 12, 0.25) == pytest.approx(math.exp(-1.5))

    def test_tiny_t_is_trivial(self):
        assert hoeffding_hypergeometric(24, 12, 12, 1e-9) == pytest.approx(1.0)

    @pytest.mark.parametrize("t", [0.0, 0.5, 0.7])
    def test_t_out_of_range(self, t):
        with pytest.raises(InputError):
            hoeffding_hypergeometric(24, 12, 12, t)

    @pytest.mark.parametrize("n", [12, 16, 24])
    @pytest.mark.parametrize("t", [Fraction(1, 8), Fraction(1, 4), Fraction(3, 8)])
    def test_dominates_exact_tails(self, n, t):
        x = h = n // 2
        exact = hypergeometric_tail(n, x, h, math.floor((Fraction(x, n) - t) * h), "le")
        assert exact <= hoeffding_hypergeometric(n, x, h, float(t))


class TestProtocolQuantities:
    def test_rabin_abort_at_k_one(self):
        assert rabin_ot_abort_probability(1) == Fraction(1, 8)

    def test_rabin_both_known_at_k_one(self):
        assert rabin_ot_both_known_probability(1) == Fraction(1, 2)

    @pytest.mark.parametrize("k", [1, 4, 10])
    def test_rabin_envelopes_dominate(self, k):
        abort, both = rabin_ot_envelopes(k)
        assert rabin_ot_abort_probability(k) <= abort
        assert rabin_ot_both_known_probability(k) <= both

    def test_quantum_abort_at_twelve_states(self):
        assert quantum_ot_abort_probability(12) == binomial_tail(6, HALF, 2, "lt") == Fraction(7, 64)

    def test_quantum_envelopes(self):
        abort, both = quantum_ot_envelopes(12)
        assert abort == pytest.approx(math.exp(-1 / 6))
        assert both == pytest.approx(math.exp(-1 / 9))

    def test_cheat_pass_probability(self):
        assert pi5_cheat_pass_probability(12, 6, 0) == 1
        # every state unmeasured: all six tested states are unmeasured
        assert pi5_cheat_pass_probability(12, 6, 12) == Fraction(3, 4) ** 6

    @pytest.mark.parametrize("x", [2, 6, 12])
    def test_cheat_bound_dominates(self, x):
        assert float(pi5_cheat_pass_probability(12, 6, x)) <= pi5_cheat_bound(12, 6, x)

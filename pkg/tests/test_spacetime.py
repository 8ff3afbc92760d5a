"""Light-cone order, boosts, cuts and causality functions."""

import itertools

import numpy as np
import pytest

from relbox.errors import InputError, PosetSizeError
from relbox.settings import Settings
from relbox.spacetime import (
    Axiom,
    FinitePoset,
    SpacetimePoint,
    causal_precedes,
    causal_precedes_strict,
    enumerate_cuts,
    frontier,
    gap_causality_function,
    is_cut,
    lorentz_boost,
    validate_causality_function,
)


def point(x: float, t: float, y: float = 0.0, z: float = 0.0) -> SpacetimePoint:
    return SpacetimePoint((x, y, z), t)


class TestSpacetimePoint:
    def test_coordinates_are_floats(self):
        p = SpacetimePoint((1, 2, 3), 4)
        assert p.x == (1.0, 2.0, 3.0)
        assert p.t == 4.0

    @pytest.mark.parametrize(
        ("x", "t"),
        [((float("nan"), 0, 0), 0), ((0, 0, 0), float("inf")), ((0, float("-inf"), 0), 1)],
    )
    def test_non_finite_rejected(self, x, t):
        with pytest.raises(InputError):
            SpacetimePoint(x, t)

    def test_wrong_dimension_rejected(self):
        with pytest.raises(InputError):
            SpacetimePoint((0, 0), 0)


class TestCausalPrecedes:
    @pytest.mark.parametrize(
        ("p", "q", "expected"),
        [
            (point(0, 0), point(0, 1), True),
            (point(0, 0), point(2, 1), False),
            (point(0, 0), point(1, 1), True),  # on the light cone
            (point(0, 1), point(0, 0), False),
            (point(0, 0), point(0.6, 1, y=0.8), True),
        ],
    )
    def test_examples(self, p, q, expected):
        assert causal_precedes(p, q) is expected

    def test_reflexive(self):
        p = SpacetimePoint((1, 2, 3), 5)
        assert causal_precedes(p, p)
        assert not causal_precedes_strict(p, p)

    def test_relative_slack_at_the_cone(self):
        assert causal_precedes(point(0, 0), point(1 + 5e-10, 1))
        assert not causal_precedes(point(0, 0), point(1 + 1e-6, 1))
        assert causal_precedes(point(0, 0), point(1000 + 5e-7, 1000))

    def test_speed_of_light_scales_reach(self):
        assert not causal_precedes(point(0, 0), point(2, 1), c=1.0)
        assert causal_precedes(point(0, 0), point(2, 1), c=2.0)

    @pytest.mark.parametrize("c", [0.0, -1.0])
    def test_non_positive_c_rejected(self, c):
        with pytest.raises(InputError):
            causal_precedes(point(0, 0), point(0, 1), c=c)

    def test_transitive_on_random_triples(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            p = point(*rng.uniform(-5, 5, size=2))
            q = self._inside_future(rng, p)
            r = self._inside_future(rng, q)
            assert causal_precedes(p, q)
            assert causal_precedes(q, r)
            assert causal_precedes(p, r)

    @staticmethod
    def _inside_future(rng, p: SpacetimePoint) -> SpacetimePoint:
        dt = rng.uniform(0, 3)
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        offset = direction * dt * rng.uniform(0, 1)
        return SpacetimePoint(tuple(np.add(p.x, offset)), p.t + dt)


class TestLorentzBoost:
    def test_known_value(self):
        boosted = lorentz_boost(point(1, 0), 0.6)
        assert boosted.x[0] == pytest.approx(1.25)
        assert boosted.x[1:] == (0.0, 0.0)
        assert boosted.t == pytest.approx(-0.75)

    def test_zero_velocity_is_identity(self):
        p = SpacetimePoint((1.5, -2, 3), 0.25)
        assert lorentz_boost(p, 0.0) == p

    @pytest.mark.parametrize("v", [-0.9, 0.3, 0.99])
    def test_origin_is_fixed(self, v):
        assert lorentz_boost(point(0, 0), v) == point(0, 0)

    @pytest.mark.parametrize("v", [1.0, -1.0, 2.5])
    def test_superluminal_rejected(self, v):
        with pytest.raises(InputError):
            lorentz_boost(point(0, 0), v)

    def test_order_is_invariant(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            p = SpacetimePoint(tuple(rng.uniform(-3, 3, size=3)), rng.uniform(-3, 3))
            q = SpacetimePoint(tuple(rng.uniform(-3, 3, size=3)), rng.uniform(-3, 3))
            v = rng.uniform(-0.95, 0.95)
            assert causal_precedes(lorentz_boost(p, v), lorentz_boost(q, v)) == causal_precedes(p, q)


class TestFinitePoset:
    def test_closure_is_transitive(self):
        poset = FinitePoset.from_pairs("abc", [("a", "b"), ("b", "c")])
        assert poset.leq("a", "c")
        assert poset.leq("b", "b")
        assert not poset.leq("c", "a")

    def test_cycle_rejected(self):
        with pytest.raises(InputError):
            FinitePoset.from_pairs("ab", [("a", "b"), ("b", "a")])

    def test_unknown_element_rejected(self):
        with pytest.raises(InputError):
            FinitePoset.from_pairs("ab", [("a", "z")])

    def test_size_limit(self):
        with pytest.raises(PosetSizeError):
            FinitePoset.from_pairs(range(13))
        assert len(FinitePoset.from_pairs(range(13), limit=13)) == 13

    def test_chain_respects_the_limit(self):
        with pytest.raises(PosetSizeError):
            FinitePoset.chain(range(20))
        assert len(FinitePoset.chain(range(20), limit=20)) == 20

    def test_limit_comes_from_settings(self, monkeypatch):
        monkeypatch.setattr("relbox.spacetime.get_settings", lambda: Settings(poset_limit=3))
        assert len(FinitePoset.chain("abc")) == 3
        with pytest.raises(PosetSizeError):
            FinitePoset.chain("abcd")

    def test_cut_enumeration_respects_the_limit(self):
        big = FinitePoset.chain(range(14), limit=14)
        with pytest.raises(PosetSizeError):
            enumerate_cuts(big)
        with pytest.raises(PosetSizeError):
            validate_causality_function(lambda c: frozenset(), big)
        assert len(enumerate_cuts(big, limit=14)) == 15

    def test_chain_distance(self):
        poset = FinitePoset.from_pairs("abcd", [("a", "b"), ("b", "d"), ("a", "c"), ("c", "d")])
        assert poset.chain_distance("a", "d") == 2
        assert poset.chain_distance("a", "a") == 0
        assert poset.chain_distance("b", "c") == -1


class TestCuts:
    @pytest.fixture
    def chain(self) -> FinitePoset:
        return FinitePoset.chain("abc")

    def test_examples(self, chain):
        assert is_cut(set(), chain)
        assert is_cut({"a", "b", "c"}, chain)
        assert not is_cut({"b"}, chain)
        assert is_cut({"a", "b"}, chain)

    def test_unknown_label_rejected(self, chain):
        with pytest.raises(InputError):
            is_cut({"z"}, chain)

    def test_chain_has_one_cut_per_prefix(self, chain):
        assert enumerate_cuts(chain) == [frozenset(), frozenset("a"), frozenset("ab"), frozenset("abc")]

    def test_antichain_cuts_are_all_subsets(self):
        poset = FinitePoset.from_pairs("abc")
        assert len(enumerate_cuts(poset)) == 8

    def test_frontier(self):
        poset = FinitePoset.from_pairs("abc", [("a", "b"), ("a", "c")])
        assert frontier({"a", "b", "c"}, poset) == {"b", "c"}

    def test_union_of_cuts_is_a_cut(self):
        poset = FinitePoset.from_pairs("abcde", [("a", "b"), ("a", "c"), ("c", "d"), ("e", "d")])
        cuts = enumerate_cuts(poset)
        for c1, c2 in itertools.product(cuts, repeat=2):
            assert is_cut(c1 | c2, poset)


class TestCausalityFunctions:
    @pytest.fixture
    def chain(self) -> FinitePoset:
        return FinitePoset.chain("abc")

    def test_constant_empty_passes(self, chain):
        assert validate_causality_function(lambda c: frozenset(), chain).ok

    def test_identity_fails_strict_shrink(self, chain):
        report = validate_causality_function(lambda c: c, chain)
        assert Axiom.STRICT_SHRINK in report.failed()
        assert Axiom.TERMINATION in report.failed()
        assert Axiom.UNION not in report.failed()

    def test_removing_the_top_passes(self, chain):
        table = {c: c - frontier(c, chain) for c in enumerate_cuts(chain)}
        assert validate_causality_function(table, chain).ok

    def test_non_cut_image_reported(self, chain):
        report = validate_causality_function(lambda c: frozenset("b") if c == frozenset("abc") else frozenset(), chain)
        assert Axiom.CUT_VALUED in report.failed()

    def test_non_monotone_reported(self, chain):
        def chi(c: frozenset) -> frozenset:
            return frozenset("a") if c == frozenset("ab") else frozenset()

        assert Axiom.MONOTONE in validate_causality_function(chi, chain).failed()

    @pytest.mark.parametrize("delta", [1, 2, 3])
    def test_gap_functions_pass(self, delta):
        poset = FinitePoset.from_pairs("abcde", [("a", "b"), ("b", "c"), ("a", "d"), ("d", "e")])
        assert validate_causality_function(gap_causality_function(poset, delta), poset).ok

    def test_gap_below_one_rejected(self, chain):
        with pytest.raises(InputError):
            gap_causality_function(chain, 0)

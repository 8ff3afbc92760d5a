"""Minkowski spacetime points, causal order and finite causality functions.

The causal order decides which messages may influence which emissions: an input stamped at P
can only affect an output stamped at Q when ``‖xQ − xP‖ ≤ c·(tQ − tP)``. The finite-poset half
of the module checks the axioms a causality function χ on the cuts of a poset has to satisfy.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import InputError, PosetSizeError
from .settings import Settings, get_settings

logger = logging.getLogger(__name__)

# Relative slack for boundary comparisons (a light-speed message lands exactly on the cone).
_TOLERANCE = 1e-9


@dataclass(frozen=True, order=True)
class SpacetimePoint:
    """An event location: spatial coordinates ``x`` (three reals) and time ``t``."""

    x: tuple[float, float, float]
    t: float

    def __post_init__(self) -> None:
        if len(self.x) != 3:
            raise InputError(f"Spatial coordinates need three components, got {self.x!r}")
        if not (all(math.isfinite(v) for v in self.x) and math.isfinite(self.t)):
            raise InputError(f"Spacetime coordinates must be finite, got x={self.x!r}, t={self.t!r}")
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "t", float(self.t))


def _check_c(c: float) -> None:
    if not c > 0:
        raise InputError(f"Speed of light must be positive, got {c}")


def causal_precedes(p: SpacetimePoint, q: SpacetimePoint, c: float = 1.0) -> bool:
    """Return whether P ⪯ Q: Q lies in the closed future light cone of P.

    The relation is reflexive, so messages stamped at the same point may be chained. A message
    travelling exactly at the speed of light satisfies it.

    The comparison allows a relative slack of 1e-9: Q is accepted when
    ``‖xQ − xP‖ ≤ c·(tQ − tP) + 1e-9·max(1, c·(tQ − tP))``. Emissions up to that margin faster
    than light therefore pass the causality checks and the transcript audit.

    Args:
        p: Earlier candidate
        q: Later candidate
        c: Speed of light (> 0)

    Returns:
        True iff ``‖xQ − xP‖ ≤ c·(tQ − tP)`` (up to a relative float tolerance)

    Raises:
        InputError: If ``c`` is not positive

    """
    _check_c(c)
    reach = c * (q.t - p.t)
    if reach < 0:
        return False
    distance = float(np.linalg.norm(np.subtract(q.x, p.x)))
    return distance <= reach + _TOLERANCE * max(1.0, reach)


def causal_precedes_strict(p: SpacetimePoint, q: SpacetimePoint, c: float = 1.0) -> bool:
    """Return whether P ≺ Q, i.e. P ⪯ Q and the points are distinct."""
    return p != q and causal_precedes(p, q, c)


def lorentz_boost(p: SpacetimePoint, v: float, c: float = 1.0) -> SpacetimePoint:
    """Boost a point along the first spatial axis with velocity ``v``.

    Raises:
        InputError: If ``|v| >= c`` or ``c`` is not positive

    """
    _check_c(c)
    if abs(v) >= c:
        raise InputError(f"Boost velocity must satisfy |v| < c, got v={v}, c={c}")
    gamma = 1.0 / math.sqrt(1.0 - (v / c) ** 2)
    x0, x1, x2 = p.x
    return SpacetimePoint((gamma * (x0 - v * p.t), x1, x2), gamma * (p.t - v * x0 / c**2))


def point_for(side: str, t: float, settings: Settings) -> SpacetimePoint:
    """Stamp a point at the default location of ``side`` at time ``t``."""
    return SpacetimePoint(settings.location(side), t)


# =============================================================================
# FINITE POSETS AND CUTS
# =============================================================================


def poset_limit(limit: int | None = None) -> int:
    """``limit``, or the configured :attr:`~relbox.settings.Settings.poset_limit` when None."""
    return get_settings().poset_limit if limit is None else limit


def check_poset_size(size: int, limit: int | None = None) -> None:
    """Refuse posets whose cut enumeration would be too large.

    Raises:
        PosetSizeError: If ``size`` exceeds :func:`poset_limit`

    """
    limit = poset_limit(limit)
    if size > limit:
        raise PosetSizeError(f"Poset has {size} elements, limit is {limit}")


@dataclass(frozen=True)
class FinitePoset:
    """A finite partially ordered set given by its reflexive-transitive closure.

    Use :meth:`from_pairs` to build one from generating relations.
    """

    elements: tuple[Hashable, ...]
    leq_pairs: frozenset[tuple[Hashable, Hashable]] = field(repr=False)

    @classmethod
    def from_pairs(
        cls,
        elements: Iterable[Hashable],
        pairs: Iterable[tuple[Hashable, Hashable]] = (),
        limit: int | None = None,
    ) -> FinitePoset:
        """Close ``pairs`` (meaning a ≤ b) reflexively and transitively.

        Raises:
            PosetSizeError: If there are more than ``limit`` elements (default: the configured
                ``poset_limit``)
            InputError: If a pair names an unknown element or the closure is not antisymmetric

        """
        elements = tuple(dict.fromkeys(elements))
        check_poset_size(len(elements), limit)
        index = {e: i for i, e in enumerate(elements)}
        reach = np.eye(len(elements), dtype=bool)
        for a, b in pairs:
            if a not in index or b not in index:
                raise InputError(f"Relation ({a!r}, {b!r}) names an element outside the poset")
            reach[index[a], index[b]] = True
        # Warshall closure
        for k in range(len(elements)):
            reach |= np.outer(reach[:, k], reach[k, :])
        if np.any(reach & reach.T & ~np.eye(len(elements), dtype=bool)):
            raise InputError("Relations contain a cycle; the closure is not antisymmetric")
        closure = frozenset((elements[i], elements[j]) for i, j in zip(*np.nonzero(reach), strict=True))
        return cls(elements, closure)

    @classmethod
    def chain(cls, elements: Iterable[Hashable], limit: int | None = None) -> FinitePoset:
        """Totally ordered poset in the given order.

        Raises:
            PosetSizeError: If there are more elements than the limit

        """
        elements = tuple(elements)
        return cls.from_pairs(elements, itertools.pairwise(elements), limit)

    def leq(self, a: Hashable, b: Hashable) -> bool:
        """Return whether a ≤ b."""
        return (a, b) in self.leq_pairs

    def below(self, t: Hashable) -> frozenset:
        """Principal cut ↓t."""
        return frozenset(u for u in self.elements if self.leq(u, t))

    @cached_property
    def _longest_chains(self) -> dict[tuple[Hashable, Hashable], int]:
        # Longest strict chain length between comparable pairs, in a topological order.
        order = sorted(self.elements, key=lambda e: len(self.below(e)))
        length: dict[tuple[Hashable, Hashable], int] = {}
        for t in order:
            for u in order:
                if u == t or not self.leq(u, t):
                    continue
                best = 1
                for m in order:
                    if m not in {u, t} and self.leq(u, m) and self.leq(m, t):
                        best = max(best, length.get((u, m), 0) + 1)
                length[u, t] = best
        return length

    def chain_distance(self, u: Hashable, t: Hashable) -> int:
        """Number of strict steps in the longest chain from u up to t (0 if u = t, -1 if u ≰ t)."""
        if u == t:
            return 0
        return self._longest_chains.get((u, t), -1)

    def __len__(self) -> int:
        return len(self.elements)


def _check_subset(c: Iterable[Hashable], poset: FinitePoset) -> frozenset:
    c = frozenset(c)
    unknown = c.difference(poset.elements)
    if unknown:
        raise InputError(f"Labels {sorted(map(repr, unknown))} are not elements of the poset")
    return c


def is_cut(c: Iterable[Hashable], poset: FinitePoset) -> bool:
    """Return whether ``c`` is a cut: a downward-closed subset of the poset.

    Raises:
        InputError: If ``c`` contains labels outside the poset

    """
    c = _check_subset(c, poset)
    return all(poset.below(t) <= c for t in c)


def frontier(c: Iterable[Hashable], poset: FinitePoset) -> frozenset:
    """Maximal elements of a cut (the part a causality function has to eat first)."""
    c = _check_subset(c, poset)
    return frozenset(t for t in c if not any(t != u and poset.leq(t, u) for u in c))


def enumerate_cuts(poset: FinitePoset, limit: int | None = None) -> list[frozenset]:
    """All cuts of the poset, ordered by size then by element order.

    Raises:
        PosetSizeError: If the poset is larger than ``limit`` (default: the configured ``poset_limit``)

    """
    check_poset_size(len(poset), limit)
    cuts = []
    for size in range(len(poset) + 1):
        for combo in itertools.combinations(poset.elements, size):
            if is_cut(combo, poset):
                cuts.append(frozenset(combo))
    return cuts


class Axiom(str, Enum):
    """The conditions a causality function must meet."""

    CUT_VALUED = "cut-valued"
    UNION = "union"
    MONOTONE = "monotone"
    STRICT_SHRINK = "strict-shrink"
    TERMINATION = "termination"


@dataclass(frozen=True)
class Violation:
    """A single failed axiom together with the cuts (and element) that witness it."""

    axiom: Axiom
    witness: tuple


@dataclass(frozen=True)
class CausalityReport:
    """Result of :func:`validate_causality_function`; empty ``violations`` means all axioms hold."""

    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        """True when no axiom is violated."""
        return not self.violations

    def failed(self) -> set[Axiom]:
        """Names of violated axioms."""
        return {v.axiom for v in self.violations}


CausalityFunction = Callable[[frozenset], Iterable[Hashable]] | Mapping[frozenset, Iterable[Hashable]]


def validate_causality_function(
    chi: CausalityFunction, poset: FinitePoset, limit: int | None = None
) -> CausalityReport:
    """Check the causality-function axioms of ``chi`` over every cut of ``poset``.

    Checked conditions:
        - χ(C) is itself a cut
        - χ(C ∪ D) = χ(C) ∪ χ(D)
        - C ⊆ D implies χ(C) ⊆ χ(D)
        - χ(C) ⊊ C for every non-empty cut C
        - every element eventually leaves the iterates χⁿ(C), n ≤ |T| + 1

    Args:
        chi: Callable or mapping from cuts (frozensets) to subsets of the poset
        poset: The finite poset T
        limit: Largest accepted poset (default: the configured ``poset_limit``)

    Returns:
        Report listing every violation with its witness

    Raises:
        PosetSizeError: If the poset is larger than the limit

    """
    apply = chi.__getitem__ if isinstance(chi, Mapping) else chi
    cuts = enumerate_cuts(poset, limit)
    images = {c: _check_subset(apply(c), poset) for c in cuts}
    violations: list[Violation] = []

    for c in cuts:
        if not is_cut(images[c], poset):
            violations.append(Violation(Axiom.CUT_VALUED, (c, images[c])))
        if c and not images[c] < c:
            violations.append(Violation(Axiom.STRICT_SHRINK, (c, images[c])))
    for c, d in itertools.combinations(cuts, 2):
        union = c | d
        if union in images and images[union] != images[c] | images[d]:
            violations.append(Violation(Axiom.UNION, (c, d)))
        if c <= d and not images[c] <= images[d]:
            violations.append(Violation(Axiom.MONOTONE, (c, d)))
        elif d <= c and not images[d] <= images[c]:
            violations.append(Violation(Axiom.MONOTONE, (d, c)))

    for c in cuts:
        remaining = set(poset.elements)
        current = c
        for _ in range(len(poset) + 1):
            if current not in images:
                # non-cut image, already reported; a mapping cannot be iterated further
                if isinstance(chi, Mapping):
                    remaining.clear()
                    break
                images[current] = _check_subset(apply(current), poset)
            current = images[current]
            remaining &= current
            if not remaining:
                break
        for t in sorted(remaining, key=poset.elements.index):
            violations.append(Violation(Axiom.TERMINATION, (c, t)))

    logger.debug("Checked %d cuts, %d violations", len(cuts), len(violations))
    return CausalityReport(tuple(violations))


def gap_causality_function(poset: FinitePoset, delta: int = 1) -> Callable[[frozenset], frozenset]:
    """Causality function that lags a cut by ``delta`` strict steps.

    χ(C) keeps u exactly when some t ∈ C sits at least ``delta`` steps above u along a chain.
    It is the union of its values on principal cuts, so the union axiom holds by construction;
    ``delta = 1`` removes the frontier of C.

    Raises:
        InputError: If ``delta < 1``

    """
    if delta < 1:
        raise InputError(f"delta must be at least 1, got {delta}")

    def chi(c: frozenset) -> frozenset:
        return frozenset(u for u in poset.elements if any(poset.chain_distance(u, t) >= delta for t in c))

    return chi

"""Random sources for seeded sampling and exact enumeration.

Boxes never touch a global generator. Each box of a run draws from its own :class:`Randomness`
stream, obtained from the run's :class:`RandomSource`:

- :class:`SeededSource` gives every (seed, trial, box) triple an independent counter-based
  Philox stream, so reruns with the same seed reproduce transcripts exactly.
- :class:`TapeSource` replays a branch prefix from a :class:`Tape`. The :func:`explore` driver
  re-executes an experiment once per leaf of its probability tree, giving exact outcome
  distributions with :class:`~fractions.Fraction` weights.

Uniform bits drawn under enumeration are :class:`LazyBit` GF(2) affine forms. XOR keeps them
symbolic and the tape only branches once a concrete value is actually needed, so a one-time pad
that is XOR-ed back out never multiplies the number of leaves.
"""

from __future__ import annotations

import itertools
import logging
import zlib
from abc import ABC, abstractmethod
from collections.abc import Callable, Hashable, Iterable, Sequence
from fractions import Fraction
from typing import Any, TypeVar

import numpy as np

from .errors import EnumerationSizeError, InputError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

HALF = Fraction(1, 2)


def to_fraction(p: float | Fraction, max_denominator: int = 1 << 20) -> Fraction:
    """Convert a probability to an exact fraction (floats via ``limit_denominator``).

    Raises:
        InputError: If ``p`` is outside [0, 1]

    """
    q = p if isinstance(p, Fraction) else Fraction(p).limit_denominator(max_denominator)
    if not 0 <= q <= 1:
        raise InputError(f"Probability must lie in [0, 1], got {p}")
    return q


def stable_id(key: str) -> int:
    """Process-independent integer id of a box name (``hash`` is salted per process)."""
    return zlib.crc32(key.encode("utf-8"))


class Randomness(ABC):
    """Per-box random stream used by box handlers."""

    @abstractmethod
    def bit(self) -> Any:
        """Uniform bit (an int, or a :class:`LazyBit` under enumeration)."""

    @abstractmethod
    def bits(self, s: int) -> Any:
        """Uniform s-bit string encoded as an int in [0, 2**s)."""

    @abstractmethod
    def bernoulli(self, p: float | Fraction) -> bool:
        """True with probability ``p``."""

    @abstractmethod
    def choice(self, options: Sequence[T]) -> T:
        """Uniformly chosen element of a non-empty sequence."""

    @abstractmethod
    def sample(self, population: Iterable[T], k: int) -> frozenset[T]:
        """Uniform k-subset of ``population``."""


class RandomSource(ABC):
    """Factory of per-box streams for one run."""

    @abstractmethod
    def stream(self, key: str) -> Randomness:
        """Return the stream of the box registered under ``key``."""


def _check_sample(population: Sequence, k: int) -> None:
    if not 0 <= k <= len(population):
        raise InputError(f"Cannot sample {k} elements from a population of {len(population)}")


# =============================================================================
# SEEDED SAMPLING
# =============================================================================


class SeededRandomness(Randomness):
    """Stream backed by a numpy Philox generator."""

    def __init__(self, generator: np.random.Generator) -> None:
        self._gen = generator

    def bit(self) -> int:
        return int(self._gen.integers(2))

    def bits(self, s: int) -> int:
        if s < 1:
            raise InputError(f"String length must be positive, got {s}")
        if s > 63:
            raise InputError(f"Strings longer than 63 bits are not supported, got {s}")
        return int(self._gen.integers(0, 1 << s, dtype=np.uint64))

    def bernoulli(self, p: float | Fraction) -> bool:
        return bool(self._gen.random() < float(p))

    def choice(self, options: Sequence[T]) -> T:
        if not options:
            raise InputError("Cannot choose from an empty sequence")
        return options[int(self._gen.integers(len(options)))]

    def sample(self, population: Iterable[T], k: int) -> frozenset[T]:
        pool = sorted(population)
        _check_sample(pool, k)
        picked = self._gen.choice(len(pool), size=k, replace=False)
        return frozenset(pool[int(i)] for i in picked)


class SeededSource(RandomSource):
    """Independent Philox streams per (seed, trial, box name)."""

    def __init__(self, seed: int = 0, trial: int = 0) -> None:
        if seed < 0 or trial < 0:
            raise InputError(f"Seed and trial must be non-negative, got seed={seed}, trial={trial}")
        self.seed = seed
        self.trial = trial

    def stream(self, key: str) -> SeededRandomness:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.trial, stable_id(key)))
        return SeededRandomness(np.random.Generator(np.random.Philox(seq)))


# =============================================================================
# EXACT ENUMERATION
# =============================================================================


class Tape:
    """Branch record of one re-execution.

    Decisions up to ``len(prefix)`` are replayed from the prefix; later decisions take the first
    positive-weight option and record how many options there were, so the explorer can schedule
    the siblings.

    Forced lazy bits are recorded as GF(2) equations ``var = ⊕ rest ⊕ const`` (one pivot variable
    per equation), so forcing ``u ⊕ v`` costs one branch and leaves ``u`` and ``v`` individually
    uniform.
    """

    def __init__(self, prefix: Sequence[int] = ()) -> None:
        self._prefix = tuple(prefix)
        self.choices: list[int] = []
        self.arities: list[int] = []
        self.weight = Fraction(1)
        self._rows: dict[int, tuple[frozenset[int], int]] = {}
        self._next_var = 0

    def branch(self, weights: Sequence[Fraction]) -> int:
        """Pick an option index; weights must sum to one."""
        options = [i for i, w in enumerate(weights) if w > 0]
        if not options:
            raise InputError("Branch has no option with positive weight")
        if len(options) == 1:
            return options[0]
        depth = len(self.choices)
        position = self._prefix[depth] if depth < len(self._prefix) else 0
        self.choices.append(position)
        self.arities.append(len(options))
        index = options[position]
        self.weight *= weights[index]
        return index

    def uniform(self, n: int) -> int:
        """Uniform index in ``range(n)``."""
        return self.branch([Fraction(1, n)] * n)

    def new_var(self) -> int:
        """Allocate a fresh uniform GF(2) variable."""
        var = self._next_var
        self._next_var += 1
        return var

    def reduce(self, variables: frozenset[int], const: int) -> tuple[frozenset[int], int]:
        """Substitute every pivot variable until only free variables remain."""
        while pivots := variables & self._rows.keys():
            var = min(pivots)
            rest, c = self._rows[var]
            variables = (variables - {var}) ^ rest
            const ^= c
        return variables, const

    def evaluate(self, variables: frozenset[int], const: int = 0) -> int:
        """Concrete value of ``const ⊕ (⊕ variables)``, branching once if it is still free."""
        variables, const = self.reduce(variables, const)
        if not variables:
            return const
        value = self.uniform(2)
        pivot = max(variables)
        self._rows[pivot] = (variables - {pivot}, value ^ const)
        return value

    def value_of(self, var: int) -> int:
        """Concrete value of a single variable."""
        return self.evaluate(frozenset({var}))


class LazyBit:
    """Uniform bit kept as a GF(2) affine form ``const ⊕ (⊕ vars)`` until inspected.

    XOR with ints or other lazy bits stays symbolic; a result without variables collapses to a
    plain int. Equality of two forms over the same variables is decided without branching.
    ``int()``, ``bool()``, indexing and AND/OR force a concrete value.
    """

    __slots__ = ("_const", "_tape", "_vars")
    __hash__ = None  # type: ignore[assignment]

    def __init__(self, tape: Tape, variables: frozenset[int], const: int = 0) -> None:
        self._tape = tape
        self._vars = variables
        self._const = const

    @classmethod
    def fresh(cls, tape: Tape) -> LazyBit:
        """A new independent uniform bit."""
        return cls(tape, frozenset({tape.new_var()}))

    @staticmethod
    def _make(tape: Tape, variables: frozenset[int], const: int) -> LazyBit | int:
        if not variables:
            return const
        return LazyBit(tape, variables, const)

    def __xor__(self, other: object) -> LazyBit | int:
        if isinstance(other, LazyBit):
            return self._make(self._tape, self._vars ^ other._vars, self._const ^ other._const)
        if isinstance(other, int) and other in {0, 1}:
            return self._make(self._tape, self._vars, self._const ^ int(other))
        return NotImplemented

    __rxor__ = __xor__

    def value(self) -> int:
        """Force the concrete bit."""
        return self._tape.evaluate(self._vars, self._const)

    def __int__(self) -> int:
        return self.value()

    __index__ = __int__

    def __bool__(self) -> bool:
        return bool(self.value())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (LazyBit, int)):
            diff = self ^ other
            if diff is NotImplemented:
                return False
            return diff == 0 if isinstance(diff, int) else diff.value() == 0
        return NotImplemented

    def __ne__(self, other: object) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __and__(self, other: object) -> int:
        return self.value() & int(other)

    __rand__ = __and__

    def __or__(self, other: object) -> int:
        return self.value() | int(other)

    __ror__ = __or__

    def __invert__(self) -> LazyBit | int:
        return self ^ 1

    def __repr__(self) -> str:
        terms = " ⊕ ".join(f"v{v}" for v in sorted(self._vars))
        return f"LazyBit({terms} ⊕ {self._const})" if self._const else f"LazyBit({terms})"


class EnumeratingRandomness(Randomness):
    """Stream that branches on a shared tape."""

    def __init__(self, tape: Tape) -> None:
        self._tape = tape

    def bit(self) -> LazyBit:
        return LazyBit.fresh(self._tape)

    def bits(self, s: int) -> LazyBit | int:
        if s < 1:
            raise InputError(f"String length must be positive, got {s}")
        if s == 1:
            return self.bit()
        return self._tape.uniform(1 << s)

    def bernoulli(self, p: float | Fraction) -> bool:
        q = to_fraction(p)
        return self._tape.branch([1 - q, q]) == 1

    def choice(self, options: Sequence[T]) -> T:
        if not options:
            raise InputError("Cannot choose from an empty sequence")
        return options[self._tape.uniform(len(options))]

    def sample(self, population: Iterable[T], k: int) -> frozenset[T]:
        pool = sorted(population)
        _check_sample(pool, k)
        subsets = list(itertools.combinations(pool, k))
        return frozenset(subsets[self._tape.uniform(len(subsets))])


class TapeSource(RandomSource):
    """All boxes of a run branch on the same tape."""

    def __init__(self, tape: Tape) -> None:
        self.tape = tape

    def stream(self, key: str) -> EnumeratingRandomness:  # noqa: ARG002
        return EnumeratingRandomness(self.tape)


def explore(experiment: Callable[[TapeSource], R], limit: int = 1 << 24) -> list[tuple[Fraction, R]]:
    """Run ``experiment`` once per leaf of its probability tree.

    The experiment must be deterministic given its source. Leaves are visited depth first; each
    visit replays the branch prefix of the leaf and takes first options past it.

    Args:
        experiment: Callable receiving a fresh :class:`TapeSource` per leaf
        limit: Maximum number of leaves

    Returns:
        List of ``(weight, result)`` pairs whose weights sum to one

    Raises:
        EnumerationSizeError: If more than ``limit`` leaves would be visited

    """
    outcomes: list[tuple[Fraction, R]] = []
    pending: list[tuple[int, ...]] = [()]
    while pending:
        prefix = pending.pop()
        tape = Tape(prefix)
        result = experiment(TapeSource(tape))
        outcomes.append((tape.weight, result))
        for depth in range(len(prefix), len(tape.choices)):
            for alternative in range(tape.arities[depth] - 1, 0, -1):
                pending.append((*tape.choices[:depth], alternative))
        if len(outcomes) + len(pending) > limit:
            raise EnumerationSizeError(f"Exact enumeration exceeds {limit} leaves; use Monte Carlo")
    logger.debug("Enumerated %d leaves", len(outcomes))
    return outcomes


def distribution(outcomes: Iterable[tuple[Fraction, Hashable]]) -> dict[Hashable, Fraction]:
    """Merge weighted outcomes into an exact distribution."""
    dist: dict[Hashable, Fraction] = {}
    for weight, outcome in outcomes:
        dist[outcome] = dist.get(outcome, Fraction(0)) + weight
    return dist

"""Shared pieces of the constructions: the case record, protocol boxes and set bookkeeping."""

from __future__ import annotations

import functools
import logging
import operator
from abc import abstractmethod
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal

from ..engine import (
    BOTTOM,
    Box,
    BoxContext,
    Causality,
    Direction,
    Distinguisher,
    Kind,
    OrderClause,
    Port,
    Side,
    StampedMessage,
    System,
    as_system,
    is_abort,
)
from ..errors import InputError, ProtocolOrderError, WiringError
from ..randomness import Randomness
from ..settings import Settings, get_settings
from ..stats.advantage import AdvantageReport, best_deterministic_advantage, estimate_advantage, exact_advantage

logger = logging.getLogger(__name__)

IN, OUT = Direction.IN, Direction.OUT
ALICE, BOB, OUTER = Side.ALICE, Side.BOB, Side.OUTER

Condition = Literal["honest", "dA", "dB"]
Policy = Literal["random", "lexicographic"]
CONDITIONS: tuple[Condition, ...] = ("honest", "dA", "dB")

DistinguisherFactory = Callable[[], Distinguisher]


@dataclass
class ConstructionCase:
    """One of the three security conditions of a construction, ready to be evaluated.

    Attributes:
        label: Registry label, e.g. ``"pi4.dB"``
        condition: ``"honest"``, ``"dA"`` or ``"dB"``
        real: Π_A·R·Π_B, R_A·Π_B or Π_A·R_B
        ideal: S, σ_A·S_A or S_B·σ_B
        claimed: Claimed ε for this condition
        clauses: Ordering clauses audited on every run of ``real``
        input_space: Values per free input port for exhaustive scanning (None when too large)
        input_delays: Send times of scanning inputs that must not arrive at t = 0
        distinguishers: Named reference distinguishers
        params: Construction parameters (k, n, policy, ...)

    """

    label: str
    condition: Condition
    real: System
    ideal: System
    claimed: Fraction
    clauses: tuple[OrderClause, ...] = ()
    input_space: Mapping[str, Sequence[Any]] | None = None
    input_delays: Mapping[str, float] = field(default_factory=dict)
    distinguishers: Mapping[str, DistinguisherFactory] = field(default_factory=dict)
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        real, ideal = as_system(self.real).signature(), as_system(self.ideal).signature()
        if real != ideal:
            diff = sorted(p.name for p in real ^ ideal)
            raise WiringError(f"{self.label}: real and ideal systems expose different ports {diff}")

    @property
    def construction(self) -> str:
        """Construction name, e.g. ``"pi4"``."""
        return self.label.split(".", 1)[0]

    def best_deterministic(self, settings: Settings | None = None) -> tuple[AdvantageReport, dict[str, Any]]:
        """Exact best advantage over all scanning distinguishers.

        Raises:
            InputError: If the case has no finite input space

        """
        if self.input_space is None:
            raise InputError(f"{self.label} has no enumerable input space")
        return best_deterministic_advantage(
            self.real, self.ideal, self.input_space, settings, delays=self.input_delays
        )


def evaluate_case(
    case: ConstructionCase,
    distinguisher: Distinguisher,
    mode: Literal["exact", "montecarlo"] = "exact",
    trials: int = 10_000,
    seed: int = 0,
    settings: Settings | None = None,
) -> AdvantageReport:
    """Advantage of ``distinguisher`` on the case's (real, ideal) pair.

    Raises:
        EnumerationSizeError: In exact mode, if the probability tree is too large
        InputError: On an unknown mode or too few trials

    """
    settings = settings or get_settings()
    if mode == "exact":
        return exact_advantage(distinguisher, case.real, case.ideal, settings=settings, clauses=case.clauses)
    if mode == "montecarlo":
        return estimate_advantage(distinguisher, case.real, case.ideal, trials, seed, settings, case.clauses)
    raise InputError(f"Unknown mode {mode!r}; use exact or montecarlo")


def order_clauses(*stages: Iterable[str]) -> tuple[OrderClause, ...]:
    """Clauses saying every wire of a stage precedes every wire of the next stage."""
    groups = [tuple(s) for s in stages]
    return tuple(
        OrderClause(a, b) for first, second in zip(groups, groups[1:], strict=False) for a in first for b in second
    )


# =============================================================================
# PROTOCOL BOXES
# =============================================================================


def port(name: str, side: Side, direction: Direction, kind: Kind = Kind.BIT) -> Port:
    """Shorthand for a width-1 port."""
    return Port(name, side, direction, kind)


class ProtocolBox(Box):
    """Converter that stores each input once and advances a small state machine.

    Subclasses implement :meth:`advance`, which runs after every delivered message and uses
    :meth:`ready` to fire each stage exactly once.
    """

    def reset(self) -> None:
        self.got: dict[str, Any] = {}
        self.stages: set[str] = set()

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        if msg.port in self.got:
            raise ProtocolOrderError(f"{self.name}: second message on {msg.port!r}")
        self.got[msg.port] = msg.payload
        self.advance(ctx)

    def has(self, *ports: str) -> bool:
        return all(p in self.got for p in ports)

    def ready(self, stage: str, *ports: str) -> bool:
        """True once, when ``stage`` has not fired yet and all ``ports`` have delivered."""
        if stage in self.stages or not self.has(*ports):
            return False
        self.stages.add(stage)
        return True

    def any_abort(self, *ports: str) -> bool:
        return any(is_abort(self.got.get(p)) for p in ports)

    @abstractmethod
    def advance(self, ctx: BoxContext) -> None:
        """Fire every stage whose inputs are complete."""


class Relay(Box):
    """Converter that forwards each input port to its paired output port unchanged."""

    def __init__(self, name: str, routes: Iterable[tuple[Port, Port]], party: Side) -> None:
        routes = tuple(routes)
        super().__init__(
            name,
            ports=[p for pair in routes for p in pair],
            causality=[Causality((src.name,), dst.name) for src, dst in routes],
            party=party,
        )
        self.routes = {src.name: dst.name for src, dst in routes}

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        ctx.emit(self.routes[msg.port], msg.payload)


# =============================================================================
# INDEX SETS
# =============================================================================


def xor_all(values: Iterable[Any]) -> Any:
    """XOR of bits (lazy bits stay symbolic)."""
    return functools.reduce(operator.xor, values, 0)


def choose_sets(
    known: Iterable[int],
    universe: Iterable[int],
    size: int,
    b: Any,
    policy: Policy,
    rng: Randomness,
) -> tuple[frozenset[int], frozenset[int]] | None:
    """Pick a completely known I_b and a disjoint I_{1−b}, or None when too few indices are known.

    ``lexicographic`` takes the first ``size`` known indices and the first ``size`` of the rest;
    ``random`` draws both uniformly.
    """
    known = sorted(known)
    if len(known) < size:
        return None
    if policy == "lexicographic":
        chosen = frozenset(known[:size])
        other = frozenset(sorted(set(universe) - chosen)[:size])
    else:
        chosen = rng.sample(known, size)
        other = rng.sample(set(universe) - chosen, size)
    return (other, chosen) if b else (chosen, other)


def valid_sets(payload: Any, universe: Iterable[int], size: int) -> bool:
    """Whether ``payload`` is a pair of disjoint ``size``-subsets of ``universe``."""
    if not (isinstance(payload, tuple) and len(payload) == 2):
        return False
    allowed = frozenset(universe)
    first, second = payload
    return all(isinstance(s, frozenset) and len(s) == size and s <= allowed for s in payload) and not first & second


def masked_pads(sets: tuple[frozenset[int], frozenset[int]], keys: Mapping[int, Any], a0: Any, a1: Any) -> tuple:
    """(t₀, t₁) with t_i = (⊕_{j∈I_i} s_j) ⊕ a_i; ⊥ inputs give a ⊥ pad."""
    return tuple(
        BOTTOM if is_abort(a) else xor_all(keys[j] for j in sorted(indices)) ^ a
        for indices, a in zip(sets, (a0, a1), strict=True)
    )


def check_policy(policy: str) -> Policy:
    if policy not in {"random", "lexicographic"}:
        raise InputError(f"Unknown subset policy {policy!r}; use random or lexicographic")
    return policy  # type: ignore[return-value]


def small_space(space: Mapping[str, Sequence[Any]], limit: int = 4096) -> Mapping[str, Sequence[Any]] | None:
    """``space`` if its number of assignments is at most ``limit``, else None."""
    size = functools.reduce(operator.mul, (len(v) for v in space.values()), 1)
    return space if size <= limit else None

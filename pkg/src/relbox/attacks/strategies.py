"""Concrete merged simulators σ_BA for the impossibility chains.

A strategy sits between the dishonest-Bob resource (its ``bob`` ports) and the dishonest-Alice
resource (its ``alice`` ports). Its ports are derived from those two resources, so one strategy
class serves several primitives as long as the port names it needs are present.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from functools import partial
from typing import Any

from ..engine import BOTTOM, Box, BoxContext, Causality, Direction, Port, Side, StampedMessage, is_abort
from ..errors import UnknownTargetError, WiringError

logger = logging.getLogger(__name__)

ALICE, BOB = Side.ALICE, Side.BOB


class StrategyBox(Box):
    """σ_BA with one query port towards R_B, one answer port from R_B and Alice-side inputs of R_A.

    Attributes:
        query: Port sending Bob's choice into R_B (None for Rabin OT, which has no Bob input)
        answer: Port receiving R_B's output to Bob
        left: Ports feeding Alice's inputs of R_A
        feedback: Ports receiving R_A's outputs to Alice (only two-party computation has one)

    """

    forwards = True

    def __init__(self, name: str, ports: Iterable[Port]) -> None:
        ports = tuple(ports)
        by_role: dict[tuple[Side, Direction], list[Port]] = {}
        for p in ports:
            by_role.setdefault((p.side, p.direction), []).append(p)
        query = by_role.get((BOB, Direction.OUT), [])
        answer = by_role.get((BOB, Direction.IN), [])
        if len(query) > 1 or len(answer) != 1:
            raise WiringError(f"Strategy {name!r} needs one answer port and at most one query port on the bob side")
        self.query = query[0].name if query else None
        self.answer = answer[0].name
        self.left = tuple(p.name for p in by_role.get((ALICE, Direction.OUT), []))
        self.feedback = tuple(p.name for p in by_role.get((ALICE, Direction.IN), []))
        causality = [Causality((self.answer,), name) for name in self.left] if self.forwards else []
        super().__init__(name, ports, causality)

    def width(self, port: str) -> int:
        return self.port(port).width

    def send_query(self, ctx: BoxContext, value: Any) -> None:
        if self.query is not None:
            ctx.emit(self.query, value)

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        if msg.port == self.answer:
            self.reply(msg.payload, ctx)

    def reply(self, answer: Any, ctx: BoxContext) -> None:
        """React to R_B's output (default: ignore it)."""


class ForwardStrategy(StrategyBox):
    """Queries a fixed or random choice and copies the answer into every Alice-side input."""

    def __init__(self, ports: Iterable[Port], choice: int | None = 0, name: str = "forward") -> None:
        super().__init__(name, ports)
        self.choice = choice

    def on_start(self, ctx: BoxContext) -> None:
        self.send_query(ctx, ctx.rng.bit() if self.choice is None else self.choice)

    def reply(self, answer: Any, ctx: BoxContext) -> None:
        for name in self.left:
            ctx.emit(name, answer)


class ForwardOrUniformStrategy(StrategyBox):
    """Copies a delivered value; replaces ⊥ with a fresh uniform string."""

    def __init__(self, ports: Iterable[Port], name: str = "forward-or-uniform") -> None:
        super().__init__(name, ports)

    def reply(self, answer: Any, ctx: BoxContext) -> None:
        for name in self.left:
            ctx.emit(name, ctx.rng.bits(self.width(name)) if is_abort(answer) else answer)


class ForwardOrBottomStrategy(StrategyBox):
    """Copies R_B's output unchanged, ⊥ included."""

    def __init__(self, ports: Iterable[Port], name: str = "forward-or-bottom") -> None:
        super().__init__(name, ports)

    def reply(self, answer: Any, ctx: BoxContext) -> None:
        for name in self.left:
            ctx.emit(name, answer)


class EarlyStrategy(StrategyBox):
    """Feeds R_A before hearing from R_B: a constant, or fresh uniform strings when ``value`` is None."""

    forwards = False

    def __init__(self, ports: Iterable[Port], value: int | None = 0, name: str = "constant") -> None:
        super().__init__(name, ports)
        self.value = value

    def on_start(self, ctx: BoxContext) -> None:
        self.send_query(ctx, 0)
        for name in self.left:
            ctx.emit(name, ctx.rng.bits(self.width(name)) if self.value is None else self.value)


class TableStrategy(StrategyBox):
    """Deterministic single-bit strategy given as a lookup table.

    With ``early`` set, the Alice-side pair is sent at once and the answer is ignored. Otherwise
    ``table[r]`` is the pair sent after R_B answered r.
    """

    def __init__(
        self,
        ports: Iterable[Port],
        choice: int,
        table: tuple[tuple[int, int], tuple[int, int]] | None = None,
        early: tuple[int, int] | None = None,
        name: str = "table",
    ) -> None:
        self.forwards = early is None
        super().__init__(name, ports)
        if len(self.left) != 2:
            raise WiringError(f"Strategy {name!r} needs two Alice-side ports, got {self.left}")
        self.choice = choice
        self.table = table
        self.early = early

    def on_start(self, ctx: BoxContext) -> None:
        self.send_query(ctx, self.choice)
        if self.early is not None:
            for name, value in zip(self.left, self.early, strict=True):
                ctx.emit(name, value)

    def reply(self, answer: Any, ctx: BoxContext) -> None:
        if self.early is not None:
            return
        pair = (BOTTOM, BOTTOM) if is_abort(answer) else self.table[int(answer)]
        for name, value in zip(self.left, pair, strict=True):
            ctx.emit(name, value)


class FixedInputStrategy(StrategyBox):
    """Two-party computation: fixes Bob's input (uniform when None) and passes the result to R_A as Alice's input."""

    def __init__(self, ports: Iterable[Port], y: int | None = 0, name: str = "y-fixed") -> None:
        super().__init__(name, ports)
        self.y = y

    def on_start(self, ctx: BoxContext) -> None:
        self.send_query(ctx, ctx.rng.bit() if self.y is None else self.y)

    def reply(self, answer: Any, ctx: BoxContext) -> None:
        for name in self.left:
            ctx.emit(name, answer)


class ForwardRightInputStrategy(StrategyBox):
    """Claims to hand Bob's right-hand input y′ to R_B, which it cannot have seen yet.

    It sends y at once while declaring that y depends on R_A's output, so every strict run
    stops with a causality violation.
    """

    def __init__(self, ports: Iterable[Port], name: str = "forward-y") -> None:
        super().__init__(name, ports)
        if self.query is None or not self.feedback:
            raise WiringError(f"Strategy {name!r} needs a query port and a feedback port")
        self.causality = (*self.causality, Causality(self.feedback, self.query))

    def on_start(self, ctx: BoxContext) -> None:
        ctx.emit(self.query, 0)

    def reply(self, answer: Any, ctx: BoxContext) -> None:
        for name in self.left:
            ctx.emit(name, answer)


StrategyFactory = Callable[[Sequence[Port]], StrategyBox]


@dataclass(frozen=True)
class SimulatorStrategy:
    """A named σ_BA, built once the chain knows its ports."""

    name: str
    factory: StrategyFactory

    def build(self, ports: Sequence[Port]) -> StrategyBox:
        return self.factory(ports)


def _rot_library() -> list[SimulatorStrategy]:
    return [
        SimulatorStrategy("forward-b0", lambda ports: ForwardStrategy(ports, 0, "forward-b0")),
        SimulatorStrategy("forward-b1", lambda ports: ForwardStrategy(ports, 1, "forward-b1")),
        SimulatorStrategy("forward-random-b", lambda ports: ForwardStrategy(ports, None, "forward-random-b")),
        SimulatorStrategy("constant-0", lambda ports: EarlyStrategy(ports, 0, "constant-0")),
        SimulatorStrategy("fresh-uniform", lambda ports: EarlyStrategy(ports, None, "fresh-uniform")),
    ]


def _rabin_library() -> list[SimulatorStrategy]:
    return [
        SimulatorStrategy("forward-or-uniform", ForwardOrUniformStrategy),
        SimulatorStrategy("forward-or-bottom", ForwardOrBottomStrategy),
        SimulatorStrategy("constant", lambda ports: EarlyStrategy(ports, 0, "constant")),
        SimulatorStrategy("fresh-uniform", lambda ports: EarlyStrategy(ports, None, "fresh-uniform")),
    ]


def _mpc_library() -> list[SimulatorStrategy]:
    return [
        SimulatorStrategy("y-fixed-0", lambda ports: FixedInputStrategy(ports, 0, "y-fixed-0")),
        SimulatorStrategy("y-fixed-1", lambda ports: FixedInputStrategy(ports, 1, "y-fixed-1")),
        SimulatorStrategy("y-uniform", lambda ports: FixedInputStrategy(ports, None, "y-uniform")),
    ]


LIBRARIES: dict[str, Callable[[], list[SimulatorStrategy]]] = {
    "rot": _rot_library,
    "ot": _rot_library,
    "rabin": _rabin_library,
    "and": _mpc_library,
    "or": _mpc_library,
}


def strategy_library(kind: str) -> list[SimulatorStrategy]:
    """Representative σ_BA strategies for a primitive kind (``rot``, ``ot``, ``rabin``, ``and``, ``or``).

    Raises:
        UnknownTargetError: On an unknown kind

    """
    try:
        return LIBRARIES[kind]()
    except KeyError:
        raise UnknownTargetError(kind, sorted(LIBRARIES)) from None


def deterministic_rot_strategies() -> list[SimulatorStrategy]:
    """Every deterministic single-bit σ_BA for ROT.

    Bob's choice is 0 or 1. Either the Alice pair is a function of the received bit (16 tables per
    choice) or it is a constant pair sent before the answer (4 pairs, choice 0): 36 strategies.
    """
    pairs = list(itertools.product((0, 1), repeat=2))
    strategies = []
    for choice in (0, 1):
        for on0, on1 in itertools.product(pairs, repeat=2):
            name = f"table-b{choice}-{on0[0]}{on0[1]}-{on1[0]}{on1[1]}"
            build = partial(TableStrategy, choice=choice, table=(on0, on1), name=name)
            strategies.append(SimulatorStrategy(name, build))
    for early in pairs:
        name = f"early-{early[0]}{early[1]}"
        strategies.append(SimulatorStrategy(name, partial(TableStrategy, choice=0, early=early, name=name)))
    logger.debug("Built %d deterministic ROT strategies", len(strategies))
    return strategies

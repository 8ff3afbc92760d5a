"""Ideal resources for the two-party primitives.

Every primitive comes as a :class:`PrimitiveTriple` (honest, dishonest-Alice, dishonest-Bob).
Where the dishonest variants behave like the honest box they are still separate instances,
since a box can only be wired once per system.

Resources answer one time unit (the settings' emission delay) after their last required input,
at the recipient's location.
"""

from __future__ import annotations

import copy
import logging
import operator
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .engine import (
    BOTTOM,
    Box,
    BoxContext,
    Causality,
    Direction,
    Kind,
    Port,
    Side,
    StampedMessage,
    Symbol,
    is_abort,
    string_port,
)
from .errors import InputError, ProtocolOrderError
from .randomness import to_fraction
from .spacetime import causal_precedes_strict

logger = logging.getLogger(__name__)

IN, OUT = Direction.IN, Direction.OUT
ALICE, BOB = Side.ALICE, Side.BOB


def _check_s(s: int) -> None:
    if not isinstance(s, int) or s < 1:
        raise InputError(f"String length must be a positive integer, got {s!r}")


class _InputCollector(Box):
    """Resource that records each input once and rejects repeats."""

    def reset(self) -> None:
        self.inputs: dict[str, Any] = {}
        self.done = False

    def store(self, msg: StampedMessage) -> None:
        if msg.port in self.inputs:
            raise ProtocolOrderError(f"{self.name}: second input on {msg.port!r}")
        self.inputs[msg.port] = msg.payload

    def has(self, *ports: str) -> bool:
        return all(p in self.inputs for p in ports)


class OTBox(_InputCollector):
    """1-out-of-2 oblivious transfer of s-bit strings: Bob learns a_b, nothing else flows."""

    def __init__(self, s: int = 1, name: str = "ot") -> None:
        _check_s(s)
        super().__init__(
            name,
            ports=(
                string_port("a0", ALICE, IN, s),
                string_port("a1", ALICE, IN, s),
                Port("b", BOB, IN),
                string_port("out", BOB, OUT, s),
            ),
            causality=(Causality(("a0", "a1", "b"), "out"),),
        )
        self.s = s

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        self.store(msg)
        if self.has("a0", "a1", "b"):
            b = self.inputs["b"]
            ctx.emit("out", BOTTOM if is_abort(b) else (self.inputs["a1"] if b else self.inputs["a0"]))


class ROTBox(_InputCollector):
    """Randomized OT. The honest box draws s0, s1 itself; the ``alice_chooses`` variant takes them as inputs."""

    def __init__(self, s: int = 1, alice_chooses: bool = False, name: str = "rot") -> None:
        _check_s(s)
        alice_dir = IN if alice_chooses else OUT
        super().__init__(
            name,
            ports=(
                string_port("s0", ALICE, alice_dir, s),
                string_port("s1", ALICE, alice_dir, s),
                Port("b", BOB, IN),
                string_port("sb", BOB, OUT, s),
            ),
            causality=(Causality(("s0", "s1", "b") if alice_chooses else ("b",), "sb"),),
        )
        self.s = s
        self.alice_chooses = alice_chooses

    def on_start(self, ctx: BoxContext) -> None:
        if not self.alice_chooses:
            # drawn and handed to Alice at activation
            self.inputs["s0"], self.inputs["s1"] = ctx.rng.bits(self.s), ctx.rng.bits(self.s)
            ctx.emit("s0", self.inputs["s0"], delay=0)
            ctx.emit("s1", self.inputs["s1"], delay=0)

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        self.store(msg)
        if self.has("s0", "s1", "b"):
            b = self.inputs["b"]
            ctx.emit("sb", BOTTOM if is_abort(b) else (self.inputs["s1"] if b else self.inputs["s0"]))


class RabinBox(_InputCollector):
    """Probabilistic transfer OT^{p,s}: x reaches Bob with probability p, ⊥ otherwise."""

    def __init__(self, p: float | Fraction = Fraction(1, 2), s: int = 1, name: str = "rabin") -> None:
        _check_s(s)
        self.p = to_fraction(p)
        super().__init__(
            name,
            ports=(string_port("x", ALICE, IN, s), string_port("out", BOB, OUT, s)),
            causality=(Causality(("x",), "out"),),
        )
        self.s = s

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        self.store(msg)
        delivered = ctx.rng.bernoulli(self.p)
        ctx.emit("out", msg.payload if delivered else BOTTOM)


class BCBox(_InputCollector):
    """Single-use bit commitment.

    The committer's ``x`` produces ``recv`` at the receiver; a later ``open`` reveals x on
    ``reveal``. An explicit ⊥ on ``open`` is a refusal to open: it is accepted at any time, even
    before the commitment, and the receiver gets ``reveal ⊥``. Only when no ``open`` arrives at
    all is nothing more emitted. ``committer`` selects which party commits (Bob commits in the
    quantum OT protocol).
    """

    def __init__(self, committer: Side = ALICE, name: str = "bc") -> None:
        receiver = committer.other()
        super().__init__(
            name,
            ports=(
                Port("x", committer, IN),
                Port("open", committer, IN, Kind.SYMBOL),
                Port("recv", receiver, OUT, Kind.SYMBOL),
                Port("reveal", receiver, OUT),
            ),
            causality=(Causality(("x",), "recv"), Causality(("x", "open"), "reveal")),
        )
        self.committer = committer

    def reset(self) -> None:
        super().reset()
        self.committed_at = None

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        if msg.port == "open" and is_abort(msg.payload):
            # refusing to open is allowed at any time
            self.store(msg)
            ctx.emit("reveal", BOTTOM)
            return
        if msg.port == "open" and "x" not in self.inputs:
            raise ProtocolOrderError(f"{self.name}: open before commit")
        self.store(msg)
        if msg.port == "x":
            self.committed_at = msg.point
            ctx.emit("recv", BOTTOM if is_abort(msg.payload) else Symbol.RECV)
            return
        if not causal_precedes_strict(self.committed_at, msg.point, ctx.settings.speed_of_light):
            raise ProtocolOrderError(
                f"{self.name}: open at {msg.point} is not after the commitment at {self.committed_at}"
            )
        x = self.inputs["x"]
        ctx.emit("reveal", BOTTOM if is_abort(msg.payload) or is_abort(x) else x)


class MPCBox(_InputCollector):
    """Two-party computation: both parties receive f(x, y) once both inputs arrived."""

    def __init__(self, f: Callable[[Any, Any], Any], m: int = 1, n: int = 1, r: int = 1, name: str = "mpc") -> None:
        for width in (m, n, r):
            _check_s(width)
        super().__init__(
            name,
            ports=(
                string_port("x", ALICE, IN, m),
                string_port("fa", ALICE, OUT, r),
                string_port("y", BOB, IN, n),
                string_port("fb", BOB, OUT, r),
            ),
            causality=(Causality(("x", "y"), "fa"), Causality(("x", "y"), "fb")),
        )
        self.f = f

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        self.store(msg)
        if self.has("x", "y"):
            x, y = self.inputs["x"], self.inputs["y"]
            value = BOTTOM if is_abort(x) or is_abort(y) else self.f(x, y)
            ctx.emit("fa", value)
            ctx.emit("fb", value)


def and_bits(x: Any, y: Any) -> int:
    """Boolean AND of two bits."""
    return operator.and_(int(x), int(y))


def or_bits(x: Any, y: Any) -> int:
    """Boolean OR of two bits."""
    return operator.or_(int(x), int(y))


@dataclass(frozen=True)
class PrimitiveTriple:
    """Honest resource and its two dishonest variants.

    Attributes:
        honest: Resource with both parties honest
        dishonest_alice: Resource Alice can misuse
        dishonest_bob: Resource Bob can misuse
        kind: Short label (``"ot"``, ``"rot"``, ``"rabin"``, ``"bc"``, ``"mpc"``)

    """

    honest: Box
    dishonest_alice: Box
    dishonest_bob: Box
    kind: str

    def fresh(self) -> PrimitiveTriple:
        """Independent copies of all three boxes."""
        return copy.deepcopy(self)


def make_ot(s: int = 1) -> PrimitiveTriple:
    """1-out-of-2 OT of s-bit strings."""
    return PrimitiveTriple(OTBox(s), OTBox(s), OTBox(s), "ot")


def make_rot(s: int = 1) -> PrimitiveTriple:
    """Randomized OT; a dishonest Alice chooses s0, s1 herself."""
    return PrimitiveTriple(ROTBox(s), ROTBox(s, alice_chooses=True), ROTBox(s), "rot")


def make_rabin(p: float | Fraction = Fraction(1, 2), s: int = 1) -> PrimitiveTriple:
    """Probabilistic transfer with delivery probability p (Rabin OT at p = 1/2).

    Raises:
        InputError: If p is outside [0, 1]

    """
    return PrimitiveTriple(RabinBox(p, s), RabinBox(p, s), RabinBox(p, s), "rabin")


def make_bc(committer: Side = ALICE) -> PrimitiveTriple:
    """Bit commitment by ``committer``."""
    return PrimitiveTriple(BCBox(committer), BCBox(committer), BCBox(committer), "bc")


def make_mpc(f: Callable[[Any, Any], Any] = and_bits, m: int = 1, n: int = 1, r: int = 1) -> PrimitiveTriple:
    """Two-party computation of ``f`` (must be picklable for multi-process estimation)."""
    return PrimitiveTriple(MPCBox(f, m, n, r), MPCBox(f, m, n, r), MPCBox(f, m, n, r), "mpc")

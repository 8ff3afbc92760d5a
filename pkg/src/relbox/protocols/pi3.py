"""Π³: Rabin OT from one OT and a late reveal of Alice's slot.

Alice hides x in slot b* of the OT and fills the other slot with noise. Bob queries a uniform
slot b. Only after the OT has answered does b* reach Bob, who keeps x when b = b* and outputs ⊥
otherwise. Bob's query must precede the reveal, which the ordering clauses audit.
"""

from __future__ import annotations

from fractions import Fraction

from ..distinguishers import AbortDistinguisher, ForwardingDistinguisher
from ..engine import BOTTOM, Box, BoxContext, Causality, Channel, CompositeBox, attach, is_abort, parallel
from ..primitives import make_ot, make_rabin
from .base import ALICE, BOB, IN, OUT, OUTER, ConstructionCase, ProtocolBox, order_clauses, port

BITS = (0, 1)

REVEAL_DELAY = 2.0
"""Send time of b* after x arrives, one time unit after the OT answers Bob."""


class Pi3Alice(ProtocolBox):
    """Π³_A: places x in a secret slot and reveals the slot after the transfer."""

    def __init__(self, reveal_delay: float = REVEAL_DELAY) -> None:
        super().__init__(
            "alice",
            ports=(
                port("x", OUTER, IN),
                port("ot.a0", ALICE, OUT),
                port("ot.a1", ALICE, OUT),
                port("bs.send", ALICE, OUT),
            ),
            causality=(
                Causality(("x",), "ot.a0"),
                Causality(("x",), "ot.a1"),
                Causality(("x",), "bs.send"),
            ),
            party=ALICE,
        )
        self.reveal_delay = reveal_delay

    def on_start(self, ctx: BoxContext) -> None:
        self.slot = ctx.rng.bit()
        self.filler = ctx.rng.bit()

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("transfer", "x"):
            x = self.got["x"]
            slot = int(self.slot)
            ctx.emit("ot.a0", self.filler if slot else x)
            ctx.emit("ot.a1", x if slot else self.filler)
            ctx.emit("bs.send", slot, delay=self.reveal_delay)


class Pi3Bob(ProtocolBox):
    """Π³_B: queries a random slot and keeps the value when it matches the revealed one."""

    def __init__(self) -> None:
        super().__init__(
            "bob",
            ports=(
                port("out", OUTER, OUT),
                port("ot.b", BOB, OUT),
                port("ot.out", BOB, IN),
                port("bs.recv", BOB, IN),
            ),
            causality=(Causality(("ot.out", "bs.recv"), "out"),),
            party=BOB,
        )

    def on_start(self, ctx: BoxContext) -> None:
        self.choice = ctx.rng.bit()
        ctx.emit("ot.b", self.choice)

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("decide", "ot.out", "bs.recv"):
            slot = self.got["bs.recv"]
            matched = not is_abort(slot) and int(self.choice) == int(slot)
            ctx.emit("out", self.got["ot.out"] if matched else BOTTOM)


class Pi3SimAlice(ProtocolBox):
    """σ³_A: the input x is whatever a dishonest Alice put in the slot she later reveals."""

    def __init__(self) -> None:
        super().__init__(
            "sigma_a",
            ports=(
                port("ot.a0", OUTER, IN),
                port("ot.a1", OUTER, IN),
                port("bs.send", OUTER, IN),
                port("x", ALICE, OUT),
            ),
            causality=(Causality(("ot.a0", "ot.a1", "bs.send"), "x"),),
            party=ALICE,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("extract", "ot.a0", "ot.a1", "bs.send"):
            slot = self.got["bs.send"]
            ctx.emit("x", BOTTOM if is_abort(slot) else self.got[f"ot.a{int(slot)}"])


class Pi3SimBob(ProtocolBox):
    """σ³_B: turns a delivery into a matching reveal and a loss into a mismatching one."""

    def __init__(self) -> None:
        super().__init__(
            "sigma_b",
            ports=(
                port("ot.b", OUTER, IN),
                port("ot.out", OUTER, OUT),
                port("bs.recv", OUTER, OUT),
                port("out", BOB, IN),
            ),
            causality=(
                Causality(("ot.b", "out"), "ot.out"),
                Causality(("ot.b", "out"), "bs.recv"),
            ),
            party=BOB,
        )

    def advance(self, ctx: BoxContext) -> None:
        if not self.ready("answer", "ot.b", "out"):
            return
        b, value = self.got["ot.b"], self.got["out"]
        if is_abort(b):
            ctx.emit("ot.out", BOTTOM)
            ctx.emit("bs.recv", ctx.rng.bit())
        elif is_abort(value):
            ctx.emit("ot.out", ctx.rng.bit())
            ctx.emit("bs.recv", 1 - int(b))
        else:
            ctx.emit("ot.out", value)
            ctx.emit("bs.recv", int(b))


def _resource(ot: Box) -> CompositeBox:
    return parallel([ot, Channel()], labels=["ot", "bs"])


def pi3_cases(reveal_delay: float = REVEAL_DELAY) -> list[ConstructionCase]:
    """Honest, dishonest-Alice and dishonest-Bob cases of Π³ (all claimed perfect)."""
    ot, rabin = make_ot(), make_rabin(Fraction(1, 2))
    honest = attach(Pi3Bob(), attach(Pi3Alice(reveal_delay), _resource(ot.honest), ALICE), BOB)
    dishonest_alice = attach(Pi3Bob(), _resource(ot.dishonest_alice), BOB)
    dishonest_bob = attach(Pi3Alice(reveal_delay), _resource(ot.dishonest_bob), ALICE)
    sent = ("alice.ot.a0", "alice.ot.a1")
    return [
        ConstructionCase(
            "pi3.honest",
            "honest",
            honest,
            rabin.honest,
            Fraction(0),
            clauses=order_clauses(("env.x",), sent, ("ot.out",), ("bs.recv",), ("bob.out",)),
            input_space={"x": BITS},
            distinguishers={"abort-out": lambda: AbortDistinguisher.for_system(honest, {"x": 1}, "out")},
            params={"reveal_delay": reveal_delay},
        ),
        ConstructionCase(
            "pi3.dA",
            "dA",
            dishonest_alice,
            attach(Pi3SimAlice(), rabin.dishonest_alice, ALICE),
            Fraction(0),
            clauses=order_clauses(("ot.out", "bs.recv"), ("bob.out",)),
            input_space={"ot.a0": BITS, "ot.a1": BITS, "bs.send": BITS},
            distinguishers={
                "forward-out": lambda: ForwardingDistinguisher.for_system(
                    dishonest_alice, {"ot.a0": 0, "ot.a1": 1, "bs.send": 1}, "out"
                )
            },
            params={"reveal_delay": reveal_delay},
        ),
        ConstructionCase(
            "pi3.dB",
            "dB",
            dishonest_bob,
            attach(Pi3SimBob(), rabin.dishonest_bob, BOB),
            Fraction(0),
            clauses=order_clauses((*sent, "env.ot.b"), ("ot.out",), ("bs.recv",)),
            input_space={"x": BITS, "ot.b": BITS},
            distinguishers={
                "forward-value": lambda: ForwardingDistinguisher.for_system(
                    dishonest_bob, {"x": 1, "ot.b": 0}, "ot.out"
                ),
                "forward-slot": lambda: ForwardingDistinguisher.for_system(
                    dishonest_bob, {"x": 1, "ot.b": 0}, "bs.recv"
                ),
            },
            params={"reveal_delay": reveal_delay},
        ),
    ]

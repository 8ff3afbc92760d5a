"""Π¹: OT from one randomized OT and a one-time pad.

Alice pads a_i with the ROT keys s_i and sends c_i = a_i ⊕ s_i to Bob, who decrypts
c_b ⊕ s_b. The construction is perfect under all three conditions.
"""

from __future__ import annotations

from fractions import Fraction

from ..distinguishers import ForwardingDistinguisher
from ..engine import BOTTOM, Box, BoxContext, Causality, Channel, CompositeBox, attach, is_abort, parallel
from ..primitives import make_ot, make_rot
from .base import ALICE, BOB, IN, OUT, OUTER, ConstructionCase, ProtocolBox, order_clauses, port

BITS = (0, 1)


class Pi1Alice(ProtocolBox):
    """Π¹_A: pads both inputs with the ROT keys."""

    def __init__(self) -> None:
        super().__init__(
            "alice",
            ports=(
                port("a0", OUTER, IN),
                port("a1", OUTER, IN),
                port("rot.s0", ALICE, IN),
                port("rot.s1", ALICE, IN),
                port("c0.send", ALICE, OUT),
                port("c1.send", ALICE, OUT),
            ),
            causality=(Causality(("a0", "rot.s0"), "c0.send"), Causality(("a1", "rot.s1"), "c1.send")),
            party=ALICE,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("pad", "a0", "a1", "rot.s0", "rot.s1"):
            for i in BITS:
                a, s = self.got[f"a{i}"], self.got[f"rot.s{i}"]
                ctx.emit(f"c{i}.send", BOTTOM if is_abort(a) or is_abort(s) else a ^ s)


class Pi1Bob(ProtocolBox):
    """Π¹_B: queries the ROT with b and decrypts c_b."""

    def __init__(self) -> None:
        super().__init__(
            "bob",
            ports=(
                port("b", OUTER, IN),
                port("out", OUTER, OUT),
                port("rot.b", BOB, OUT),
                port("rot.sb", BOB, IN),
                port("c0.recv", BOB, IN),
                port("c1.recv", BOB, IN),
            ),
            causality=(
                Causality(("b",), "rot.b"),
                Causality(("b", "rot.sb", "c0.recv", "c1.recv"), "out"),
            ),
            party=BOB,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("choose", "b"):
            ctx.emit("rot.b", self.got["b"])
        if self.ready("decrypt", "b", "rot.sb", "c0.recv", "c1.recv"):
            b, key = self.got["b"], self.got["rot.sb"]
            if is_abort(b) or is_abort(key):
                ctx.emit("out", BOTTOM)
                return
            cipher = self.got["c1.recv"] if b else self.got["c0.recv"]
            ctx.emit("out", BOTTOM if is_abort(cipher) else cipher ^ key)


class Pi1SimAlice(ProtocolBox):
    """σ¹_A: recovers a_i = s_i ⊕ c_i from what a dishonest Alice gave the ROT and the channels."""

    def __init__(self) -> None:
        super().__init__(
            "sigma_a",
            ports=(
                port("rot.s0", OUTER, IN),
                port("rot.s1", OUTER, IN),
                port("c0.send", OUTER, IN),
                port("c1.send", OUTER, IN),
                port("a0", ALICE, OUT),
                port("a1", ALICE, OUT),
            ),
            causality=(Causality(("rot.s0", "c0.send"), "a0"), Causality(("rot.s1", "c1.send"), "a1")),
            party=ALICE,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("extract", "rot.s0", "rot.s1", "c0.send", "c1.send"):
            for i in BITS:
                s, c = self.got[f"rot.s{i}"], self.got[f"c{i}.send"]
                ctx.emit(f"a{i}", BOTTOM if is_abort(s) or is_abort(c) else s ^ c)


class Pi1SimBob(ProtocolBox):
    """σ¹_B: forwards b, then fakes s_b and both ciphertexts around the returned a_b."""

    def __init__(self) -> None:
        answers = ("rot.sb", "c0.recv", "c1.recv")
        super().__init__(
            "sigma_b",
            ports=(
                port("rot.b", OUTER, IN),
                port("rot.sb", OUTER, OUT),
                port("c0.recv", OUTER, OUT),
                port("c1.recv", OUTER, OUT),
                port("b", BOB, OUT),
                port("out", BOB, IN),
            ),
            causality=(Causality(("rot.b",), "b"), *(Causality(("rot.b", "out"), p) for p in answers)),
            party=BOB,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("query", "rot.b"):
            ctx.emit("b", self.got["rot.b"])
        if self.ready("answer", "rot.b", "out"):
            b, value = self.got["rot.b"], self.got["out"]
            if is_abort(b):
                ctx.emit("rot.sb", BOTTOM)
                ctx.emit("c0.recv", ctx.rng.bit())
                ctx.emit("c1.recv", ctx.rng.bit())
                return
            key = ctx.rng.bit()
            cipher = {int(b): BOTTOM if is_abort(value) else value ^ key, 1 - int(b): ctx.rng.bit()}
            ctx.emit("rot.sb", key)
            ctx.emit("c0.recv", cipher[0])
            ctx.emit("c1.recv", cipher[1])


def _resource(rot: Box) -> CompositeBox:
    return parallel([rot, Channel(), Channel()], labels=["rot", "c0", "c1"])


def pi1_cases() -> list[ConstructionCase]:
    """Honest, dishonest-Alice and dishonest-Bob cases of Π¹ (all claimed perfect)."""
    rot, ot = make_rot(), make_ot()
    honest = attach(Pi1Bob(), attach(Pi1Alice(), _resource(rot.honest), ALICE), BOB)
    dishonest_alice = attach(Pi1Bob(), _resource(rot.dishonest_alice), BOB)
    dishonest_bob = attach(Pi1Alice(), _resource(rot.dishonest_bob), ALICE)
    pads = ("c0.recv", "c1.recv")
    return [
        ConstructionCase(
            "pi1.honest",
            "honest",
            honest,
            ot.honest,
            Fraction(0),
            clauses=order_clauses(("env.a0", "env.a1", "rot.s0", "rot.s1"), pads, ("bob.out",)),
            input_space={"a0": BITS, "a1": BITS, "b": BITS},
            distinguishers={
                "forward-out": lambda: ForwardingDistinguisher.for_system(honest, {"a0": 1, "a1": 0, "b": 0}, "out")
            },
        ),
        ConstructionCase(
            "pi1.dA",
            "dA",
            dishonest_alice,
            attach(Pi1SimAlice(), ot.dishonest_alice, ALICE),
            Fraction(0),
            clauses=order_clauses((*pads, "rot.sb"), ("bob.out",)),
            input_space={"rot.s0": BITS, "rot.s1": BITS, "c0.send": BITS, "c1.send": BITS, "b": BITS},
            distinguishers={
                "forward-out": lambda: ForwardingDistinguisher.for_system(
                    dishonest_alice, {"rot.s0": 1, "rot.s1": 0, "c0.send": 0, "c1.send": 1, "b": 1}, "out"
                )
            },
        ),
        ConstructionCase(
            "pi1.dB",
            "dB",
            dishonest_bob,
            attach(Pi1SimBob(), ot.dishonest_bob, BOB),
            Fraction(0),
            clauses=order_clauses(("env.a0", "env.a1", "rot.s0", "rot.s1"), pads),
            input_space={"a0": BITS, "a1": BITS, "rot.b": BITS},
            distinguishers={
                "forward-pad": lambda: ForwardingDistinguisher.for_system(
                    dishonest_bob, {"a0": 1, "a1": 1, "rot.b": 0}, "c1.recv"
                )
            },
        ),
    ]

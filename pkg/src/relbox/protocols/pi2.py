"""Π²: randomized OT from one OT.

Alice draws two uniform keys, feeds them to the OT and outputs them; Bob forwards his choice bit
and outputs what the OT returns. Both simulators only rename ports.
"""

from __future__ import annotations

from fractions import Fraction

from ..distinguishers import ForwardingDistinguisher
from ..engine import BoxContext, attach, parallel
from ..primitives import make_ot, make_rot
from .base import ALICE, BOB, IN, OUT, OUTER, ConstructionCase, ProtocolBox, Relay, order_clauses, port

BITS = (0, 1)


class Pi2Alice(ProtocolBox):
    """Π²_A: draws (s₀, s₁), gives them to the OT and outputs them."""

    def __init__(self) -> None:
        super().__init__(
            "alice",
            ports=(
                port("s0", OUTER, OUT),
                port("s1", OUTER, OUT),
                port("ot.a0", ALICE, OUT),
                port("ot.a1", ALICE, OUT),
            ),
            party=ALICE,
        )

    def on_start(self, ctx: BoxContext) -> None:
        for i in BITS:
            key = ctx.rng.bit()
            ctx.emit(f"ot.a{i}", key)
            ctx.emit(f"s{i}", key)

    def advance(self, ctx: BoxContext) -> None:
        pass


def pi2_bob() -> Relay:
    """Π²_B: b goes to the OT, the OT output becomes s_b."""
    return Relay(
        "bob",
        [(port("b", OUTER, IN), port("ot.b", BOB, OUT)), (port("ot.out", BOB, IN), port("sb", OUTER, OUT))],
        party=BOB,
    )


def pi2_sim_alice() -> Relay:
    """σ²_A: the keys a dishonest Alice gave the OT become her ROT keys."""
    return Relay(
        "sigma_a",
        [(port("ot.a0", OUTER, IN), port("s0", ALICE, OUT)), (port("ot.a1", OUTER, IN), port("s1", ALICE, OUT))],
        party=ALICE,
    )


def pi2_sim_bob() -> Relay:
    return Relay(
        "sigma_b",
        [(port("ot.b", OUTER, IN), port("b", BOB, OUT)), (port("sb", BOB, IN), port("ot.out", OUTER, OUT))],
        party=BOB,
    )


def pi2_cases() -> list[ConstructionCase]:
    """Honest, dishonest-Alice and dishonest-Bob cases of Π² (all claimed perfect)."""
    ot, rot = make_ot(), make_rot()
    honest = attach(pi2_bob(), attach(Pi2Alice(), parallel([ot.honest], labels=["ot"]), ALICE), BOB)
    dishonest_alice = attach(pi2_bob(), parallel([ot.dishonest_alice], labels=["ot"]), BOB)
    dishonest_bob = attach(Pi2Alice(), parallel([ot.dishonest_bob], labels=["ot"]), ALICE)
    return [
        ConstructionCase(
            "pi2.honest",
            "honest",
            honest,
            rot.honest,
            Fraction(0),
            clauses=order_clauses(("alice.ot.a0", "alice.ot.a1", "bob.ot.b"), ("ot.out",), ("bob.sb",)),
            input_space={"b": BITS},
            distinguishers={"forward-sb": lambda: ForwardingDistinguisher.for_system(honest, {"b": 1}, "sb")},
        ),
        ConstructionCase(
            "pi2.dA",
            "dA",
            dishonest_alice,
            attach(pi2_sim_alice(), rot.dishonest_alice, ALICE),
            Fraction(0),
            clauses=order_clauses(("env.ot.a0", "env.ot.a1", "bob.ot.b"), ("ot.out",), ("bob.sb",)),
            input_space={"ot.a0": BITS, "ot.a1": BITS, "b": BITS},
            distinguishers={
                "forward-sb": lambda: ForwardingDistinguisher.for_system(
                    dishonest_alice, {"ot.a0": 0, "ot.a1": 1, "b": 1}, "sb"
                )
            },
        ),
        ConstructionCase(
            "pi2.dB",
            "dB",
            dishonest_bob,
            attach(pi2_sim_bob(), rot.dishonest_bob, BOB),
            Fraction(0),
            clauses=order_clauses(("alice.ot.a0", "alice.ot.a1", "env.ot.b"), ("ot.out",)),
            input_space={"ot.b": BITS},
            distinguishers={
                "forward-s1": lambda: ForwardingDistinguisher.for_system(dishonest_bob, {"ot.b": 0}, "s1")
            },
        ),
    ]

"""Π⁴: OT from 3k Rabin OTs.

Alice sends 3k uniform keys through Rabin OTs. Bob, who receives about half of them, names two
disjoint k-subsets (I₀, I₁) with I_b completely known. Alice answers with
t_i = (⊕_{j∈I_i} s_j) ⊕ a_i, from which Bob unmasks a_b. Bob aborts when fewer than k keys
arrived; a dishonest Bob wins when at least 2k arrived, since both subsets can then be known.
"""

from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction
from typing import Any

from ..distinguishers import AbortDistinguisher, ForwardingDistinguisher, closing_ports
from ..engine import (
    BOTTOM,
    Box,
    BoxContext,
    Causality,
    Channel,
    CompositeBox,
    Distinguisher,
    Kind,
    StampedMessage,
    System,
    attach,
    is_abort,
    parallel,
)
from ..errors import InputError
from ..primitives import RabinBox, make_ot
from ..stats.bounds import rabin_ot_abort_probability, rabin_ot_both_known_probability
from .base import (
    ALICE,
    BOB,
    IN,
    OUT,
    OUTER,
    ConstructionCase,
    Policy,
    ProtocolBox,
    check_policy,
    choose_sets,
    masked_pads,
    order_clauses,
    port,
    small_space,
    valid_sets,
    xor_all,
)

BITS = (0, 1)
PAD_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


def check_k(k: int) -> int:
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise InputError(f"Security parameter k must be a positive integer, got {k!r}")
    return k


def rabin_labels(k: int) -> list[str]:
    return [f"r{i}" for i in range(3 * k)]


def valid_pads(payload: Any) -> bool:
    return isinstance(payload, tuple) and len(payload) == 2


class Pi4Alice(ProtocolBox):
    """Π⁴_A: sends the keys, checks Bob's subsets and masks both inputs."""

    def __init__(self, k: int) -> None:
        self.k = k
        self.labels = rabin_labels(k)
        super().__init__(
            "alice",
            ports=(
                port("a0", OUTER, IN),
                port("a1", OUTER, IN),
                *(port(f"{r}.x", ALICE, OUT) for r in self.labels),
                port("sets.recv", ALICE, IN, Kind.VECTOR),
                port("pads.send", ALICE, OUT, Kind.VECTOR),
            ),
            causality=(Causality(("sets.recv", "a0", "a1"), "pads.send"),),
            party=ALICE,
        )

    def on_start(self, ctx: BoxContext) -> None:
        self.keys = {}
        for i, r in enumerate(self.labels):
            self.keys[i] = ctx.rng.bit()
            ctx.emit(f"{r}.x", self.keys[i])

    def advance(self, ctx: BoxContext) -> None:
        if not self.ready("pads", "sets.recv", "a0", "a1"):
            return
        sets = self.got["sets.recv"]
        if is_abort(sets) or not valid_sets(sets, range(3 * self.k), self.k):
            ctx.abort()
            return
        ctx.emit("pads.send", masked_pads(sets, self.keys, self.got["a0"], self.got["a1"]))


class Pi4Bob(ProtocolBox):
    """Π⁴_B: picks the subsets from the received keys and unmasks t_b."""

    def __init__(self, k: int, policy: Policy = "random") -> None:
        self.k = k
        self.policy = check_policy(policy)
        self.labels = rabin_labels(k)
        received = tuple(f"{r}.out" for r in self.labels)
        super().__init__(
            "bob",
            ports=(
                port("b", OUTER, IN),
                port("out", OUTER, OUT),
                *(port(f"{r}.out", BOB, IN) for r in self.labels),
                port("sets.send", BOB, OUT, Kind.VECTOR),
                port("pads.recv", BOB, IN, Kind.VECTOR),
            ),
            causality=(
                Causality(("b", *received), "sets.send"),
                Causality(("b", *received, "pads.recv"), "out"),
            ),
            party=BOB,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("choose", "b", *(f"{r}.out" for r in self.labels)):
            b = self.got["b"]
            self.values = {i: self.got[f"{r}.out"] for i, r in enumerate(self.labels)}
            known = [i for i, v in self.values.items() if not is_abort(v)]
            self.sets = None if is_abort(b) else choose_sets(known, range(3 * self.k), self.k, b, self.policy, ctx.rng)
            if self.sets is None:
                ctx.abort()
                return
            ctx.emit("sets.send", self.sets)
        if "choose" in self.stages and self.ready("decode", "pads.recv"):
            pads, b = self.got["pads.recv"], int(self.got["b"])
            if is_abort(pads) or not valid_pads(pads) or is_abort(pads[b]):
                ctx.emit("out", BOTTOM)
                return
            ctx.emit("out", pads[b] ^ xor_all(self.values[j] for j in sorted(self.sets[b])))


class Pi4SimAlice(ProtocolBox):
    """σ⁴_A: plays Bob with choice 0 and unmasks both inputs from Alice's pads."""

    def __init__(self, k: int) -> None:
        self.k = k
        self.labels = rabin_labels(k)
        keys = tuple(f"{r}.x" for r in self.labels)
        super().__init__(
            "sigma_a",
            ports=(
                *(port(f"{r}.x", OUTER, IN) for r in self.labels),
                port("sets.recv", OUTER, OUT, Kind.VECTOR),
                port("pads.send", OUTER, IN, Kind.VECTOR),
                port("a0", ALICE, OUT),
                port("a1", ALICE, OUT),
            ),
            causality=(
                Causality(keys, "sets.recv"),
                Causality((*keys, "pads.send"), "a0"),
                Causality((*keys, "pads.send"), "a1"),
            ),
            party=ALICE,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("choose", *(f"{r}.x" for r in self.labels)):
            self.keys = {i: self.got[f"{r}.x"] for i, r in enumerate(self.labels)}
            known = [i for i, s in self.keys.items() if ctx.rng.bernoulli(Fraction(1, 2)) and not is_abort(s)]
            self.sets = choose_sets(known, range(3 * self.k), self.k, 0, "random", ctx.rng)
            if self.sets is None:
                ctx.abort()
                return
            ctx.emit("sets.recv", self.sets)
        if "choose" in self.stages and self.ready("extract", "pads.send"):
            pads = self.got["pads.send"]
            if is_abort(pads) or not valid_pads(pads):
                ctx.emit("a0", BOTTOM)
                ctx.emit("a1", BOTTOM)
                return
            for i, (t, indices) in enumerate(zip(pads, self.sets, strict=True)):
                keys = [self.keys[j] for j in sorted(indices)]
                ctx.emit(f"a{i}", BOTTOM if is_abort(t) or any(map(is_abort, keys)) else t ^ xor_all(keys))


class Pi4SimBob(ProtocolBox):
    """σ⁴_B: fakes the Rabin deliveries and queries the OT for the one completely known subset.

    The simulation aborts when both subsets are completely known.
    """

    def __init__(self, k: int) -> None:
        self.k = k
        self.labels = rabin_labels(k)
        super().__init__(
            "sigma_b",
            ports=(
                *(port(f"{r}.out", OUTER, OUT) for r in self.labels),
                port("sets.send", OUTER, IN, Kind.VECTOR),
                port("pads.recv", OUTER, OUT, Kind.VECTOR),
                port("b", BOB, OUT),
                port("out", BOB, IN),
            ),
            causality=(Causality(("sets.send",), "b"), Causality(("sets.send",), "pads.recv")),
            party=BOB,
        )

    def on_start(self, ctx: BoxContext) -> None:
        self.keys = {}
        for i, r in enumerate(self.labels):
            if ctx.rng.bernoulli(Fraction(1, 2)):
                self.keys[i] = ctx.rng.bit()
            ctx.emit(f"{r}.out", self.keys.get(i, BOTTOM))

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("sets", "sets.send"):
            sets = self.got["sets.send"]
            if is_abort(sets) or not valid_sets(sets, range(3 * self.k), self.k):
                ctx.abort()
                return
            self.sets = sets
            known = [s <= set(self.keys) for s in sets]
            if all(known):
                ctx.abort()
                return
            if not any(known):
                ctx.emit("pads.recv", (ctx.rng.bit(), ctx.rng.bit()))
                return
            self.query = known.index(True)
            ctx.emit("b", self.query)
        if "sets" in self.stages and self.ready("answer", "out"):
            value, j = self.got["out"], self.query
            pads = [ctx.rng.bit(), ctx.rng.bit()]
            pads[j] = BOTTOM if is_abort(value) else value ^ xor_all(self.keys[i] for i in sorted(self.sets[j]))
            ctx.emit("pads.recv", tuple(pads))


class BothSetsDistinguisher(Distinguisher):
    """Dishonest Bob that names two completely known subsets whenever 2k keys arrived.

    Outputs 1 when it did so and received proper pads, which the ideal system never sends.
    """

    def __init__(self, system: System, k: int, a0: int = 0, a1: int = 1) -> None:
        super().__init__("both-sets", closing_ports(system))
        self.k = k
        self.labels = rabin_labels(k)
        self.inputs = {"a0": a0, "a1": a1}

    def reset(self) -> None:
        super().reset()
        self.both = False

    def inject(self, ctx: BoxContext) -> None:
        for name, value in self.inputs.items():
            ctx.emit(name, value, delay=0)

    def react(self, msg: StampedMessage, ctx: BoxContext) -> None:
        if not msg.port.endswith(".out") or not all(self.observed[f"{r}.out"] for r in self.labels):
            return
        known = [i for i, r in enumerate(self.labels) if not is_abort(self.first(f"{r}.out"))]
        self.both = len(known) >= 2 * self.k
        if self.both:
            sets = (frozenset(known[: self.k]), frozenset(known[self.k : 2 * self.k]))
        else:
            sets = (frozenset(range(self.k)), frozenset(range(self.k, 2 * self.k)))
        ctx.emit("sets.send", sets)

    def decide(self) -> int:
        pads = self.first("pads.recv")
        return int(self.both and pads is not None and not is_abort(pads))


def _resource(rabins: Sequence[Box], k: int) -> CompositeBox:
    channels = [Channel(sender=BOB, kind=Kind.VECTOR), Channel(sender=ALICE, kind=Kind.VECTOR)]
    return parallel([*rabins, *channels], labels=[*rabin_labels(k), "sets", "pads"])


def _rabins(k: int) -> list[RabinBox]:
    return [RabinBox(Fraction(1, 2)) for _ in range(3 * k)]


def pi4_cases(k: int = 1, policy: Policy = "random") -> list[ConstructionCase]:
    """Honest, dishonest-Alice and dishonest-Bob cases of Π⁴.

    Args:
        k: Security parameter (3k Rabin OTs, subsets of size k)
        policy: Subset policy of Bob in the dishonest-Alice case; the honest case uses the
            lexicographic policy, whose output distribution is the same and which keeps exact
            enumeration small

    Raises:
        InputError: If k is not a positive integer or the policy is unknown

    """
    k, policy = check_k(k), check_policy(policy)
    ot = make_ot()
    labels = rabin_labels(k)
    received = tuple(f"{r}.out" for r in labels)
    honest = attach(Pi4Bob(k, "lexicographic"), attach(Pi4Alice(k), _resource(_rabins(k), k), ALICE), BOB)
    dishonest_alice = attach(Pi4Bob(k, policy), _resource(_rabins(k), k), BOB)
    dishonest_bob = attach(Pi4Alice(k), _resource(_rabins(k), k), ALICE)
    params = {"k": k, "policy": policy}
    honest_inputs = {"a0": 1, "a1": 0, "b": 0}
    alice_inputs = {**{f"{r}.x": i % 2 for i, r in enumerate(labels)}, "pads.send": (1, 0), "b": 0}
    single = k == 1
    return [
        ConstructionCase(
            "pi4.honest",
            "honest",
            honest,
            ot.honest,
            rabin_ot_abort_probability(k),
            clauses=order_clauses(received, ("bob.sets.send",), ("alice.pads.send",), ("bob.out",)),
            input_space=small_space({"a0": BITS, "a1": BITS, "b": BITS}) if k <= 4 else None,
            distinguishers={"abort-out": lambda: AbortDistinguisher.for_system(honest, honest_inputs, "out")},
            params=params,
        ),
        ConstructionCase(
            "pi4.dA",
            "dA",
            dishonest_alice,
            attach(Pi4SimAlice(k), ot.dishonest_alice, ALICE),
            Fraction(0),
            clauses=order_clauses(received, ("bob.sets.send",)) + order_clauses(("pads.recv",), ("bob.out",)),
            input_space=(
                {**{f"{r}.x": BITS for r in labels}, "pads.send": PAD_PAIRS, "b": BITS} if single else None
            ),
            distinguishers={
                "forward-out": lambda: ForwardingDistinguisher.for_system(dishonest_alice, alice_inputs, "out")
            },
            params=params,
        ),
        ConstructionCase(
            "pi4.dB",
            "dB",
            dishonest_bob,
            attach(Pi4SimBob(k), ot.dishonest_bob, BOB),
            rabin_ot_both_known_probability(k),
            clauses=order_clauses(("sets.recv",), ("alice.pads.send",)),
            input_space=(
                {
                    "a0": BITS,
                    "a1": BITS,
                    "sets.send": [(frozenset({i}), frozenset({j})) for i in range(3) for j in range(3) if i != j],
                }
                if single
                else None
            ),
            distinguishers={"both-sets": lambda: BothSetsDistinguisher(dishonest_bob, k)},
            params=params,
        ),
    ]

"""Π⁵: OT from 2n bit commitments and BB84 states.

Alice sends n BB84 states. Bob measures each in a random basis and commits to every outcome and
basis. Alice opens a random test set T of h = n/2 positions and checks the outcomes wherever the
bases agree. She then announces her bases on the remaining k = n/2 positions R, and the protocol
continues like the Rabin reduction with subsets of size k/3. Bob aborts when fewer than k/3
bases in R agree.

Commitment ``bc{2i}`` holds Bob's outcome for state i and ``bc{2i+1}`` his basis bit.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any

from ..distinguishers import AbortDistinguisher, ForwardingDistinguisher, closing_ports
from ..engine import (
    BOTTOM,
    BoxContext,
    Causality,
    Channel,
    CompositeBox,
    Distinguisher,
    Kind,
    StampedMessage,
    Symbol,
    System,
    absorb,
    attach,
    is_abort,
    parallel,
)
from ..errors import InputError
from ..primitives import BCBox, make_ot
from ..quantum import QubitHandle
from ..stats.bounds import quantum_ot_abort_probability, quantum_ot_both_known_probability
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
    valid_sets,
    xor_all,
)
from .pi4 import valid_pads

logger = logging.getLogger(__name__)


def check_n(n: int) -> tuple[int, int]:
    """Return (k, interval size) for n states.

    Raises:
        InputError: Unless n is even and k = n/2 is divisible by 3

    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 6 or n % 2 or (n // 2) % 3:
        raise InputError(f"n must be even with n/2 divisible by 3 (6, 12, 18, ...), got {n!r}")
    return n // 2, n // 6


def commitments(n: int) -> list[str]:
    return [f"bc{j}" for j in range(2 * n)]


def opened(test: frozenset[int], suffix: str = "reveal") -> list[str]:
    """Commitment ports of the tested positions (``reveal`` at Alice, ``open`` at Bob)."""
    return [f"bc{2 * i + j}.{suffix}" for i in sorted(test) for j in (0, 1)]


def valid_test(payload: Any, n: int) -> bool:
    return isinstance(payload, frozenset) and len(payload) == n // 2 and payload <= frozenset(range(n))


def valid_states(payload: Any, n: int) -> bool:
    return isinstance(payload, tuple) and len(payload) == n and all(isinstance(q, QubitHandle) for q in payload)


def valid_bases(payload: Any, k: int) -> bool:
    return isinstance(payload, tuple) and len(payload) == k and not any(map(is_abort, payload))


def commitments_consistent(test: frozenset[int], bits: list, bases: list, outcome: dict, basis: dict) -> bool:
    """Whether every tested position measured in the preparation basis reports the prepared bit."""
    for i in sorted(test):
        if is_abort(outcome[i]) or is_abort(basis[i]):
            return False
        if basis[i] == bases[i] and outcome[i] != bits[i]:
            return False
    return True


class _Preparer(ProtocolBox):
    """Draws the BB84 bits and bases lazily and sends the states on ``port``."""

    states_port = "q.send"

    def on_start(self, ctx: BoxContext) -> None:
        self.bits = [ctx.rng.bit() for _ in range(self.n)]
        self.bases = [ctx.rng.bit() for _ in range(self.n)]
        ctx.emit(self.states_port, tuple(ctx.qubits.prepare(x, t) for x, t in zip(self.bits, self.bases, strict=True)))

    def draw_test(self, ctx: BoxContext) -> frozenset[int]:
        self.test = ctx.rng.sample(range(self.n), self.n // 2)
        self.rest = sorted(set(range(self.n)) - self.test)
        return self.test


class Pi5Alice(_Preparer):
    """Π⁵_A: prepares the states, tests Bob's commitments and masks both inputs."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.k, self.size = check_n(n)
        received = tuple(f"{c}.recv" for c in commitments(n))
        super().__init__(
            "alice",
            ports=(
                port("a0", OUTER, IN),
                port("a1", OUTER, IN),
                port("q.send", ALICE, OUT, Kind.VECTOR),
                *(port(f"{c}.recv", ALICE, IN, Kind.SYMBOL) for c in commitments(n)),
                *(port(f"{c}.reveal", ALICE, IN) for c in commitments(n)),
                port("test.send", ALICE, OUT, Kind.INDEX_SET),
                port("bases.send", ALICE, OUT, Kind.VECTOR),
                port("sets.recv", ALICE, IN, Kind.VECTOR),
                port("pads.send", ALICE, OUT, Kind.VECTOR),
            ),
            causality=(
                Causality(received, "test.send"),
                Causality(received, "bases.send"),
                Causality(("sets.recv", "a0", "a1"), "pads.send"),
            ),
            party=ALICE,
        )

    def advance(self, ctx: BoxContext) -> None:
        received = [f"{c}.recv" for c in commitments(self.n)]
        if self.ready("test", *received):
            if self.any_abort(*received):
                ctx.abort()
                return
            ctx.emit("test.send", self.draw_test(ctx))
        if "test" in self.stages and self.ready("check", *opened(self.test)):
            outcome = {i: self.got[f"bc{2 * i}.reveal"] for i in self.test}
            basis = {i: self.got[f"bc{2 * i + 1}.reveal"] for i in self.test}
            if not commitments_consistent(self.test, self.bits, self.bases, outcome, basis):
                logger.debug("Commitment test failed")
                ctx.abort()
                return
            ctx.emit("bases.send", tuple(self.bases[i] for i in self.rest))
        if "check" in self.stages and self.ready("pads", "sets.recv", "a0", "a1"):
            sets = self.got["sets.recv"]
            if is_abort(sets) or not valid_sets(sets, self.rest, self.size):
                ctx.abort()
                return
            ctx.emit("pads.send", masked_pads(sets, dict(enumerate(self.bits)), self.got["a0"], self.got["a1"]))


class Pi5Bob(ProtocolBox):
    """Π⁵_B: measures in random bases, commits, opens the test set and unmasks t_b."""

    def __init__(self, n: int, policy: Policy = "random") -> None:
        self.n = n
        self.k, self.size = check_n(n)
        self.policy = check_policy(policy)
        super().__init__(
            "bob",
            ports=(
                port("b", OUTER, IN),
                port("out", OUTER, OUT),
                port("q.recv", BOB, IN, Kind.VECTOR),
                *(port(f"{c}.x", BOB, OUT) for c in commitments(n)),
                *(port(f"{c}.open", BOB, OUT, Kind.SYMBOL) for c in commitments(n)),
                port("test.recv", BOB, IN, Kind.INDEX_SET),
                port("bases.recv", BOB, IN, Kind.VECTOR),
                port("sets.send", BOB, OUT, Kind.VECTOR),
                port("pads.recv", BOB, IN, Kind.VECTOR),
            ),
            causality=(
                *(Causality(("q.recv",), f"{c}.x") for c in commitments(n)),
                *(Causality(("q.recv", "test.recv"), f"{c}.open") for c in commitments(n)),
                Causality(("b", "q.recv", "test.recv", "bases.recv"), "sets.send"),
                Causality(("b", "bases.recv", "pads.recv"), "out"),
            ),
            party=BOB,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("measure", "q.recv"):
            states = self.got["q.recv"]
            if not valid_states(states, self.n):
                ctx.abort()
                return
            self.basis = [ctx.rng.bit() for _ in range(self.n)]
            self.outcome = [ctx.qubits.measure(q, t, ctx.rng) for q, t in zip(states, self.basis, strict=True)]
            for i in range(self.n):
                ctx.emit(f"bc{2 * i}.x", self.outcome[i])
                ctx.emit(f"bc{2 * i + 1}.x", self.basis[i])
        if "measure" in self.stages and self.ready("open", "test.recv"):
            test = self.got["test.recv"]
            if not valid_test(test, self.n):
                ctx.abort()
                return
            self.rest = sorted(set(range(self.n)) - test)
            for i in range(self.n):
                symbol = Symbol.OPEN if i in test else BOTTOM
                ctx.emit(f"bc{2 * i}.open", symbol)
                ctx.emit(f"bc{2 * i + 1}.open", symbol)
        if "open" in self.stages and self.ready("choose", "b", "bases.recv"):
            b, bases = self.got["b"], self.got["bases.recv"]
            if is_abort(b) or not valid_bases(bases, self.k):
                ctx.abort()
                return
            known = [i for i, t in zip(self.rest, bases, strict=True) if self.basis[i] == t]
            self.sets = choose_sets(known, self.rest, self.size, b, self.policy, ctx.rng)
            if self.sets is None:
                ctx.abort()
                return
            ctx.emit("sets.send", self.sets)
        if "choose" in self.stages and self.ready("decode", "pads.recv"):
            pads, b = self.got["pads.recv"], int(self.got["b"])
            if is_abort(pads) or not valid_pads(pads) or is_abort(pads[b]):
                ctx.emit("out", BOTTOM)
                return
            ctx.emit("out", pads[b] ^ xor_all(self.outcome[j] for j in sorted(self.sets[b])))


class Pi5SimAlice(ProtocolBox):
    """σ⁵_A: fakes Bob's commitments and measures each state only once its basis is known.

    Tested states are measured in random bases when T arrives; the others are measured in
    Alice's announced bases, so both subsets are completely known and both inputs are extracted.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self.k, self.size = check_n(n)
        super().__init__(
            "sigma_a",
            ports=(
                port("q.send", OUTER, IN, Kind.VECTOR),
                *(port(f"{c}.recv", OUTER, OUT, Kind.SYMBOL) for c in commitments(n)),
                *(port(f"{c}.reveal", OUTER, OUT) for c in commitments(n)),
                port("test.send", OUTER, IN, Kind.INDEX_SET),
                port("bases.send", OUTER, IN, Kind.VECTOR),
                port("sets.recv", OUTER, OUT, Kind.VECTOR),
                port("pads.send", OUTER, IN, Kind.VECTOR),
                port("a0", ALICE, OUT),
                port("a1", ALICE, OUT),
            ),
            causality=(
                *(Causality(("q.send",), f"{c}.recv") for c in commitments(n)),
                *(Causality(("q.send", "test.send"), f"{c}.reveal") for c in commitments(n)),
                Causality(("q.send", "test.send", "bases.send"), "sets.recv"),
                *(Causality(("q.send", "test.send", "bases.send", "pads.send"), f"a{i}") for i in (0, 1)),
            ),
            party=ALICE,
        )

    def advance(self, ctx: BoxContext) -> None:
        if self.ready("commit", "q.send"):
            self.states = self.got["q.send"]
            if not valid_states(self.states, self.n):
                ctx.abort()
                return
            for c in commitments(self.n):
                ctx.emit(f"{c}.recv", Symbol.RECV)
        if "commit" in self.stages and self.ready("open", "test.send"):
            test = self.got["test.send"]
            if not valid_test(test, self.n):
                ctx.abort()
                return
            self.rest = sorted(set(range(self.n)) - test)
            for i in range(self.n):
                if i in test:
                    basis = ctx.rng.bit()
                    ctx.emit(f"bc{2 * i}.reveal", ctx.qubits.measure(self.states[i], basis, ctx.rng))
                    ctx.emit(f"bc{2 * i + 1}.reveal", basis)
                else:
                    ctx.emit(f"bc{2 * i}.reveal", BOTTOM)
                    ctx.emit(f"bc{2 * i + 1}.reveal", BOTTOM)
        if "open" in self.stages and self.ready("choose", "bases.send"):
            bases = self.got["bases.send"]
            if not valid_bases(bases, self.k):
                ctx.abort()
                return
            self.values = {
                i: ctx.qubits.measure(self.states[i], t, ctx.rng) for i, t in zip(self.rest, bases, strict=True)
            }
            known = [i for i in self.rest if ctx.rng.bernoulli(Fraction(1, 2))]
            self.sets = choose_sets(known, self.rest, self.size, 0, "random", ctx.rng)
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
                ctx.emit(f"a{i}", BOTTOM if is_abort(t) else t ^ xor_all(self.values[j] for j in sorted(indices)))


class Pi5SimBob(_Preparer):
    """σ⁵_B: plays Alice with fake commitments, so Bob's outcomes and bases are known at once.

    After the test it queries the OT for the one subset whose bases all agree. When both
    subsets agree the simulation gives up and sends ⊥ one time unit after the subsets arrived.
    """

    states_port = "q.recv"

    def __init__(self, n: int) -> None:
        self.n = n
        self.k, self.size = check_n(n)
        committed = tuple(f"{c}.x" for c in commitments(n))
        super().__init__(
            "sigma_b",
            ports=(
                port("q.recv", OUTER, OUT, Kind.VECTOR),
                *(port(f"{c}.x", OUTER, IN) for c in commitments(n)),
                *(port(f"{c}.open", OUTER, IN, Kind.SYMBOL) for c in commitments(n)),
                port("test.recv", OUTER, OUT, Kind.INDEX_SET),
                port("bases.recv", OUTER, OUT, Kind.VECTOR),
                port("sets.send", OUTER, IN, Kind.VECTOR),
                port("pads.recv", OUTER, OUT, Kind.VECTOR),
                port("b", BOB, OUT),
                port("out", BOB, IN),
            ),
            causality=(
                Causality(committed, "test.recv"),
                Causality(committed, "bases.recv"),
                Causality(("sets.send",), "b"),
                Causality(("sets.send",), "pads.recv"),
            ),
            party=BOB,
        )

    def reset(self) -> None:
        super().reset()
        self.query = None

    def advance(self, ctx: BoxContext) -> None:
        committed = [f"{c}.x" for c in commitments(self.n)]
        if self.ready("test", *committed):
            if self.any_abort(*committed):
                ctx.abort()
                return
            self.outcome = {i: self.got[f"bc{2 * i}.x"] for i in range(self.n)}
            self.basis = {i: self.got[f"bc{2 * i + 1}.x"] for i in range(self.n)}
            ctx.emit("test.recv", self.draw_test(ctx))
        if "test" in self.stages and self.ready("check", *opened(self.test, "open")):
            if self.any_abort(*opened(self.test, "open")) or not commitments_consistent(
                self.test, self.bits, self.bases, self.outcome, self.basis
            ):
                ctx.abort()
                return
            ctx.emit("bases.recv", tuple(self.bases[i] for i in self.rest))
        if "check" in self.stages and self.ready("sets", "sets.send"):
            sets = self.got["sets.send"]
            if is_abort(sets) or not valid_sets(sets, self.rest, self.size):
                ctx.abort()
                return
            self.sets = sets
            known = [all(self.basis[i] == self.bases[i] for i in sorted(s)) for s in sets]
            if all(known):
                logger.debug("Both subsets completely known; simulation aborts")
                ctx.emit("pads.recv", BOTTOM)
                return
            if not any(known):
                ctx.emit("pads.recv", (ctx.rng.bit(), ctx.rng.bit()))
                return
            self.query = known.index(True)
            ctx.emit("b", self.query)
        if self.query is not None and self.ready("answer", "out"):
            value, j = self.got["out"], self.query
            pads = [ctx.rng.bit(), ctx.rng.bit()]
            pads[j] = BOTTOM if is_abort(value) else value ^ xor_all(self.bits[i] for i in sorted(self.sets[j]))
            ctx.emit("pads.recv", tuple(pads))


class CommittingBobDistinguisher(Distinguisher):
    """Dishonest Bob that measures, commits truthfully and names two known subsets when it can.

    The first ``skip`` states are left unmeasured and committed with random outcome and basis.
    Outputs 1 when both subsets it named are completely known and proper pads came back.
    """

    def __init__(self, system: System, n: int, skip: int = 0, a0: int = 0, a1: int = 1) -> None:
        super().__init__("committing-bob", closing_ports(system))
        self.n = n
        self.k, self.size = check_n(n)
        if not 0 <= skip <= n:
            raise InputError(f"Cannot skip {skip} of {n} states")
        self.skip = skip
        self.inputs = {"a0": a0, "a1": a1}

    def reset(self) -> None:
        super().reset()
        self.both = False

    def inject(self, ctx: BoxContext) -> None:
        for name, value in self.inputs.items():
            ctx.emit(name, value, delay=0)

    def react(self, msg: StampedMessage, ctx: BoxContext) -> None:
        if is_abort(msg.payload):
            return
        if msg.port == "q.recv":
            self.basis = [ctx.rng.bit() for _ in range(self.n)]
            self.outcome = [
                ctx.rng.bit() if i < self.skip else ctx.qubits.measure(q, self.basis[i], ctx.rng)
                for i, q in enumerate(msg.payload)
            ]
            for i in range(self.n):
                ctx.emit(f"bc{2 * i}.x", self.outcome[i])
                ctx.emit(f"bc{2 * i + 1}.x", self.basis[i])
        elif msg.port == "test.recv":
            self.rest = sorted(set(range(self.n)) - msg.payload)
            for i in range(self.n):
                symbol = Symbol.OPEN if i in msg.payload else BOTTOM
                ctx.emit(f"bc{2 * i}.open", symbol)
                ctx.emit(f"bc{2 * i + 1}.open", symbol)
        elif msg.port == "bases.recv":
            known = [i for i, t in zip(self.rest, msg.payload, strict=True) if self.basis[i] == t]
            self.both = len(known) >= 2 * self.size
            pool = known if self.both else self.rest
            ctx.emit("sets.send", (frozenset(pool[: self.size]), frozenset(pool[self.size : 2 * self.size])))

    def decide(self) -> int:
        pads = self.first("pads.recv")
        return int(self.both and pads is not None and not is_abort(pads))


class SkipMeasurementDistinguisher(CommittingBobDistinguisher):
    """Outputs 1 when the commitment test passed, i.e. Alice announced her bases."""

    def decide(self) -> int:
        bases = self.first("bases.recv")
        return int(bases is not None and not is_abort(bases))


def _resource(n: int) -> CompositeBox:
    return parallel(
        [
            Channel(kind=Kind.VECTOR),
            *(BCBox(committer=BOB) for _ in commitments(n)),
            Channel(kind=Kind.INDEX_SET),
            Channel(kind=Kind.VECTOR),
            Channel(sender=BOB, kind=Kind.VECTOR),
            Channel(kind=Kind.VECTOR),
        ],
        labels=["q", *commitments(n), "test", "bases", "sets", "pads"],
    )


def pi5_cases(n: int = 6, policy: Policy = "random") -> list[ConstructionCase]:
    """Honest, dishonest-Alice and dishonest-Bob cases of Π⁵ with k = h = n/2.

    Exact enumeration is practical at n = 6; larger n is meant for Monte Carlo.

    Raises:
        InputError: If n is not even with n/2 divisible by 3, or the policy is unknown

    """
    check_n(n)
    policy = check_policy(policy)
    ot = make_ot()
    honest = attach(Pi5Bob(n, "lexicographic"), attach(Pi5Alice(n), _resource(n), ALICE), BOB)
    dishonest_alice = attach(Pi5Bob(n, policy), _resource(n), BOB)
    dishonest_bob = attach(Pi5Alice(n), _resource(n), ALICE)
    params = {"n": n, "k": n // 2, "h": n // 2, "policy": policy}
    commits = [f"bob.{c}.x" for c in commitments(n)]
    opens = [f"bob.{c}.open" for c in commitments(n)]
    inputs = {"a0": 1, "a1": 0, "b": 1}
    return [
        ConstructionCase(
            "pi5.honest",
            "honest",
            honest,
            ot.honest,
            quantum_ot_abort_probability(n),
            clauses=order_clauses(
                commits, ("alice.test.send",), opens, ("alice.bases.send",), ("bob.sets.send",), ("alice.pads.send",)
            )
            + order_clauses(("pads.recv",), ("bob.out",)),
            distinguishers={"abort-out": lambda: AbortDistinguisher.for_system(honest, inputs, "out")},
            params=params,
        ),
        ConstructionCase(
            "pi5.dA",
            "dA",
            dishonest_alice,
            attach(Pi5SimAlice(n), ot.dishonest_alice, ALICE),
            Fraction(0),
            clauses=order_clauses(commits, ("test.recv",)) + order_clauses(("bases.recv",), ("bob.sets.send",)),
            distinguishers={
                "honest-alice": lambda: absorb(
                    ForwardingDistinguisher.for_system(honest, inputs, "out"), Pi5Alice(n), ALICE
                ),
                "honest-alice-abort": lambda: absorb(
                    AbortDistinguisher.for_system(honest, inputs, "out"), Pi5Alice(n), ALICE
                ),
            },
            params=params,
        ),
        ConstructionCase(
            "pi5.dB",
            "dB",
            dishonest_bob,
            attach(Pi5SimBob(n), ot.dishonest_bob, BOB),
            quantum_ot_both_known_probability(n),
            clauses=order_clauses([f"{c}.recv" for c in commitments(n)], ("alice.test.send",)),
            distinguishers={
                "both-intervals": lambda: CommittingBobDistinguisher(dishonest_bob, n),
                "skip-measurement": lambda: SkipMeasurementDistinguisher(dishonest_bob, n, skip=n // 2),
            },
            params=params,
        ),
    ]

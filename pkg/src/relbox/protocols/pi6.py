"""Π⁶: bit commitment from k OTs.

To commit to x Alice inputs pairs (s₀ⁱ, s₁ⁱ = s₀ⁱ ⊕ x) into k OTs, and Bob learns one element
of each pair. To open, Alice sends all pairs. Bob accepts when every pair matches the element he
holds and all pairs XOR to the same bit, which he outputs. A cheating Alice who flips one element
per pair escapes detection with probability 2^{−k}.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

from ..distinguishers import ForwardingDistinguisher, closing_ports
from ..engine import (
    BOTTOM,
    BoxContext,
    Causality,
    Channel,
    CompositeBox,
    Distinguisher,
    Kind,
    Symbol,
    System,
    attach,
    is_abort,
    parallel,
)
from ..errors import ProtocolOrderError
from ..primitives import make_bc, make_ot
from .base import ALICE, BOB, IN, OUT, OUTER, ConstructionCase, ProtocolBox, order_clauses, port
from .pi4 import check_k

BITS = (0, 1)

OPEN_DELAY = 10.0
"""Send time of the opening used by the reference distinguishers, well after the commit phase."""


def ot_labels(k: int) -> list[str]:
    return [f"ot{i}" for i in range(k)]


def consistent_opening(pairs: Any, choices: list, received: list) -> Any:
    """The opened bit, or None when ``pairs`` fails Bob's check against what he holds."""
    if not (isinstance(pairs, tuple) and len(pairs) == len(choices)):
        return None
    if not all(isinstance(p, tuple) and len(p) == 2 and not any(map(is_abort, p)) for p in pairs):
        return None
    if any(pair[int(b)] != value for pair, b, value in zip(pairs, choices, received, strict=True)):
        return None
    values = {int(p0 ^ p1) for p0, p1 in pairs}
    return values.pop() if len(values) == 1 else None


class Pi6Alice(ProtocolBox):
    """Π⁶_A: commits through the OTs and sends all pairs on open."""

    def __init__(self, k: int) -> None:
        self.k = k
        self.labels = ot_labels(k)
        super().__init__(
            "alice",
            ports=(
                port("x", OUTER, IN),
                port("open", OUTER, IN, Kind.SYMBOL),
                *(port(f"{o}.a{j}", ALICE, OUT) for o in self.labels for j in BITS),
                port("opening.send", ALICE, OUT, Kind.VECTOR),
            ),
            causality=(
                *(Causality(("x",), f"{o}.a{j}") for o in self.labels for j in BITS),
                Causality(("x", "open"), "opening.send"),
            ),
            party=ALICE,
        )

    def advance(self, ctx: BoxContext) -> None:
        if "open" in self.got and "x" not in self.got and not is_abort(self.got["open"]):
            raise ProtocolOrderError(f"{self.name}: open before commit")
        if self.ready("commit", "x"):
            x = self.got["x"]
            if is_abort(x):
                ctx.abort()
                return
            self.pairs = []
            for o in self.labels:
                s0 = ctx.rng.bit()
                self.pairs.append((s0, s0 ^ x))
                ctx.emit(f"{o}.a0", s0)
                ctx.emit(f"{o}.a1", s0 ^ x)
        if self.ready("open", "x", "open"):
            ctx.emit("opening.send", BOTTOM if is_abort(self.got["open"]) else tuple(self.pairs))


class Pi6Bob(ProtocolBox):
    """Π⁶_B: learns one random element per pair and checks the opening against them."""

    def __init__(self, k: int) -> None:
        self.k = k
        self.labels = ot_labels(k)
        received = tuple(f"{o}.out" for o in self.labels)
        super().__init__(
            "bob",
            ports=(
                port("recv", OUTER, OUT, Kind.SYMBOL),
                port("reveal", OUTER, OUT),
                *(port(f"{o}.b", BOB, OUT) for o in self.labels),
                *(port(f"{o}.out", BOB, IN) for o in self.labels),
                port("opening.recv", BOB, IN, Kind.VECTOR),
            ),
            causality=(Causality(received, "recv"), Causality((*received, "opening.recv"), "reveal")),
            party=BOB,
        )

    def on_start(self, ctx: BoxContext) -> None:
        self.choices = [ctx.rng.bit() for _ in self.labels]
        for o, b in zip(self.labels, self.choices, strict=True):
            ctx.emit(f"{o}.b", b)

    def advance(self, ctx: BoxContext) -> None:
        received = [f"{o}.out" for o in self.labels]
        if self.ready("commit", *received):
            if self.any_abort(*received):
                ctx.abort()
                return
            ctx.emit("recv", Symbol.RECV)
        if "commit" in self.stages and self.ready("open", "opening.recv"):
            value = consistent_opening(self.got["opening.recv"], self.choices, [self.got[p] for p in received])
            if value is None:
                ctx.abort()
                return
            ctx.emit("reveal", value)


class Pi6SimAlice(ProtocolBox):
    """σ⁶_A: commits to the XOR of the first pair and replays Bob's check on the opening."""

    def __init__(self, k: int) -> None:
        self.k = k
        self.labels = ot_labels(k)
        inputs = tuple(f"{o}.a{j}" for o in self.labels for j in BITS)
        super().__init__(
            "sigma_a",
            ports=(
                *(port(p, OUTER, IN) for p in inputs),
                port("opening.send", OUTER, IN, Kind.VECTOR),
                port("x", ALICE, OUT),
                port("open", ALICE, OUT, Kind.SYMBOL),
            ),
            causality=(Causality(inputs, "x"), Causality((*inputs, "opening.send"), "open")),
            party=ALICE,
        )

    def advance(self, ctx: BoxContext) -> None:
        inputs = [f"{o}.a{j}" for o in self.labels for j in BITS]
        if self.ready("commit", *inputs):
            self.choices = [ctx.rng.bit() for _ in self.labels]
            self.held = [self.got[f"{o}.a{int(b)}"] for o, b in zip(self.labels, self.choices, strict=True)]
            if any(map(is_abort, self.held)):
                ctx.abort()
                return
            # a ⊥ in a slot Bob did not pick counts as 0
            a0, a1 = (self.got[f"{self.labels[0]}.a{j}"] for j in BITS)
            self.committed_at = ctx.now + ctx.settings.emission_delay
            ctx.emit("x", (0 if is_abort(a0) else a0) ^ (0 if is_abort(a1) else a1))
        if "commit" in self.stages and self.ready("open", "opening.send"):
            value = consistent_opening(self.got["opening.send"], self.choices, self.held)
            # the commitment only accepts an open strictly after it was made
            delay = max(ctx.settings.emission_delay, self.committed_at - ctx.now + ctx.settings.emission_delay)
            ctx.emit("open", BOTTOM if value is None else Symbol.OPEN, delay=delay)


class Pi6SimBob(ProtocolBox):
    """σ⁶_B: answers each OT query with a uniform bit and completes the pairs once x is revealed."""

    def __init__(self, k: int) -> None:
        self.k = k
        self.labels = ot_labels(k)
        super().__init__(
            "sigma_b",
            ports=(
                *(port(f"{o}.b", OUTER, IN) for o in self.labels),
                *(port(f"{o}.out", OUTER, OUT) for o in self.labels),
                port("opening.recv", OUTER, OUT, Kind.VECTOR),
                port("recv", BOB, IN, Kind.SYMBOL),
                port("reveal", BOB, IN),
            ),
            causality=(
                *(Causality(("recv", f"{o}.b"), f"{o}.out") for o in self.labels),
                Causality(("recv", "reveal"), "opening.recv"),
            ),
            party=BOB,
        )

    def reset(self) -> None:
        super().reset()
        self.pairs: dict[int, tuple] = {}

    def on_start(self, ctx: BoxContext) -> None:
        self.held = [ctx.rng.bit() for _ in self.labels]

    def advance(self, ctx: BoxContext) -> None:
        if "recv" in self.got and is_abort(self.got["recv"]):
            if self.ready("refuse"):
                ctx.emit("opening.recv", BOTTOM)
            for o in self.labels:
                if self.ready(f"answer-{o}", f"{o}.b"):
                    ctx.emit(f"{o}.out", BOTTOM)
            return
        for i, o in enumerate(self.labels):
            if self.ready(f"answer-{o}", "recv", f"{o}.b"):
                b = self.got[f"{o}.b"]
                if is_abort(b):
                    ctx.emit(f"{o}.out", BOTTOM)
                elif i in self.pairs:
                    ctx.emit(f"{o}.out", self.pairs[i][int(b)])
                else:
                    ctx.emit(f"{o}.out", self.held[i])
        if self.ready("open", "recv", "reveal"):
            x = self.got["reveal"]
            if is_abort(x):
                ctx.emit("opening.recv", BOTTOM)
                return
            for i, o in enumerate(self.labels):
                b = self.got.get(f"{o}.b")
                # queries still missing get the held bit as s₀
                chosen = 0 if b is None or is_abort(b) else int(b)
                pair = [self.held[i], self.held[i]]
                pair[1 - chosen] = self.held[i] ^ x
                self.pairs[i] = tuple(pair)
            ctx.emit("opening.recv", tuple(self.pairs[i] for i in range(self.k)))


class BindingAttackDistinguisher(Distinguisher):
    """Dishonest Alice that commits to 0 and opens 1 by flipping a random element of every pair.

    Outputs 1 when Bob reveals 1; against the real system this happens with probability 2^{−k}.
    """

    def __init__(self, system: System, k: int, open_delay: float = OPEN_DELAY) -> None:
        super().__init__("binding-attack", closing_ports(system))
        self.labels = ot_labels(k)
        self.open_delay = open_delay

    def inject(self, ctx: BoxContext) -> None:
        pairs = []
        for o in self.labels:
            s0 = ctx.rng.bit()
            ctx.emit(f"{o}.a0", s0, delay=0)
            ctx.emit(f"{o}.a1", s0, delay=0)
            pair = [s0, s0]
            flip = int(ctx.rng.bit())
            pair[flip] ^= 1
            pairs.append(tuple(pair))
        ctx.emit("opening.send", tuple(pairs), delay=self.open_delay)

    def decide(self) -> int:
        return int(self.first("reveal") == 1)


def _resource(ots: list, k: int) -> CompositeBox:
    return parallel([*ots, Channel(kind=Kind.VECTOR)], labels=[*ot_labels(k), "opening"])


def pi6_cases(k: int = 1, open_delay: float = OPEN_DELAY) -> list[ConstructionCase]:
    """Honest, dishonest-Alice and dishonest-Bob cases of Π⁶.

    Raises:
        InputError: If k is not a positive integer

    """
    k = check_k(k)
    bc = make_bc(ALICE)
    labels = ot_labels(k)
    ots = [make_ot() for _ in labels]
    honest = attach(Pi6Bob(k), attach(Pi6Alice(k), _resource([t.honest for t in ots], k), ALICE), BOB)
    dishonest_alice = attach(Pi6Bob(k), _resource([t.dishonest_alice for t in ots], k), BOB)
    dishonest_bob = attach(Pi6Alice(k), _resource([t.dishonest_bob for t in ots], k), ALICE)
    outputs = [f"{o}.out" for o in labels]
    opening = (Symbol.OPEN, BOTTOM)
    single = k == 1
    params = {"k": k, "open_delay": open_delay}
    return [
        ConstructionCase(
            "pi6.honest",
            "honest",
            honest,
            bc.honest,
            Fraction(0),
            clauses=(
                order_clauses(outputs, ("bob.recv", "opening.recv"))
                + order_clauses(("opening.recv",), ("bob.reveal",))
            ),
            input_space={"x": BITS, "open": opening},
            input_delays={"open": open_delay},
            distinguishers={
                "forward-reveal": lambda: ForwardingDistinguisher.for_system(
                    honest, {"x": 1, "open": Symbol.OPEN}, "reveal", delays={"open": open_delay}
                )
            },
            params=params,
        ),
        ConstructionCase(
            "pi6.dA",
            "dA",
            dishonest_alice,
            attach(Pi6SimAlice(k), bc.dishonest_alice, ALICE),
            Fraction(1, 2**k),
            clauses=(
                order_clauses(outputs, ("bob.recv", "opening.recv"))
                + order_clauses(("opening.recv",), ("bob.reveal",))
            ),
            input_space=(
                {
                    "ot0.a0": BITS,
                    "ot0.a1": BITS,
                    "opening.send": [((p0, p1),) for p0 in BITS for p1 in BITS],
                }
                if single
                else None
            ),
            input_delays={"opening.send": open_delay},
            distinguishers={"binding-attack": lambda: BindingAttackDistinguisher(dishonest_alice, k, open_delay)},
            params=params,
        ),
        ConstructionCase(
            "pi6.dB",
            "dB",
            dishonest_bob,
            attach(Pi6SimBob(k), bc.dishonest_bob, BOB),
            Fraction(0),
            clauses=order_clauses(outputs, ("opening.recv",)),
            input_space={"x": BITS, "open": opening, **{f"{o}.b": BITS for o in labels}} if k <= 4 else None,
            input_delays={"open": open_delay},
            distinguishers={
                "forward-query": lambda: ForwardingDistinguisher.for_system(
                    dishonest_bob, {"x": 1, "open": Symbol.OPEN, **{f"{o}.b": 0 for o in labels}}, "ot0.out",
                    delays={"open": open_delay},
                )
            },
            params=params,
        ),
    ]

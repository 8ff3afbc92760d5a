"""Distinguishers that catch the chained simulators.

Each one feeds uniform inputs on both interfaces and outputs 1 on an event that the honest
ideal resource never produces. A missing output counts as a mismatch.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

from ..distinguishers import closing_ports
from ..engine import BoxContext, Distinguisher, is_abort
from ..primitives import MPCBox, OTBox, RabinBox, ROTBox, and_bits, or_bits


def _missing(value: Any) -> bool:
    return value is None or is_abort(value)


class RotMismatchDistinguisher(Distinguisher):
    """Inputs a uniform b′ and outputs 1 iff Bob's s′_{b′} differs from Alice's s_{b′}."""

    def __init__(self, s: int = 1) -> None:
        super().__init__("d-rot", closing_ports(ROTBox(s)))

    def inject(self, ctx: BoxContext) -> None:
        self.b = ctx.rng.bit()
        ctx.emit("b", self.b, delay=0)

    def decide(self) -> int:
        key = f"s{int(self.b)}"
        left, right = self.first(key), self.first("sb")
        if _missing(left) or _missing(right):
            return 1
        return int(left != right)


class OtMismatchDistinguisher(Distinguisher):
    """Inputs uniform a₀, a₁, b′ and outputs 1 iff Bob's output is not a_{b′}."""

    def __init__(self, s: int = 1) -> None:
        super().__init__("d-ot", closing_ports(OTBox(s)))
        self.s = s

    def inject(self, ctx: BoxContext) -> None:
        self.a = (ctx.rng.bits(self.s), ctx.rng.bits(self.s))
        self.b = ctx.rng.bit()
        ctx.emit("a0", self.a[0], delay=0)
        ctx.emit("a1", self.a[1], delay=0)
        ctx.emit("b", self.b, delay=0)

    def decide(self) -> int:
        out = self.first("out")
        if _missing(out):
            return 1
        return int(out != self.a[int(self.b)])


class RabinMismatchDistinguisher(Distinguisher):
    """Inputs a uniform x_A and outputs 1 iff Bob receives a value other than x_A."""

    def __init__(self, s: int = 1) -> None:
        super().__init__("d-rabin", closing_ports(RabinBox(s=s)))
        self.s = s

    def inject(self, ctx: BoxContext) -> None:
        self.x = ctx.rng.bits(self.s)
        ctx.emit("x", self.x, delay=0)

    def decide(self) -> int:
        out = self.first("out")
        if out is None:
            return 1
        return int(not is_abort(out) and out != self.x)


class DeliveryDistinguisher(Distinguisher):
    """Outputs 1 iff Bob receives ⊥ (or nothing): compares erasure rates."""

    def __init__(self, s: int = 1) -> None:
        super().__init__("d-delivery", closing_ports(RabinBox(s=s)))
        self.s = s

    def inject(self, ctx: BoxContext) -> None:
        ctx.emit("x", ctx.rng.bits(self.s), delay=0)

    def decide(self) -> int:
        return int(_missing(self.first("out")))


class MpcMismatchDistinguisher(Distinguisher):
    """Inputs uniform x (Alice) and y′ (Bob); outputs 1 iff either party's result is not f(x, y′)."""

    def __init__(self, f: Callable[[Any, Any], Any] = and_bits, name: str = "d-and") -> None:
        super().__init__(name, closing_ports(MPCBox(f)))
        self.f = f

    def inject(self, ctx: BoxContext) -> None:
        self.x, self.y = ctx.rng.bit(), ctx.rng.bit()
        ctx.emit("x", self.x, delay=0)
        ctx.emit("y", self.y, delay=0)

    def decide(self) -> int:
        expected = self.f(self.x, self.y)
        fa, fb = self.first("fa"), self.first("fb")
        if _missing(fa) or _missing(fb):
            return 1
        return int(fa != expected or fb != expected)


def d_rot(s: int = 1) -> RotMismatchDistinguisher:
    return RotMismatchDistinguisher(s)


def d_ot(s: int = 1) -> OtMismatchDistinguisher:
    return OtMismatchDistinguisher(s)


def d_rabin(s: int = 1) -> RabinMismatchDistinguisher:
    return RabinMismatchDistinguisher(s)


def d_delivery(s: int = 1) -> DeliveryDistinguisher:
    return DeliveryDistinguisher(s)


def d_and() -> MpcMismatchDistinguisher:
    return MpcMismatchDistinguisher(and_bits, "d-and")


def d_or() -> MpcMismatchDistinguisher:
    return MpcMismatchDistinguisher(or_bits, "d-or")


DISTINGUISHERS: dict[str, Callable[[int], list[Distinguisher]]] = {
    "rot": lambda s: [d_rot(s)],
    "ot": lambda s: [d_ot(s)],
    "rabin": lambda s: [d_rabin(s), d_delivery(s)],
    "and": lambda s: [d_and()],  # noqa: ARG005
    "or": lambda s: [d_or()],  # noqa: ARG005
}

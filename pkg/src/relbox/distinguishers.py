"""Generic distinguishers that work with any system's free ports."""

from __future__ import annotations

from collections.abc import Collection, Iterable, Mapping
from typing import Any

from .engine import BoxContext, Direction, Distinguisher, Port, System, as_system, is_abort, is_bit, mirror_ports
from .errors import WiringError


def closing_ports(system: System) -> tuple[Port, ...]:
    """Ports of a distinguisher that closes ``system``."""
    return mirror_ports(as_system(system).ports)


class ScanningDistinguisher(Distinguisher):
    """Feeds a fixed input assignment and accepts a chosen set of observations.

    Inputs are sent at t = 0 unless ``delays`` gives a later time for a port. With
    ``accept=None`` it always outputs 0 and only serves to collect observations.
    """

    def __init__(
        self,
        ports: Iterable[Port],
        inputs: Mapping[str, Any],
        accept: Collection[tuple] | None = None,
        delays: Mapping[str, float] | None = None,
        name: str = "scan",
    ) -> None:
        super().__init__(name, ports)
        missing = [p.name for p in self.ports if p.direction is Direction.OUT and p.name not in inputs]
        if missing:
            raise WiringError(f"No input given for ports {missing}")
        self.inputs = dict(inputs)
        self.accept = None if accept is None else frozenset(accept)
        self.delays = dict(delays or {})

    @classmethod
    def for_system(
        cls,
        system: System,
        inputs: Mapping[str, Any],
        accept: Collection[tuple] | None = None,
        delays: Mapping[str, float] | None = None,
    ) -> ScanningDistinguisher:
        """Distinguisher covering exactly the free ports of ``system``."""
        return cls(closing_ports(system), inputs, accept, delays)

    def inject(self, ctx: BoxContext) -> None:
        for port in self.ports:
            if port.direction is Direction.OUT:
                ctx.emit(port.name, self.inputs[port.name], delay=self.delays.get(port.name, 0))

    def decide(self) -> int:
        if self.accept is None:
            return 0
        return int(self.observation() in self.accept)


class ConstantDistinguisher(Distinguisher):
    """Sends nothing and outputs a constant bit."""

    def __init__(self, ports: Iterable[Port], value: int = 1, name: str = "constant") -> None:
        super().__init__(name, ports)
        self.value = value

    @classmethod
    def for_system(cls, system: System, value: int = 1) -> ConstantDistinguisher:
        """Constant distinguisher covering the free ports of ``system``."""
        return cls(closing_ports(system), value)

    def decide(self) -> int:
        return self.value


class ForwardingDistinguisher(ScanningDistinguisher):
    """Outputs the first bit received on ``port`` (0 when nothing or ⊥ arrives)."""

    def __init__(
        self,
        ports: Iterable[Port],
        inputs: Mapping[str, Any],
        port: str,
        delays: Mapping[str, float] | None = None,
        name: str = "forward",
    ) -> None:
        super().__init__(ports, inputs, delays=delays, name=name)
        self.port_name = port

    @classmethod
    def for_system(  # type: ignore[override]
        cls, system: System, inputs: Mapping[str, Any], port: str, delays: Mapping[str, float] | None = None
    ) -> ForwardingDistinguisher:
        """Forwarding distinguisher covering the free ports of ``system``."""
        return cls(closing_ports(system), inputs, port, delays)

    def decide(self) -> int:
        value = self.first(self.port_name)
        return int(value) if is_bit(value) else 0


class AbortDistinguisher(ForwardingDistinguisher):
    """Outputs 1 exactly when the first payload on ``port`` is ⊥ or nothing arrives."""

    def decide(self) -> int:
        value = self.first(self.port_name)
        return int(value is None or is_abort(value))

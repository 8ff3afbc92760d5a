"""The chained system R_B·σ_BA·R_A used by the impossibility arguments."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..engine import Box, CompositeBox, Port, Side, compose, mirror_ports
from ..primitives import PrimitiveTriple
from ..settings import Settings, get_settings
from .strategies import SimulatorStrategy, StrategyBox

logger = logging.getLogger(__name__)

ALICE, BOB = Side.ALICE, Side.BOB


@dataclass
class ChainSystem:
    """R_B·σ_BA·R_A with the same free ports as the honest resource.

    Attributes:
        left: Dishonest-Bob resource; its Alice interface stays free
        middle: The merged simulator σ_BA
        right: Dishonest-Alice resource; its Bob interface stays free
        system: The wired composite (member keys ``rb``, ``sigma`` and ``ra``)
        ideal: A fresh honest resource to compare against

    """

    left: Box
    middle: StrategyBox
    right: Box
    system: CompositeBox
    ideal: Box
    strategy: str


def strategy_ports(left: Box, right: Box) -> tuple[Port, ...]:
    """Ports σ_BA needs: mirrors of R_B's Bob interface and of R_A's Alice interface."""
    return mirror_ports([*(p for p in left.ports if p.side is BOB), *(p for p in right.ports if p.side is ALICE)])


def build_chain(
    primitive: PrimitiveTriple, strategy: SimulatorStrategy, settings: Settings | None = None
) -> ChainSystem:
    """Wire ``strategy`` between fresh copies of the dishonest resources of ``primitive``.

    The middle box and the inner interfaces of both resources sit halfway between the parties,
    so every hop stays inside one emission delay.

    Raises:
        WiringError: If the strategy does not fit the primitive's ports

    """
    settings = settings or get_settings()
    triple = primitive.fresh()
    left, right = triple.dishonest_bob, triple.dishonest_alice
    middle = strategy.build(strategy_ports(left, right))
    mid = settings.midpoint
    left.placement = {BOB: mid}
    right.placement = {ALICE: mid}
    middle.placement = {ALICE: mid, BOB: mid}
    links = [(f"rb.{p.name}", f"sigma.{p.name}") for p in left.ports if p.side is BOB]
    links += [(f"ra.{p.name}", f"sigma.{p.name}") for p in right.ports if p.side is ALICE]
    expose = {p.name: f"rb.{p.name}" for p in left.ports if p.side is ALICE}
    expose |= {p.name: f"ra.{p.name}" for p in right.ports if p.side is BOB}
    system = compose({"rb": left, "sigma": middle, "ra": right}, links, expose)
    logger.debug("Chain %s/%s exposes %s", primitive.kind, strategy.name, sorted(system.exposed))
    return ChainSystem(left, middle, right, system, triple.honest, strategy.name)

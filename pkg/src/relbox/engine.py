"""Causal boxes, their composition and the discrete-event run loop.

A :class:`Box` owns named ports on the Alice side, the Bob side or the outer interface, and
reacts to spacetime-stamped messages. Boxes are wired into a flat :class:`CompositeBox` by
:func:`attach` (a converter plugged onto one side of a resource), :func:`parallel` (independent
resources side by side) and the general :func:`compose`. :func:`run` closes a system with a
:class:`Distinguisher` and processes messages in ``(t, wire id, seq)`` order until quiescence.

Causality is enforced on every emission: each box declares which input ports an output depends
on (:class:`Causality`), and an emission must lie in the causal future of every message consumed
on those ports. Protocol-level ordering requirements between wires are expressed as
:class:`OrderClause` values and audited on the finished transcript.

Example:
    >>> from relbox.engine import Channel, Side, run
    >>> from relbox.distinguishers import ScanningDistinguisher
    >>> channel = Channel(sender=Side.ALICE)
    >>> d = ScanningDistinguisher.for_system(channel, {"send": 1})
    >>> run(channel, d, seed=0).transcript.events[-1].payload
    1

"""

from __future__ import annotations

import heapq
import json
import logging
from abc import ABC, abstractmethod
from collections import defaultdict
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any

from .errors import CausalityViolation, RunawayError, WiringError
from .quantum import Basis, QubitHandle, QubitTable
from .randomness import LazyBit, Randomness, RandomSource, SeededSource
from .settings import Settings, get_settings
from .spacetime import SpacetimePoint, causal_precedes

logger = logging.getLogger(__name__)

ENV = "env"
"""Member key of the distinguisher in a closed run; its wires are ``env.<port>``."""

OUTSIDE = ""
"""Route target key for emissions that leave a nested world."""

WAKE = "~wake"
"""Pseudo-port of wake-up entries in the event queue; they are never recorded."""

Endpoint = tuple[str, str]


class Side(str, Enum):
    """Which interface a port belongs to."""

    ALICE = "alice"
    BOB = "bob"
    OUTER = "outer"

    def other(self) -> Side:
        """The opposite party (outer has none)."""
        if self is Side.OUTER:
            raise WiringError("The outer interface has no opposite side")
        return Side.BOB if self is Side.ALICE else Side.ALICE


class Direction(str, Enum):
    """Port direction as seen from the owning box."""

    IN = "in"
    OUT = "out"


class Kind(str, Enum):
    """Payload kinds carried by wires."""

    BIT = "bit"
    BITSTRING = "bitstring"
    SYMBOL = "symbol"
    INDEX_SET = "index_set"
    QUBIT = "qubit"
    VECTOR = "vector"


class Symbol(str, Enum):
    """Non-data payloads. ``ABORT`` (⊥) is valid on every wire."""

    ABORT = "⊥"
    OPEN = "open"
    RECV = "recv"


BOTTOM = Symbol.ABORT


def is_abort(payload: Any) -> bool:
    """Identity test for ⊥ that never forces a lazy bit."""
    return payload is Symbol.ABORT


def is_bit(payload: Any) -> bool:
    """True for 0/1 ints and lazy bits."""
    return isinstance(payload, LazyBit) or (isinstance(payload, int) and payload in {0, 1})


@dataclass(frozen=True)
class Port:
    """A named, typed port of a box."""

    name: str
    side: Side
    direction: Direction
    kind: Kind = Kind.BIT
    width: int = 1

    def accepts(self, payload: Any) -> bool:
        """Return whether ``payload`` matches the declared kind (⊥ always does)."""
        if is_abort(payload):
            return True
        if self.kind is Kind.BIT:
            return is_bit(payload)
        if self.kind is Kind.BITSTRING:
            if isinstance(payload, LazyBit):
                return self.width == 1
            return isinstance(payload, int) and 0 <= payload < (1 << self.width)
        if self.kind is Kind.SYMBOL:
            return isinstance(payload, Symbol)
        if self.kind is Kind.INDEX_SET:
            return isinstance(payload, frozenset) and all(isinstance(i, int) for i in payload)
        if self.kind is Kind.QUBIT:
            return isinstance(payload, QubitHandle)
        return isinstance(payload, tuple)

    def mirrored(self) -> Port:
        """Same port seen from the peer that connects to it."""
        return replace(self, direction=Direction.IN if self.direction is Direction.OUT else Direction.OUT)

    def connects_to(self, other: Port) -> bool:
        """Opposite direction with identical kind and width."""
        return self.direction is not other.direction and self.kind is other.kind and self.width == other.width


def string_port(name: str, side: Side, direction: Direction, s: int = 1) -> Port:
    """Port carrying an s-bit string (a plain bit when ``s == 1``)."""
    if s == 1:
        return Port(name, side, direction, Kind.BIT)
    return Port(name, side, direction, Kind.BITSTRING, s)


@dataclass(frozen=True)
class Causality:
    """Declared dependency: emissions on ``output`` require the messages consumed on ``inputs``."""

    inputs: tuple[str, ...]
    output: str

    def __str__(self) -> str:
        return f"{', '.join(self.inputs)} → {self.output}"


@dataclass(frozen=True)
class OrderClause:
    """Every message on ``after`` must be preceded by all messages on ``before`` (wire ids)."""

    before: str
    after: str

    def __str__(self) -> str:
        return f"{self.before} ≺ {self.after}"


@dataclass(frozen=True)
class StampedMessage:
    """A message as delivered: source wire, destination port, payload and stamp."""

    wire: str
    port: str
    payload: Any
    point: SpacetimePoint
    seq: int


# =============================================================================
# BOXES
# =============================================================================


class Box(ABC):
    """A causal box.

    Subclasses declare their ports and causality constraints in ``__init__`` and implement
    :meth:`on_message`. Per-run state belongs in :meth:`reset`, which the engine calls before
    every run, so one instance can be run many times.

    Attributes:
        name: Default member key when the box is wired into a system
        ports: Declared ports, unique by name
        causality: Declared input → output dependencies
        party: Side whose location the outer ports use (converters and simulators)
        placement: Optional per-side location overrides

    """

    def __init__(
        self,
        name: str,
        ports: Iterable[Port],
        causality: Iterable[Causality] = (),
        party: Side | None = None,
        placement: Mapping[Side, tuple[float, float, float]] | None = None,
    ) -> None:
        self.name = name
        self.ports = tuple(ports)
        self.causality = tuple(causality)
        self.party = party
        self.placement = dict(placement or {})
        self._by_name = {p.name: p for p in self.ports}
        if len(self._by_name) != len(self.ports):
            raise WiringError(f"Box {name!r} declares duplicate port names")
        for c in self.causality:
            if any(self.port(i).direction is not Direction.IN for i in c.inputs):
                raise WiringError(f"Box {name!r}: causality {c} lists a non-input port")
            if self.port(c.output).direction is not Direction.OUT:
                raise WiringError(f"Box {name!r}: causality {c} targets a non-output port")

    def port(self, name: str) -> Port:
        """Look up a port by name."""
        try:
            return self._by_name[name]
        except KeyError:
            raise WiringError(f"Box {self.name!r} has no port {name!r}") from None

    def reset(self) -> None:
        """Clear per-run state."""

    def on_start(self, ctx: BoxContext) -> None:
        """Called once at t = 0 before any message is delivered."""

    @abstractmethod
    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        """React to a delivered message."""

    def on_wake(self, ctx: BoxContext) -> None:
        """Called at a time requested with :meth:`BoxContext.wake`."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class Distinguisher(Box):
    """Box closing a system: feeds its free inputs, records its outputs, then outputs one bit.

    Observations are the payloads received on each port, in delivery order, without stamps.
    Exact advantages compare these stamp-free observations, so timing alone never separates two
    systems there; a distinguisher deciding on arrival times must override :meth:`on_message`.
    Subclasses inject inputs in :meth:`inject`, may answer adaptively in :meth:`react`, and
    implement :meth:`decide`.
    """

    def reset(self) -> None:
        self.observed: dict[str, list[Any]] = {p.name: [] for p in self.ports if p.direction is Direction.IN}

    def on_start(self, ctx: BoxContext) -> None:
        self.inject(ctx)

    def inject(self, ctx: BoxContext) -> None:
        """Send initial inputs (default: none)."""

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        self.observed[msg.port].append(msg.payload)
        self.react(msg, ctx)

    def react(self, msg: StampedMessage, ctx: BoxContext) -> None:
        """Answer an observation (default: passive)."""

    def first(self, port: str, default: Any = None) -> Any:
        """First payload seen on ``port``, or ``default``."""
        seen = self.observed.get(port)
        return seen[0] if seen else default

    def observation(self) -> tuple:
        """Hashable summary of everything received (lazy bits forced)."""
        return tuple(
            (name, tuple(freeze_payload(p) for p in payloads)) for name, payloads in sorted(self.observed.items())
        )

    @abstractmethod
    def decide(self) -> int:
        """Output bit, called once the run is quiescent."""


def mirror_ports(ports: Iterable[Port]) -> tuple[Port, ...]:
    """Ports a distinguisher needs to close a system exposing ``ports``."""
    return tuple(p.mirrored() for p in ports)


class Channel(Box):
    """One-way authenticated classical channel between the parties.

    The sender's ``send`` input is forwarded to the receiver's ``recv`` output after ``delay``
    (default: the settings' emission delay, which lands exactly on the light cone between the
    default party locations).
    """

    def __init__(
        self,
        name: str = "channel",
        sender: Side = Side.ALICE,
        kind: Kind = Kind.BIT,
        width: int = 1,
        delay: float | None = None,
    ) -> None:
        super().__init__(
            name,
            ports=(
                Port("send", sender, Direction.IN, kind, width),
                Port("recv", sender.other(), Direction.OUT, kind, width),
            ),
            causality=(Causality(("send",), "recv"),),
        )
        self.delay = delay

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        ctx.emit("recv", msg.payload, delay=self.delay)


# =============================================================================
# COMPOSITION
# =============================================================================


@dataclass
class CompositeBox:
    """A flat wiring of leaf boxes.

    Attributes:
        members: Leaf boxes by member key (wire ids are ``"<member key>.<port>"``)
        bindings: Output endpoint → input endpoint for internal wires
        exposed: Free port name → (internal endpoint, port as seen from outside)

    """

    members: dict[str, Box]
    bindings: dict[Endpoint, Endpoint] = field(default_factory=dict)
    exposed: dict[str, tuple[Endpoint, Port]] = field(default_factory=dict)

    @property
    def ports(self) -> tuple[Port, ...]:
        """Free ports in exposure order."""
        return tuple(port for _, port in self.exposed.values())

    def port(self, name: str) -> Port:
        """Look up a free port by name."""
        try:
            return self.exposed[name][1]
        except KeyError:
            raise WiringError(f"System has no free port {name!r}") from None

    def signature(self) -> frozenset[Port]:
        """Set of free ports, for comparing interfaces."""
        return frozenset(self.ports)


System = Box | CompositeBox


def as_system(box: System) -> CompositeBox:
    """View a leaf box as a one-member composite."""
    if isinstance(box, CompositeBox):
        return box
    return CompositeBox({box.name: box}, {}, {p.name: ((box.name, p.name), p) for p in box.ports})


def _merge(parts: Iterable[CompositeBox]) -> CompositeBox:
    merged = CompositeBox({})
    seen: set[int] = set()
    for part in parts:
        for key, box in part.members.items():
            if key in merged.members:
                raise WiringError(f"Duplicate member key {key!r}; give parts distinct labels")
            if id(box) in seen:
                raise WiringError(f"Box {box.name!r} is wired twice; use a fresh instance")
            seen.add(id(box))
            merged.members[key] = box
        merged.bindings.update(part.bindings)
        for name, entry in part.exposed.items():
            if name in merged.exposed:
                raise WiringError(f"Free port {name!r} is exposed twice")
            merged.exposed[name] = entry
    return merged


def _prefixed(system: CompositeBox, label: str) -> CompositeBox:
    single = len(system.members) == 1
    keys = {k: label if single else f"{label}.{k}" for k in system.members}

    def ep(endpoint: Endpoint) -> Endpoint:
        return keys[endpoint[0]], endpoint[1]

    return CompositeBox(
        {keys[k]: box for k, box in system.members.items()},
        {ep(a): ep(b) for a, b in system.bindings.items()},
        {f"{label}.{name}": (ep(e), replace(p, name=f"{label}.{name}")) for name, (e, p) in system.exposed.items()},
    )


def parallel(boxes: Iterable[System], labels: Iterable[str] | None = None) -> CompositeBox:
    """Place independent systems side by side.

    With ``labels``, free ports are renamed ``"<label>.<port>"`` and members keyed by label.
    Without labels a single system is returned unchanged and several are labelled 0, 1, ...

    Raises:
        WiringError: On label count mismatch, duplicate labels or a box used twice

    """
    systems = [as_system(b) for b in boxes]
    if labels is None:
        if len(systems) == 1:
            return systems[0]
        labels = [str(i) for i in range(len(systems))]
    labels = list(labels)
    if len(labels) != len(systems) or len(set(labels)) != len(labels):
        raise WiringError(f"Need {len(systems)} distinct labels, got {labels}")
    return _merge(_prefixed(s, label) for s, label in zip(systems, labels, strict=True))


def attach(converter: System, resource: System, side: Side) -> CompositeBox:
    """Plug ``converter`` onto the ``side`` interface of ``resource``.

    Every converter port on ``side`` must meet a resource port of the same name on that side,
    with opposite direction and identical kind, and the resource must have no other port there.
    The converter's outer ports become the new ``side`` interface.

    Raises:
        WiringError: Naming the first mismatching port

    """
    if side is Side.OUTER:
        raise WiringError("Converters attach to the alice or bob interface")
    conv, res = as_system(converter), as_system(resource)
    merged = _merge([replace(conv, exposed={}), replace(res, exposed={})])
    inner = {n: e for n, e in conv.exposed.items() if e[1].side is side}
    facing = {n: e for n, e in res.exposed.items() if e[1].side is side}
    stray = [n for n, (_, p) in conv.exposed.items() if p.side not in {side, Side.OUTER}]
    if stray:
        raise WiringError(f"Converter ports {stray} face the wrong interface for side {side.value}")
    for name in sorted(set(inner) | set(facing)):
        if name not in inner or name not in facing:
            raise WiringError(f"Port {name!r} on the {side.value} interface has no counterpart")
        (c_ep, c_port), (r_ep, r_port) = inner[name], facing[name]
        if not c_port.connects_to(r_port):
            raise WiringError(
                f"Port {name!r}: {c_port.direction.value}/{c_port.kind.value} "
                f"cannot connect to {r_port.direction.value}/{r_port.kind.value}"
            )
        if c_port.direction is Direction.OUT:
            merged.bindings[c_ep] = r_ep
        else:
            merged.bindings[r_ep] = c_ep
    for name, (ep, port) in conv.exposed.items():
        if port.side is Side.OUTER:
            merged.exposed[name] = (ep, replace(port, side=side))
    for name, entry in res.exposed.items():
        if entry[1].side is not side:
            if name in merged.exposed:
                raise WiringError(f"Free port {name!r} would be exposed twice")
            merged.exposed[name] = entry
    return merged


def compose(
    parts: Mapping[str, System],
    links: Iterable[tuple[str, str]] = (),
    expose: Mapping[str, str] | None = None,
) -> CompositeBox:
    """General wiring: label parts, connect free ports pairwise, rename what stays free.

    Args:
        parts: Systems by label; their free ports become ``"<label>.<port>"``
        links: Pairs of labelled free ports to connect (same side, opposite direction)
        expose: Optional renaming of remaining free ports (``new name → labelled port``)

    Raises:
        WiringError: On unknown ports, incompatible pairs or a port linked twice

    """
    merged = _merge(_prefixed(as_system(s), label) for label, s in parts.items())
    used: set[str] = set()
    for a, b in links:
        for name in (a, b):
            if name in used:
                raise WiringError(f"Port {name!r} is bound twice")
            if name not in merged.exposed:
                raise WiringError(f"Unknown port {name!r} in link ({a}, {b})")
            used.add(name)
        (a_ep, a_port), (b_ep, b_port) = merged.exposed.pop(a), merged.exposed.pop(b)
        if a_port.side is not b_port.side or not a_port.connects_to(b_port):
            raise WiringError(f"Ports {a!r} and {b!r} cannot be linked")
        if a_port.direction is Direction.OUT:
            merged.bindings[a_ep] = b_ep
        else:
            merged.bindings[b_ep] = a_ep
    if expose:
        renamed = {}
        taken = set(expose.values())
        for new, old in expose.items():
            if old not in merged.exposed:
                raise WiringError(f"Cannot expose {old!r}: not a free port")
            ep, port = merged.exposed[old]
            renamed[new] = (ep, replace(port, name=new))
        for name, entry in merged.exposed.items():
            if name not in taken:
                if name in renamed:
                    raise WiringError(f"Free port {name!r} would be exposed twice")
                renamed[name] = entry
        merged.exposed = renamed
    return merged


class ComposedDistinguisher(Distinguisher):
    """A distinguisher with a converter absorbed into it (Dα).

    The converter and the inner distinguisher run in a nested world owned by this box. Messages
    from the system enter the converter's ``side`` ports, the converter's outer ports talk to the
    inner distinguisher, and inner ports the converter does not cover pass straight through.
    Nested events share the run's clock, qubits and transcript; their member keys are
    ``"<key>/<member>"`` and the inner distinguisher is ``"<key>/env"``.

    Raises:
        WiringError: If the converter does not fit the inner distinguisher's ports

    """

    def __init__(self, distinguisher: Distinguisher, converter: System, side: Side) -> None:
        if side is Side.OUTER:
            raise WiringError("Converters attach to the alice or bob interface")
        conv = as_system(converter)
        if ENV in conv.members:
            raise WiringError(f"Member key {ENV!r} is reserved for the distinguisher")
        stray = [n for n, (_, p) in conv.exposed.items() if p.side not in {side, Side.OUTER}]
        if stray:
            raise WiringError(f"Converter ports {stray} face the wrong interface for side {side.value}")
        inner = {p.name: p for p in distinguisher.ports}
        for name, (_, port) in conv.exposed.items():
            peer = inner.get(name)
            if port.side is Side.OUTER and (peer is None or peer.side is not side or not peer.connects_to(port)):
                raise WiringError(f"Converter outer port {name!r} has no matching distinguisher port")
        facing = [p for _, p in conv.exposed.values() if p.side is side]
        passthrough = [p for name, p in inner.items() if name not in conv.exposed]
        super().__init__(distinguisher.name, (*facing, *passthrough))
        self.distinguisher = distinguisher
        self.converter = conv
        self.side = side

    def reset(self) -> None:
        super().reset()
        self._world: _Run | None = None
        self._entry: dict[str, Endpoint] = {}
        self._wakes: set[float] = set()

    def on_start(self, ctx: BoxContext) -> None:
        self._ctx = ctx
        prefix = f"{ctx.key}/"
        inner_key = prefix + ENV
        members: dict[str, Box] = {prefix + k: box for k, box in self.converter.members.items()}
        members[inner_key] = self.distinguisher
        routes = {(prefix + a[0], a[1]): (prefix + b[0], b[1]) for a, b in self.converter.bindings.items()}
        for name, ((key, port_name), port) in self.converter.exposed.items():
            ep = (prefix + key, port_name)
            if port.side is Side.OUTER:
                if port.direction is Direction.OUT:
                    routes[ep] = (inner_key, name)
                else:
                    routes[inner_key, name] = ep
            elif port.direction is Direction.OUT:
                routes[ep] = (OUTSIDE, name)
            else:
                self._entry[name] = ep
        for port in self.ports:
            if port.name in self.converter.exposed:
                continue
            if port.direction is Direction.OUT:
                routes[inner_key, port.name] = (OUTSIDE, port.name)
            else:
                self._entry[port.name] = (inner_key, port.name)
        self._world = ctx.nested(members, routes, self._forward)
        self._world.start()
        self._advance()

    def on_message(self, msg: StampedMessage, ctx: BoxContext) -> None:
        key, port = self._entry[msg.port]
        self._world.deliver(key, replace(msg, port=port))
        self._advance()

    def on_wake(self, ctx: BoxContext) -> None:
        self._wakes.discard(ctx.now)
        self._advance()

    def _forward(self, port: str, payload: Any, point: SpacetimePoint) -> None:
        self._ctx.emit(port, payload, delay=point.t - self._ctx.now)

    def _advance(self) -> None:
        # Nested entries up to the current time run now; the next one gets a wake-up.
        queue = self._world.queue
        while queue and queue[0][0] <= self._ctx.now:
            self._world.step()
        if queue and queue[0][0] not in self._wakes:
            self._wakes.add(queue[0][0])
            self._ctx.wake(queue[0][0])

    def first(self, port: str, default: Any = None) -> Any:
        return self.distinguisher.first(port, default)

    def observation(self) -> tuple:
        return self.distinguisher.observation()

    def decide(self) -> int:
        return self.distinguisher.decide()


def absorb(distinguisher: Distinguisher, converter: System, side: Side) -> ComposedDistinguisher:
    """Absorb ``converter`` (acting on ``side``) into the distinguisher."""
    return ComposedDistinguisher(distinguisher, converter, side)


# =============================================================================
# RUNS
# =============================================================================


def freeze_payload(payload: Any) -> Any:
    """Hashable, concrete form of a payload (forces lazy bits)."""
    if isinstance(payload, LazyBit):
        return int(payload)
    if isinstance(payload, bool):
        return int(payload)
    if isinstance(payload, (frozenset, set)):
        return tuple(sorted(freeze_payload(p) for p in payload))
    if isinstance(payload, (tuple, list)):
        return tuple(freeze_payload(p) for p in payload)
    return payload


def encode_payload(payload: Any) -> Any:
    """JSON-compatible form of a payload."""
    if isinstance(payload, Symbol):
        return {"symbol": payload.value}
    if isinstance(payload, Basis):
        return {"basis": payload.value}
    if isinstance(payload, QubitHandle):
        return {"qubit": payload.index}
    if isinstance(payload, (frozenset, set)):
        return {"set": sorted(freeze_payload(p) for p in payload)}
    if isinstance(payload, (tuple, list)):
        return {"vector": [encode_payload(p) for p in payload]}
    return freeze_payload(payload)


def decode_payload(data: Any) -> Any:
    """Inverse of :func:`encode_payload`."""
    if isinstance(data, dict):
        if "symbol" in data:
            return Symbol(data["symbol"])
        if "basis" in data:
            return Basis(data["basis"])
        if "qubit" in data:
            return QubitHandle(data["qubit"])
        if "set" in data:
            return frozenset(data["set"])
        return tuple(decode_payload(p) for p in data["vector"])
    return data


@dataclass(frozen=True)
class TranscriptEvent:
    """One delivered message."""

    wire: str
    target: str
    payload: Any
    point: SpacetimePoint
    seq: int


@dataclass
class Transcript:
    """Everything that happened in one run, sorted by ``(t, wire, seq)``.

    Attributes:
        events: Delivered messages
        aborted: Per-member abort flags
        audit: Constraint or clause label → whether it held

    """

    events: list[TranscriptEvent] = field(default_factory=list)
    aborted: dict[str, bool] = field(default_factory=dict)
    audit: dict[str, bool] = field(default_factory=dict)
    seed: int | None = None
    trial: int | None = None

    def on_wire(self, wire: str) -> list[TranscriptEvent]:
        """Events whose source wire is ``wire``."""
        return [e for e in self.events if e.wire == wire]

    def to_target(self, target: str) -> list[TranscriptEvent]:
        """Events delivered to ``"<member>.<port>"``."""
        return [e for e in self.events if e.target == target]

    @property
    def audit_passed(self) -> bool:
        """True when every audited constraint and clause held."""
        return all(self.audit.values())

    def to_records(self) -> list[dict]:
        """JSON-lines records, one per event: ``{trial, wire, payload, x, t, seq}``."""
        return [
            {
                "trial": self.trial,
                "wire": e.wire,
                "payload": encode_payload(e.payload),
                "x": list(e.point.x),
                "t": e.point.t,
                "seq": e.seq,
            }
            for e in self.events
        ]

    def metadata(self) -> dict:
        """Run-level record kept beside the events: seed, trial, abort flags, audit and targets."""
        return {
            "seed": self.seed,
            "trial": self.trial,
            "aborted": self.aborted,
            "audit": self.audit,
            "targets": [e.target for e in self.events],
        }

    @staticmethod
    def metadata_path(path: str | Path) -> Path:
        """Sidecar file of a transcript: ``<path>.meta.json``."""
        return Path(f"{path}.meta.json")

    def write_jsonl(self, path: str | Path) -> None:
        """Write the events as JSON lines and :meth:`metadata` to the sidecar file."""
        lines = (json.dumps(r, ensure_ascii=False) + "\n" for r in self.to_records())
        Path(path).write_text("".join(lines), encoding="utf-8")
        meta = json.dumps(self.metadata(), ensure_ascii=False, indent=2)
        self.metadata_path(path).write_text(meta + "\n", encoding="utf-8")

    @classmethod
    def read_jsonl(cls, path: str | Path) -> Transcript:
        """Read a transcript written by :meth:`write_jsonl`.

        Without a sidecar file, targets are left empty and the run metadata is unknown.
        """
        records = [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
        meta_path = cls.metadata_path(path)
        meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
        targets = meta.get("targets") or [""] * len(records)
        events = [
            TranscriptEvent(
                r["wire"], target, decode_payload(r["payload"]), SpacetimePoint(tuple(r["x"]), r["t"]), r["seq"]
            )
            for r, target in zip(records, targets, strict=True)
        ]
        trial = meta.get("trial", records[0]["trial"] if records else None)
        return cls(events, meta.get("aborted", {}), meta.get("audit", {}), meta.get("seed"), trial)


@dataclass(frozen=True)
class RunResult:
    """Distinguisher output and transcript of one run."""

    output: int
    transcript: Transcript


class BoxContext:
    """What a box handler may do: read the clock, draw randomness, emit, abort.

    Attributes:
        key: Member key of the box in the run
        rng: The box's random stream
        qubits: Run-scoped qubit table
        now: Time of the message being handled (0 during ``on_start``)

    """

    def __init__(self, run: _Run, key: str, box: Box, rng: Randomness) -> None:
        self._run = run
        self.key = key
        self.box = box
        self.rng = rng
        self.qubits = run.qubits
        self.now = 0.0
        self.aborted = False
        self.emitted: set[str] = set()
        self.consumed: dict[str, list[SpacetimePoint]] = defaultdict(list)

    @property
    def settings(self) -> Settings:
        """Settings of the current run."""
        return self._run.settings

    def emit(self, port: str, payload: Any, *, delay: float | None = None) -> None:
        """Emit ``payload`` on output ``port`` at ``now + delay``.

        Emissions after the box aborted are dropped.

        Raises:
            WiringError: Unknown or non-output port, or payload of the wrong kind
            CausalityViolation: The stamp is not in the future of a required input (strict runs)

        """
        if self.aborted:
            return
        self._run.emit(self, self.box.port(port), payload, self.settings.emission_delay if delay is None else delay)
        self.emitted.add(port)

    def wake(self, at: float) -> None:
        """Have :meth:`Box.on_wake` called at time ``at``; nothing is delivered or recorded."""
        self._run.wake(self, at)

    def nested(
        self,
        members: dict[str, Box],
        routes: dict[Endpoint, Endpoint],
        outside: Callable[[str, Any, SpacetimePoint], None],
    ) -> _Run:
        """A world stepped by this box, sharing its run's randomness, qubits and transcript.

        Routes whose target key is :data:`OUTSIDE` call ``outside(port, payload, point)``.
        """
        run = self._run
        return _Run(
            members,
            routes,
            run.source,
            run.settings,
            (),
            run.strict,
            qubits=run.qubits,
            transcript=run.transcript,
            outside=outside,
        )

    def abort(self) -> None:
        """Abort: emit ⊥ now on every output not yet used, then go silent."""
        if self.aborted:
            return
        for port in self.box.ports:
            if port.direction is Direction.OUT and port.name not in self.emitted:
                self.emit(port.name, BOTTOM, delay=0)
        self.aborted = True
        self._run.transcript.aborted[self.key] = True


class _Run:
    """State of a single closed-world execution, or of a world nested in a box."""

    def __init__(
        self,
        members: dict[str, Box],
        routes: dict[Endpoint, Endpoint],
        source: RandomSource,
        settings: Settings,
        clauses: Iterable[OrderClause],
        strict: bool,
        *,
        qubits: QubitTable | None = None,
        transcript: Transcript | None = None,
        outside: Callable[[str, Any, SpacetimePoint], None] | None = None,
    ) -> None:
        self.members = members
        self.routes = routes
        self.source = source
        self.settings = settings
        self.clauses = tuple(clauses)
        self.strict = strict
        self.qubits = QubitTable() if qubits is None else qubits
        self.transcript = Transcript() if transcript is None else transcript
        self.outside = outside
        self.queue: list[tuple[float, str, int, str, StampedMessage]] = []
        self.seq: dict[str, int] = defaultdict(int)
        self.processed = 0
        self.contexts = {key: BoxContext(self, key, box, source.stream(key)) for key, box in members.items()}
        self.transcript.aborted.update(dict.fromkeys(members, False))

    def location(self, box: Box, port: Port) -> tuple[float, float, float]:
        side = port.side if port.side is not Side.OUTER else box.party
        if side is None:
            raise WiringError(f"Box {box.name!r} port {port.name!r} has no side to be placed on")
        return box.placement.get(side, self.settings.location(side.value))

    def fail(self, label: str, message: str, cause: tuple | None, effect: tuple | None) -> None:
        self.transcript.audit[label] = False
        if self.strict:
            raise CausalityViolation(message, cause, effect)
        logger.warning("%s", message)

    def emit(self, ctx: BoxContext, port: Port, payload: Any, delay: float) -> None:
        if port.direction is not Direction.OUT:
            raise WiringError(f"{ctx.key}.{port.name} is not an output port")
        if not port.accepts(payload):
            raise WiringError(f"{ctx.key}.{port.name}: payload {payload!r} is not a valid {port.kind.value}")
        wire = f"{ctx.key}.{port.name}"
        point = SpacetimePoint(self.location(ctx.box, port), ctx.now + delay)
        if delay < 0:
            self.fail(wire, f"{wire} emits into the past (delay {delay})", None, (wire, point))
        c = self.settings.speed_of_light
        for constraint in ctx.box.causality:
            if constraint.output != port.name:
                continue
            label = f"{ctx.key}: {constraint}"
            self.transcript.audit.setdefault(label, True)
            for name in constraint.inputs:
                points = ctx.consumed.get(name)
                if not points and not is_abort(payload):
                    self.fail(label, f"{wire} emitted before required input {ctx.key}.{name}", None, (wire, point))
                for earlier in points or ():
                    if not causal_precedes(earlier, point, c):
                        self.fail(
                            label,
                            f"{wire} at {point} is outside the future of {ctx.key}.{name} at {earlier}",
                            (f"{ctx.key}.{name}", earlier),
                            (wire, point),
                        )
        target = self.routes.get((ctx.key, port.name))
        if target is None:
            raise WiringError(f"Output {wire} is not connected")
        if target[0] == OUTSIDE and self.outside is not None:
            self.outside(target[1], payload, point)
            return
        seq = self.seq[wire]
        self.seq[wire] += 1
        msg = StampedMessage(wire, target[1], payload, point, seq)
        heapq.heappush(self.queue, (point.t, wire, seq, target[0], msg))

    def wake(self, ctx: BoxContext, at: float) -> None:
        wire = f"{ctx.key}.{WAKE}"
        seq = self.seq[wire]
        self.seq[wire] += 1
        msg = StampedMessage(wire, WAKE, None, SpacetimePoint((0.0, 0.0, 0.0), at), seq)
        heapq.heappush(self.queue, (at, wire, seq, ctx.key, msg))

    def start(self) -> None:
        for key in sorted(self.members):
            self.members[key].reset()
        for key in sorted(self.members):
            self.members[key].on_start(self.contexts[key])

    def step(self) -> None:
        """Process the earliest queue entry."""
        t, _, _, key, msg = heapq.heappop(self.queue)
        self.processed += 1
        if self.processed > self.settings.event_budget:
            raise RunawayError(f"Run exceeded the event budget of {self.settings.event_budget} messages")
        if msg.port == WAKE:
            ctx = self.contexts[key]
            if not ctx.aborted:
                ctx.now = t
                self.members[key].on_wake(ctx)
            return
        self.transcript.events.append(TranscriptEvent(msg.wire, f"{key}.{msg.port}", msg.payload, msg.point, msg.seq))
        self.deliver(key, msg)

    def deliver(self, key: str, msg: StampedMessage) -> None:
        """Hand ``msg`` to member ``key`` without recording it."""
        ctx = self.contexts[key]
        if ctx.aborted:
            return
        ctx.now = msg.point.t
        ctx.consumed[msg.port].append(msg.point)
        self.members[key].on_message(msg, ctx)

    def execute(self, distinguisher_key: str) -> RunResult:
        self.start()
        while self.queue:
            self.step()
        self.transcript.events.sort(key=lambda e: (e.point.t, e.wire, e.seq))
        self.audit_clauses()
        distinguisher = self.members[distinguisher_key]
        output = int(distinguisher.decide())
        logger.debug("Run finished after %d events, output %d", self.processed, output)
        return RunResult(output, self.transcript)

    def audit_clauses(self) -> None:
        for clause, held in audit_transcript(self.transcript, self.clauses, self.settings.speed_of_light).items():
            self.transcript.audit[clause] = held
            if not held:
                self.fail(clause, f"Ordering clause {clause} violated", None, None)


def audit_transcript(transcript: Transcript, clauses: Iterable[OrderClause], c: float = 1.0) -> dict[str, bool]:
    """Check ordering clauses on a finished transcript.

    A clause holds when every message on its ``after`` wire has at least one message on its
    ``before`` wire and all of those causally precede it. Abort signals (⊥) on the ``after``
    wire are exempt, and clauses whose ``after`` wire carried nothing else hold vacuously.
    """
    result = {}
    for clause in clauses:
        before = [e.point for e in transcript.on_wire(clause.before)]
        after = [e.point for e in transcript.on_wire(clause.after) if not is_abort(e.payload)]
        result[str(clause)] = all(before and all(causal_precedes(b, a, c) for b in before) for a in after)
    return result


def close(system: System, distinguisher: Distinguisher) -> tuple[dict[str, Box], dict[Endpoint, Endpoint]]:
    """Flatten ``system`` closed by ``distinguisher`` into members and routes.

    Raises:
        WiringError: If the distinguisher does not match the free ports exactly

    """
    system = as_system(system)
    if ENV in system.members:
        raise WiringError(f"Member key {ENV!r} is reserved for the distinguisher")
    members = {**system.members, ENV: distinguisher}
    routes = dict(system.bindings)
    d_ports = {p.name: p for p in distinguisher.ports}
    for name, (ep, port) in system.exposed.items():
        d_port = d_ports.pop(name, None)
        if d_port is None:
            raise WiringError(f"Distinguisher has no port for free port {name!r}")
        if d_port.side is not port.side or not d_port.connects_to(port):
            raise WiringError(f"Distinguisher port {name!r} does not match the system's {port}")
        if d_port.direction is Direction.OUT:
            routes[ENV, name] = ep
        else:
            routes[ep] = (ENV, name)
    if d_ports:
        raise WiringError(f"Distinguisher ports {sorted(d_ports)} have no counterpart in the system")
    return members, routes


def run(
    system: System,
    distinguisher: Distinguisher,
    seed: int = 0,
    *,
    trial: int = 0,
    source: RandomSource | None = None,
    settings: Settings | None = None,
    clauses: Iterable[OrderClause] = (),
    strict: bool = True,
) -> RunResult:
    """Execute a closed world until quiescence.

    Args:
        system: Resource, composite or real/ideal system
        distinguisher: Box (or box with absorbed converters) matching the free ports
        seed: Master seed of the per-box Philox streams
        trial: Trial index mixed into every stream
        source: Explicit random source (enumeration tapes); overrides seed/trial
        settings: Geometry and budgets (default: :func:`get_settings`)
        clauses: Ordering clauses audited on the transcript
        strict: Raise on causality violations instead of only recording them

    Returns:
        The distinguisher's bit and the transcript

    Raises:
        CausalityViolation: A declared constraint or clause failed (strict runs)
        RunawayError: The event budget was exhausted

    """
    settings = settings or get_settings()
    members, routes = close(system, distinguisher)
    source = source or SeededSource(seed, trial)
    state = _Run(members, routes, source, settings, clauses, strict)
    if isinstance(source, SeededSource):
        state.transcript.seed, state.transcript.trial = source.seed, source.trial
    return state.execute(ENV)

"""Ports, wiring, composition and the causal event loop."""

import json
from fractions import Fraction

import numpy as np
import pytest

from relbox.distinguishers import (
    AbortDistinguisher,
    ConstantDistinguisher,
    ForwardingDistinguisher,
    ScanningDistinguisher,
)
from relbox.engine import (
    BOTTOM,
    Box,
    Causality,
    Channel,
    Direction,
    Distinguisher,
    Kind,
    OrderClause,
    Port,
    Side,
    Symbol,
    Transcript,
    absorb,
    as_system,
    attach,
    compose,
    is_abort,
    parallel,
    run,
    string_port,
)
from relbox.errors import CausalityViolation, RunawayError, WiringError
from relbox.primitives import OTBox, RabinBox, make_ot, make_rabin, make_rot
from relbox.protocols.base import Relay, port
from relbox.protocols.pi1 import Pi1Alice, Pi1Bob, pi1_cases
from relbox.quantum import QubitHandle
from relbox.settings import Settings
from relbox.spacetime import SpacetimePoint
from relbox.stats.advantage import exact_probability

ALICE, BOB, OUTER = Side.ALICE, Side.BOB, Side.OUTER
IN, OUT = Direction.IN, Direction.OUT


class Quiet(Box):
    def on_message(self, msg, ctx) -> None:
        pass


class Shortcut(Box):
    """Answers at Bob's location faster than light allows."""

    def __init__(self, delay: float = 0.5) -> None:
        super().__init__(
            "shortcut",
            ports=(Port("x", ALICE, IN), Port("y", BOB, OUT)),
            causality=(Causality(("x",), "y"),),
        )
        self.delay = delay

    def on_message(self, msg, ctx) -> None:
        ctx.emit("y", msg.payload, delay=self.delay)


class Eager(Box):
    """Emits its output before the input it declares a dependency on."""

    def __init__(self, payload=1) -> None:
        super().__init__(
            "eager", ports=(Port("x", ALICE, IN), Port("y", ALICE, OUT)), causality=(Causality(("x",), "y"),)
        )
        self.payload = payload

    def on_start(self, ctx) -> None:
        ctx.emit("y", self.payload)

    def on_message(self, msg, ctx) -> None:
        pass


class Quitter(Box):
    """Aborts as soon as its input arrives."""

    def __init__(self) -> None:
        super().__init__(
            "quitter",
            ports=(Port("x", ALICE, IN), Port("y", ALICE, OUT), Port("z", ALICE, OUT)),
            causality=(Causality(("x",), "y"), Causality(("x",), "z")),
        )

    def on_message(self, msg, ctx) -> None:
        ctx.emit("y", msg.payload)
        ctx.abort()
        ctx.emit("z", 1)


class PartialInputs(Distinguisher):
    """Sends only some of the inputs it could send."""

    def __init__(self, ports, inputs) -> None:
        super().__init__("partial", ports)
        self.inputs = inputs

    def inject(self, ctx) -> None:
        for name, value in self.inputs.items():
            ctx.emit(name, value, delay=0)

    def decide(self) -> int:
        return 0


def scan(system, inputs, **kwargs):
    return ScanningDistinguisher.for_system(system, inputs, **kwargs)


class TestPort:
    @pytest.mark.parametrize(
        ("kind", "width", "payload", "expected"),
        [
            (Kind.BIT, 1, 1, True),
            (Kind.BIT, 1, 2, False),
            (Kind.BITSTRING, 3, 7, True),
            (Kind.BITSTRING, 3, 8, False),
            (Kind.SYMBOL, 1, Symbol.OPEN, True),
            (Kind.SYMBOL, 1, "open", False),
            (Kind.INDEX_SET, 1, frozenset({1, 4}), True),
            (Kind.INDEX_SET, 1, {1, 4}, False),
            (Kind.QUBIT, 1, QubitHandle(0), True),
            (Kind.VECTOR, 1, (0, BOTTOM), True),
        ],
    )
    def test_accepts(self, kind, width, payload, expected):
        assert Port("p", ALICE, IN, kind, width).accepts(payload) is expected

    @pytest.mark.parametrize("kind", list(Kind))
    def test_bottom_is_always_accepted(self, kind):
        assert Port("p", BOB, OUT, kind).accepts(BOTTOM)

    def test_string_port(self):
        assert string_port("a", ALICE, IN).kind is Kind.BIT
        assert string_port("a", ALICE, IN, 4) == Port("a", ALICE, IN, Kind.BITSTRING, 4)

    def test_mirrored_ports_connect(self):
        p = Port("a", ALICE, OUT, Kind.BITSTRING, 2)
        assert p.mirrored().direction is IN
        assert p.connects_to(p.mirrored())
        assert not p.connects_to(Port("a", ALICE, IN, Kind.BITSTRING, 3))

    def test_outer_side_has_no_opposite(self):
        assert ALICE.other() is BOB
        with pytest.raises(WiringError):
            OUTER.other()


class TestBox:
    def test_duplicate_port_names_rejected(self):
        with pytest.raises(WiringError, match="duplicate"):
            Quiet("dup", [Port("a", ALICE, IN), Port("a", BOB, OUT)])

    def test_causality_must_go_from_inputs_to_outputs(self):
        with pytest.raises(WiringError):
            Relay("bad", [(port("x", OUTER, OUT), port("y", ALICE, OUT))], party=ALICE)

    def test_unknown_port(self):
        with pytest.raises(WiringError, match="no port"):
            OTBox().port("c")


class TestParallel:
    def test_singleton_is_unchanged(self):
        rabin = RabinBox()
        assert parallel([rabin]).ports == rabin.ports

    def test_many_rabin_boxes_expose_every_port(self):
        system = parallel([make_rabin().honest for _ in range(6)])
        names = [p.name for p in system.ports]
        assert sum(p.direction is IN for p in system.ports) == 6
        assert sum(p.direction is OUT for p in system.ports) == 6
        assert "0.x" in names
        assert "5.out" in names

    def test_labels(self):
        system = parallel([OTBox(), Channel()], labels=["ot", "c"])
        assert {p.name for p in system.ports} == {"ot.a0", "ot.a1", "ot.b", "ot.out", "c.send", "c.recv"}

    def test_label_count_must_match(self):
        with pytest.raises(WiringError):
            parallel([OTBox(), OTBox()], labels=["x"])

    def test_leaf_signature(self):
        ot = OTBox()
        assert as_system(ot).signature() == frozenset(ot.ports)

    def test_same_instance_twice_rejected(self):
        box = OTBox()
        with pytest.raises(WiringError, match="twice"):
            parallel([box, box])

    def test_unfed_part_stays_silent(self, settings):
        system = parallel([make_rabin(1).honest, make_rabin(1).honest])
        d = PartialInputs([p.mirrored() for p in system.ports], {"0.x": 1})
        transcript = run(system, d, settings=settings).transcript
        assert [e.payload for e in transcript.on_wire("0.out")] == [1]
        assert transcript.on_wire("1.out") == []


class TestAttach:
    def test_protocol_exposes_outer_ports(self):
        honest = pi1_cases()[0].real
        assert {p.name for p in honest.ports} == {"a0", "a1", "b", "out"}
        assert honest.port("out").side is BOB

    def test_identity_converter(self, settings):
        forwarder = Relay(
            "fwd",
            [(port("a0", OUTER, IN), port("ot.a0", ALICE, OUT)), (port("a1", OUTER, IN), port("ot.a1", ALICE, OUT))],
            party=ALICE,
        )
        system = attach(forwarder, parallel([OTBox()], labels=["ot"]), ALICE)
        assert {p.name for p in system.ports} == {"a0", "a1", "ot.b", "ot.out"}
        for b in (0, 1):
            d = ForwardingDistinguisher.for_system(system, {"a0": 0, "a1": 1, "ot.b": b}, "ot.out")
            assert run(system, d, settings=settings).output == b

    def test_kind_mismatch_rejected(self):
        with pytest.raises(WiringError):
            attach(Pi1Bob(), make_ot().honest, BOB)

    def test_outer_side_rejected(self):
        with pytest.raises(WiringError):
            attach(Pi1Alice(), OTBox(), OUTER)


class TestCompose:
    def test_round_trip_over_two_channels(self, settings):
        members = {"a": Channel(), "b": Channel(sender=BOB)}
        system = compose(members, [("a.recv", "b.send")], {"ping": "a.send", "pong": "b.recv"})
        assert {p.name for p in system.ports} == {"ping", "pong"}
        transcript = run(system, scan(system, {"ping": 1}), settings=settings).transcript
        (event,) = transcript.on_wire("b.recv")
        assert event.point == SpacetimePoint(settings.alice_location, 2.0)

    def test_sides_must_match(self):
        with pytest.raises(WiringError, match="cannot be linked"):
            compose({"a": Channel(), "b": Channel()}, [("a.recv", "b.send")])

    def test_port_bound_twice(self):
        with pytest.raises(WiringError, match="twice"):
            compose(
                {"a": Channel(), "b": Channel(sender=BOB), "c": Channel(sender=BOB)},
                [("a.recv", "b.send"), ("a.recv", "c.send")],
            )

    def test_unknown_port(self):
        with pytest.raises(WiringError, match="Unknown port"):
            compose({"a": Channel()}, [("a.nope", "a.send")])


class TestRun:
    def test_constant_distinguisher(self):
        ot = OTBox()
        assert run(ot, ConstantDistinguisher.for_system(ot, 1)).output == 1

    def test_one_time_pad_ot_delivers_chosen_bit(self):
        honest = pi1_cases()[0].real
        d = ForwardingDistinguisher.for_system(honest, {"a0": 0, "a1": 1, "b": 1}, "out")
        assert run(honest, d, seed=3).output == 1

    def test_deterministic_per_seed(self):
        system = make_rabin().honest
        first = run(system, scan(system, {"x": 1}), seed=42, trial=5).transcript
        second = run(system, scan(system, {"x": 1}), seed=42, trial=5).transcript
        assert first.events == second.events
        assert (first.seed, first.trial) == (42, 5)

    def test_events_are_sorted(self, settings):
        honest = pi1_cases()[0].real
        events = run(honest, scan(honest, {"a0": 1, "a1": 0, "b": 0}), settings=settings).transcript.events
        keys = [(e.point.t, e.wire, e.seq) for e in events]
        assert keys == sorted(keys)

    def test_faster_than_light_emission_is_fatal(self):
        box = Shortcut()
        with pytest.raises(CausalityViolation) as excinfo:
            run(box, scan(box, {"x": 1}))
        assert excinfo.value.cause[0] == "shortcut.x"
        assert excinfo.value.effect[0] == "shortcut.y"

    def test_lenient_run_records_the_violation(self):
        box = Shortcut()
        result = run(box, scan(box, {"x": 1}), strict=False)
        assert not result.transcript.audit_passed

    def test_light_speed_emission_is_allowed(self):
        box = Shortcut(delay=1.0)
        assert run(box, scan(box, {"x": 1})).transcript.audit_passed

    def test_output_before_input_is_fatal(self):
        box = Eager()
        with pytest.raises(CausalityViolation, match="before required input"):
            run(box, scan(box, {"x": 0}, delays={"x": 5}))

    def test_abort_needs_no_input(self):
        box = Eager(BOTTOM)
        assert run(box, scan(box, {"x": 0}, delays={"x": 5})).transcript.audit_passed

    def test_abort_silences_the_box(self):
        box = Quitter()
        transcript = run(box, scan(box, {"x": 1})).transcript
        assert [e.payload for e in transcript.on_wire("quitter.y")] == [1]
        assert [e.payload for e in transcript.on_wire("quitter.z")] == [BOTTOM]
        assert transcript.aborted["quitter"]

    def test_event_budget(self):
        ot = OTBox()
        with pytest.raises(RunawayError):
            run(ot, scan(ot, {"a0": 0, "a1": 1, "b": 0}), settings=Settings(event_budget=2))

    def test_distinguisher_must_cover_every_port(self):
        ot = OTBox()
        with pytest.raises(WiringError):
            run(ot, ConstantDistinguisher([p.mirrored() for p in ot.ports[:2]]))

    def test_order_clauses_are_audited(self, settings):
        system = compose({"a": Channel(), "b": Channel(sender=BOB)}, [("a.recv", "b.send")])
        d = scan(system, {"a.send": 1})
        held = run(system, d, settings=settings, clauses=[OrderClause("a.recv", "b.recv")])
        assert held.transcript.audit_passed
        with pytest.raises(CausalityViolation):
            run(system, d, settings=settings, clauses=[OrderClause("b.recv", "a.recv")])

    def test_observation_ignores_arrival_times(self):
        system = make_rabin().honest
        early, late = scan(system, {"x": 1}), scan(system, {"x": 1}, delays={"x": 3})
        first, second = run(system, early, seed=4), run(system, late, seed=4)
        assert first.transcript.on_wire("rabin.out")[0].point.t < second.transcript.on_wire("rabin.out")[0].point.t
        assert early.observation() == late.observation()

    def test_transcript_file(self, tmp_path):
        system = make_rabin().honest
        transcript = run(system, scan(system, {"x": 1}), seed=1, trial=3).transcript
        path = tmp_path / "run.jsonl"
        transcript.write_jsonl(path)
        records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
        assert len(records) == len(transcript.events) > 0
        for record, event in zip(records, transcript.events, strict=True):
            assert set(record) == {"trial", "wire", "payload", "x", "t", "seq"}
            assert record["trial"] == 3
            assert record["wire"] == event.wire
            assert record["x"] == list(event.point.x)
            assert record["t"] == event.point.t
        assert Transcript.metadata_path(path).exists()
        loaded = Transcript.read_jsonl(path)
        assert loaded.events == transcript.events
        assert loaded.audit == transcript.audit
        assert (loaded.seed, loaded.trial) == (1, 3)

    def test_transcript_file_without_sidecar(self, tmp_path):
        system = make_rabin().honest
        transcript = run(system, scan(system, {"x": 0}), trial=2).transcript
        path = tmp_path / "run.jsonl"
        transcript.write_jsonl(path)
        Transcript.metadata_path(path).unlink()
        loaded = Transcript.read_jsonl(path)
        assert [e.payload for e in loaded.events] == [e.payload for e in transcript.events]
        assert {e.target for e in loaded.events} == {""}
        assert loaded.trial == 2
        assert loaded.seed is None


def relay_to_out():
    return Relay("bob", [(port("ch.out", BOB, IN), port("out", OUTER, OUT))], party=BOB)


def erasure():
    return parallel([make_rabin().honest], labels=["ch"])


class NoisyRelay(Box):
    """Forwards one port to another, flipping a bit with probability ``q``."""

    def __init__(self, name: str, src: Port, dst: Port, party: Side, q: Fraction) -> None:
        super().__init__(name, ports=(src, dst), causality=(Causality((src.name,), dst.name),), party=party)
        self.dst = dst.name
        self.q = q

    def on_message(self, msg, ctx) -> None:
        if is_abort(msg.payload):
            ctx.emit(self.dst, msg.payload)
        else:
            ctx.emit(self.dst, msg.payload ^ int(ctx.rng.bernoulli(self.q)))


def noisy_converter(side: Side, q: Fraction) -> NoisyRelay:
    if side is BOB:
        return NoisyRelay("bob", port("ch.out", BOB, IN), port("out", OUTER, OUT), BOB, q)
    return NoisyRelay("alice", port("a", OUTER, IN), port("ch.x", ALICE, OUT), ALICE, q)


class TestAbsorb:
    def test_absorbed_converter_matches_attached_converter(self, settings):
        attached = attach(relay_to_out(), erasure(), BOB)
        d = AbortDistinguisher.for_system(attached, {"ch.x": 1}, "out")
        direct = exact_probability(d, attached, settings)
        absorbed = exact_probability(absorb(d, relay_to_out(), BOB), erasure(), settings)
        assert direct == absorbed == Fraction(1, 2)

    def test_absorbed_protocol_side(self, settings):
        honest = pi1_cases()[0].real
        d = ForwardingDistinguisher.for_system(honest, {"a0": 1, "a1": 0, "b": 0}, "out")
        rot = make_rot()
        partial = attach(Pi1Alice(), parallel([rot.honest, Channel(), Channel()], labels=["rot", "c0", "c1"]), ALICE)
        absorbed = exact_probability(absorb(d, Pi1Bob(), BOB), partial, settings)
        assert absorbed == exact_probability(d, honest, settings) == 1

    def test_both_sides_absorbed(self, settings):
        honest = pi1_cases()[0].real
        d = ForwardingDistinguisher.for_system(honest, {"a0": 0, "a1": 1, "b": 1}, "out")
        resource = parallel([make_rot().honest, Channel(), Channel()], labels=["rot", "c0", "c1"])
        twice = absorb(absorb(d, Pi1Bob(), BOB), Pi1Alice(), ALICE)
        assert exact_probability(twice, resource, settings) == 1

    def test_run_never_attaches(self, settings, monkeypatch):
        attached = attach(relay_to_out(), erasure(), BOB)
        d = absorb(AbortDistinguisher.for_system(attached, {"ch.x": 1}, "out"), relay_to_out(), BOB)

        def refuse(*args, **kwargs):
            raise AssertionError("attach called during a run")

        monkeypatch.setattr("relbox.engine.attach", refuse)
        assert run(erasure(), d, seed=3, settings=settings).output in (0, 1)

    def test_nested_events_are_recorded(self, settings):
        attached = attach(relay_to_out(), erasure(), BOB)
        d = absorb(AbortDistinguisher.for_system(attached, {"ch.x": 1}, "out"), relay_to_out(), BOB)
        transcript = run(erasure(), d, seed=0, settings=settings).transcript
        [relayed] = transcript.on_wire("env/bob.out")
        [received] = transcript.on_wire("ch.out")
        assert relayed.target == "env/env.out"
        assert relayed.payload == received.payload
        assert relayed.point.t == received.point.t + settings.emission_delay
        assert transcript.audit_passed

    def test_random_converters(self, settings):
        rng = np.random.default_rng(19)
        for _ in range(20):
            p, q = (Fraction(int(rng.integers(0, 5)), 4) for _ in range(2))
            side = BOB if rng.integers(2) else ALICE
            x = int(rng.integers(2))
            resource = parallel([RabinBox(p)], labels=["ch"])
            attached = attach(noisy_converter(side, q), resource, side)
            inputs, watched = ({"ch.x": x}, "out") if side is BOB else ({"a": x}, "ch.out")
            if rng.integers(2):
                d, expected = AbortDistinguisher.for_system(attached, inputs, watched), 1 - p
            else:
                d = ForwardingDistinguisher.for_system(attached, inputs, watched)
                expected = p * (q if x == 0 else 1 - q)
            direct = exact_probability(d, attached, settings)
            absorbed = exact_probability(absorb(d, noisy_converter(side, q), side), resource, settings)
            assert direct == absorbed == expected

    def test_absorbed_ports_face_the_system(self):
        d = ConstantDistinguisher.for_system(pi1_cases()[0].real)
        absorbed = absorb(d, Pi1Bob(), BOB)
        assert {p.name for p in absorbed.ports} == {"a0", "a1", "rot.b", "rot.sb", "c0.recv", "c1.recv"}
        assert absorbed.port("rot.sb").direction is IN

    def test_converter_must_fit(self):
        d = ConstantDistinguisher.for_system(pi1_cases()[0].real)
        stray = Relay("bob", [(port("ch.out", BOB, IN), port("res", OUTER, OUT))], party=BOB)
        with pytest.raises(WiringError):
            absorb(d, stray, BOB)
        with pytest.raises(WiringError):
            absorb(d, Pi1Bob(), OUTER)

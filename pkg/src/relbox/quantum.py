"""Symbolic BB84 qubits.

Only the four BB84 states are ever prepared, so a state is fully described by its bit and basis.
Measuring in the preparation basis returns the bit; measuring in the conjugate basis returns a
fresh uniform bit. A state can be measured once: afterwards it is consumed.

Bases are given either as :class:`Basis` members or as basis bits (0 → Z, 1 → X). Basis bits may
be lazy, in which case comparing preparation and measurement bases costs a single branch under
exact enumeration.

Qubits travel through the engine as :class:`QubitHandle` payloads. The run-scoped
:class:`QubitTable` owns the states, so copying a handle never clones a qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any

from .errors import QubitUsageError

if TYPE_CHECKING:
    from .randomness import Randomness


class Basis(str, Enum):
    """Measurement bases: computational (Z, rectilinear) and Hadamard (X, diagonal)."""

    Z = "Z"
    X = "X"

    @classmethod
    def from_bit(cls, bit: Any) -> Basis:
        """Map 0 → Z and 1 → X (forces lazy bits)."""
        return cls.X if bit else cls.Z

    def to_bit(self) -> int:
        """Inverse of :meth:`from_bit`."""
        return int(self is Basis.X)

    def conjugate(self) -> Basis:
        """The other basis."""
        return Basis.Z if self is Basis.X else Basis.X


BasisLike = Any  # Basis, basis name or basis bit


def basis_bit(basis: BasisLike) -> Any:
    """Basis bit of a :class:`Basis`, a basis name or an (optionally lazy) bit."""
    if isinstance(basis, str):
        return Basis(basis).to_bit()
    return basis


@dataclass
class BB84State:
    """A prepared qubit; ``consumed`` becomes True after its single measurement."""

    bit: Any
    basis: Any
    consumed: bool = False


@dataclass(frozen=True)
class QubitHandle:
    """Opaque reference to a qubit in the current run's table."""

    index: int


def prepare(bit: Any, basis: BasisLike) -> BB84State:
    """Prepare |bit⟩ in ``basis``."""
    return BB84State(bit, basis_bit(basis))


def measure(state: BB84State, basis: BasisLike, rng: Randomness) -> Any:
    """Measure a state, consuming it.

    Raises:
        QubitUsageError: If the state was already measured

    """
    if state.consumed:
        raise QubitUsageError("Qubit already measured")
    state.consumed = True
    if state.basis == basis_bit(basis):
        return state.bit
    return rng.bit()


class QubitTable:
    """Run-scoped owner of every prepared qubit."""

    def __init__(self) -> None:
        self._states: list[BB84State] = []

    def register(self, state: BB84State) -> QubitHandle:
        """Store a state and return its handle."""
        self._states.append(state)
        return QubitHandle(len(self._states) - 1)

    def prepare(self, bit: Any, basis: BasisLike) -> QubitHandle:
        """Prepare and register in one step."""
        return self.register(prepare(bit, basis))

    def measure(self, handle: QubitHandle, basis: BasisLike, rng: Randomness) -> Any:
        """Measure the state behind ``handle``.

        Raises:
            QubitUsageError: If the handle is unknown or already measured

        """
        if not isinstance(handle, QubitHandle) or not 0 <= handle.index < len(self._states):
            raise QubitUsageError(f"Unknown qubit handle {handle!r}")
        return measure(self._states[handle.index], basis, rng)

    def __len__(self) -> int:
        return len(self._states)

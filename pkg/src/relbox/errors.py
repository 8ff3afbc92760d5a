"""Exception hierarchy for relbox.

Every error raised on purpose by the package derives from :class:`RelboxError`, so callers can
catch the whole family at once. Parameter problems additionally derive from :class:`ValueError`
and unknown registry labels from :class:`KeyError`, which keeps them usable with generic
handlers.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .spacetime import SpacetimePoint


class RelboxError(Exception):
    """Base class for all relbox errors."""


class InputError(RelboxError, ValueError):
    """A parameter is outside its documented domain (non-finite coordinate, |v| >= c, odd n ...)."""


class PosetSizeError(InputError):
    """A finite poset is larger than the configured enumeration limit."""


class WiringError(RelboxError):
    """Ports cannot be connected: name, side, direction or kind mismatch, or a port bound twice."""


class CausalityViolation(RelboxError):
    """A message was emitted at a point not in the causal future of an input it depends on.

    Attributes:
        cause: Label and point of the input message (``None`` when the input never arrived)
        effect: Label and point of the offending emission

    """

    def __init__(
        self,
        message: str,
        cause: tuple[str, SpacetimePoint] | None = None,
        effect: tuple[str, SpacetimePoint] | None = None,
    ) -> None:
        super().__init__(message)
        self.cause = cause
        self.effect = effect


class RunawayError(RelboxError):
    """A run exceeded its event budget without reaching quiescence."""


class EnumerationSizeError(RelboxError):
    """Exact enumeration would visit more leaves than the configured limit."""


class ProtocolOrderError(RelboxError):
    """A box received a message its protocol does not allow at this point (open before commit ...)."""


class QubitUsageError(RelboxError):
    """A qubit handle was measured twice or is unknown to the run's qubit table."""


class UnknownTargetError(RelboxError, KeyError):
    """A case, attack or theorem label is not registered."""

    def __init__(self, label: Any, known: list[str] | None = None) -> None:
        hint = f"; known labels: {', '.join(known)}" if known else ""
        super().__init__(f"Unknown label {label!r}{hint}")
        self.label = label

    def __str__(self) -> str:
        """Return the plain message (KeyError would repr() it)."""
        return str(self.args[0])

"""Executable checks of the difference and statistical-separation lemmas.

A joint table maps outcome triples ``(x, y, z)`` of three events X, Y, Z to their probability.
The checks report :attr:`LemmaCheck.NOT_APPLICABLE` when the table does not meet the lemma's
hypotheses instead of raising.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from enum import Enum
from fractions import Fraction

from ..errors import InputError

JointTable = Mapping[tuple[bool, bool, bool], Fraction]


class LemmaCheck(str, Enum):
    """Outcome of a lemma check."""

    HOLDS = "holds"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"

    def __bool__(self) -> bool:
        return self is LemmaCheck.HOLDS


def _validate(table: JointTable) -> None:
    if any(p < 0 for p in table.values()) or sum(table.values(), Fraction(0)) != 1:
        raise InputError("Joint table must be a probability distribution")


def _mass(table: JointTable, predicate: Callable[[bool, bool, bool], bool]) -> Fraction:
    return sum((p for key, p in table.items() if predicate(*key)), Fraction(0))


def marginals(table: JointTable) -> tuple[Fraction, Fraction, Fraction]:
    """P(X), P(Y), P(Z)."""
    return (
        _mass(table, lambda x, _y, _z: x),
        _mass(table, lambda _x, y, _z: y),
        _mass(table, lambda _x, _y, z: z),
    )


def assert_difference_lemma(table: JointTable) -> LemmaCheck:
    """If P(X ∩ ¬Z) = P(Y ∩ ¬Z), then |P(X) − P(Y)| ≤ P(Z).

    Raises:
        InputError: If the table is not a distribution

    """
    _validate(table)
    if _mass(table, lambda x, _y, z: x and not z) != _mass(table, lambda _x, y, z: y and not z):
        return LemmaCheck.NOT_APPLICABLE
    p_x, p_y, p_z = marginals(table)
    return LemmaCheck.HOLDS if abs(p_x - p_y) <= p_z else LemmaCheck.VIOLATED


def assert_separation_lemma(table: JointTable) -> LemmaCheck:
    """If Z ⊆ X and X ∩ Y = ∅, then |P(Z | X) − P(Z | Y)| ≥ P(Z).

    Conditionals on a null event are taken as 0.

    Raises:
        InputError: If the table is not a distribution

    """
    _validate(table)
    if _mass(table, lambda x, _y, z: z and not x) or _mass(table, lambda x, y, _z: x and y):
        return LemmaCheck.NOT_APPLICABLE
    p_x, p_y, p_z = marginals(table)
    z_given_x = _mass(table, lambda x, _y, z: x and z) / p_x if p_x else Fraction(0)
    z_given_y = _mass(table, lambda _x, y, z: y and z) / p_y if p_y else Fraction(0)
    return LemmaCheck.HOLDS if abs(z_given_x - z_given_y) >= p_z else LemmaCheck.VIOLATED

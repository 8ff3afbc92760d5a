"""The six constructions and their simulators, addressable by case label (``"pi4.dB"``)."""

from __future__ import annotations

import inspect
import logging
from collections.abc import Callable
from typing import Any

from ..errors import UnknownTargetError
from .base import CONDITIONS, ConstructionCase, evaluate_case
from .pi1 import pi1_cases
from .pi2 import pi2_cases
from .pi3 import pi3_cases
from .pi4 import pi4_cases
from .pi5 import pi5_cases
from .pi6 import pi6_cases

logger = logging.getLogger(__name__)

CONSTRUCTIONS: dict[str, Callable[..., list[ConstructionCase]]] = {
    "pi1": pi1_cases,
    "pi2": pi2_cases,
    "pi3": pi3_cases,
    "pi4": pi4_cases,
    "pi5": pi5_cases,
    "pi6": pi6_cases,
}


def case_labels() -> list[str]:
    """Every registered case label."""
    return [f"{name}.{condition}" for name in CONSTRUCTIONS for condition in CONDITIONS]


def get_cases(name: str, **params: Any) -> list[ConstructionCase]:
    """Build the three cases of construction ``name``.

    Parameters the construction does not take (e.g. ``k`` for ``pi1``) are ignored, so the CLI
    can pass its full parameter set.

    Raises:
        UnknownTargetError: If ``name`` is not a registered construction
        InputError: If a parameter violates the construction's preconditions

    """
    try:
        factory = CONSTRUCTIONS[name]
    except KeyError:
        raise UnknownTargetError(name, sorted(CONSTRUCTIONS)) from None
    accepted = inspect.signature(factory).parameters
    used = {key: value for key, value in params.items() if key in accepted}
    logger.debug("Building %s with %s", name, used)
    return factory(**used)


def get_case(label: str, **params: Any) -> ConstructionCase:
    """Build a single case by label, e.g. ``get_case("pi4.honest", k=4)``.

    Raises:
        UnknownTargetError: If ``label`` is not a registered case

    """
    name, _, condition = label.partition(".")
    if name not in CONSTRUCTIONS or condition not in CONDITIONS:
        raise UnknownTargetError(label, case_labels())
    return next(case for case in get_cases(name, **params) if case.condition == condition)


__all__ = [
    "CONSTRUCTIONS",
    "ConstructionCase",
    "case_labels",
    "evaluate_case",
    "get_case",
    "get_cases",
    "pi1_cases",
    "pi2_cases",
    "pi3_cases",
    "pi4_cases",
    "pi5_cases",
    "pi6_cases",
]

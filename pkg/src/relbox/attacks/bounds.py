"""Attack probabilities from the impossibility arguments and the ε thresholds they imply.

The chain R_B·σ_BA·R_A sits within 3ε of the honest resource whenever both one-sided
simulators achieve ε, so an attack probability ``bound`` rules out every ε below ``bound / 3``.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..errors import InputError, UnknownTargetError
from ..randomness import to_fraction

THEOREMS = ("rot", "ot", "rabin", "and", "or")


def _string_factor(s: float) -> Fraction:
    if math.isinf(s):
        return Fraction(1)
    if s < 1 or not float(s).is_integer():
        raise InputError(f"String length must be a positive integer or inf, got {s}")
    return 1 - Fraction(1, 2 ** int(s))


def impossibility_bound(theorem: str, p: float | Fraction = Fraction(1, 2), s: float = 1) -> Fraction:
    """Probability with which the theorem's distinguisher catches every chained simulator.

    ``rot``/``ot``: ½(1 − 2^{−s}); ``rabin``: (1 − 2^{−s})·p(1 − p); ``and``/``or``: ¼.
    ``s = inf`` gives the long-string limit.

    Raises:
        UnknownTargetError: On an unknown theorem id
        InputError: On p outside [0, 1] or an invalid string length

    """
    if theorem not in THEOREMS:
        raise UnknownTargetError(theorem, list(THEOREMS))
    if theorem in ("and", "or"):
        return Fraction(1, 4)
    if theorem == "rabin":
        q = to_fraction(p)
        return _string_factor(s) * q * (1 - q)
    return Fraction(1, 2) * _string_factor(s)


def threshold(theorem: str, p: float | Fraction = Fraction(1, 2), s: float = 1) -> Fraction:
    """Smallest ε the theorem leaves open: no construction achieves ε below this."""
    return impossibility_bound(theorem, p, s) / 3


def constructible(theorem: str, p: float | Fraction = Fraction(1, 2)) -> bool:
    """True when the theorem says nothing: Rabin OT with p ∈ {0, 1} is trivially constructible."""
    return theorem == "rabin" and to_fraction(p) in (0, 1)

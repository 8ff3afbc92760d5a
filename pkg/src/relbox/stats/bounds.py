"""Exact tail oracles and the concentration bounds used by the security proofs.

Tails are computed with :class:`~fractions.Fraction` arithmetic so that claimed ε values can be
compared with enumerated advantages by plain equality. The Chernoff and Hoeffding helpers return
floats; scipy provides float cross-checks of the exact tails.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Literal

from scipy import stats as sps

from ..errors import InputError
from ..randomness import to_fraction

TailMode = Literal["lt", "le", "ge", "gt"]

THREE_QUARTERS = Fraction(3, 4)


def _in_tail(j: int, k: int, mode: TailMode) -> bool:
    if mode == "lt":
        return j < k
    if mode == "le":
        return j <= k
    if mode == "ge":
        return j >= k
    if mode == "gt":
        return j > k
    raise InputError(f"Unknown tail mode {mode!r}; use lt, le, ge or gt")


def binomial_pmf(n: int, p: float | Fraction, j: int) -> Fraction:
    """Exact P[Binom(n, p) = j]."""
    q = to_fraction(p)
    if not 0 <= j <= n:
        return Fraction(0)
    return math.comb(n, j) * q**j * (1 - q) ** (n - j)


def binomial_tail(n: int, p: float | Fraction, k: int, mode: TailMode = "lt") -> Fraction:
    """Exact binomial tail, e.g. ``binomial_tail(3, 1/2, 1, "lt") == P[Binom(3, 1/2) < 1] == 1/8``.

    Args:
        n: Number of trials (≥ 0)
        p: Success probability in [0, 1] (floats are converted to fractions)
        k: Threshold, 0 ≤ k ≤ n + 1
        mode: ``"lt"``, ``"le"``, ``"ge"`` or ``"gt"``

    Raises:
        InputError: On out-of-range arguments

    """
    if n < 0 or not 0 <= k <= n + 1:
        raise InputError(f"Binomial tail needs n ≥ 0 and 0 ≤ k ≤ n + 1, got n={n}, k={k}")
    return sum((binomial_pmf(n, p, j) for j in range(n + 1) if _in_tail(j, k, mode)), Fraction(0))


def hypergeometric_pmf(n: int, x: int, h: int, z: int) -> Fraction:
    """Exact P[Z = z] when h of n items are drawn without replacement and x items are marked."""
    if not (0 <= x <= n and 0 <= h <= n):
        raise InputError(f"Hypergeometric parameters need 0 ≤ x, h ≤ n, got n={n}, x={x}, h={h}")
    if not max(0, h - (n - x)) <= z <= min(x, h):
        return Fraction(0)
    return Fraction(math.comb(x, z) * math.comb(n - x, h - z), math.comb(n, h))


def hypergeometric_tail(n: int, x: int, h: int, z: int, mode: TailMode = "le") -> Fraction:
    """Exact tail of the number of marked items among the h drawn (see :func:`hypergeometric_pmf`)."""
    return sum((hypergeometric_pmf(n, x, h, j) for j in range(min(x, h) + 1) if _in_tail(j, z, mode)), Fraction(0))


def binomial_tail_float(n: int, p: float, k: int, mode: TailMode = "lt") -> float:
    """scipy evaluation of :func:`binomial_tail`, for cross-checks at large n."""
    dist = sps.binom(n, p)
    return float({"lt": dist.cdf(k - 1), "le": dist.cdf(k), "ge": dist.sf(k - 1), "gt": dist.sf(k)}[mode])


def hypergeometric_tail_float(n: int, x: int, h: int, z: int, mode: TailMode = "le") -> float:
    """scipy evaluation of :func:`hypergeometric_tail`."""
    dist = sps.hypergeom(n, x, h)
    return float({"lt": dist.cdf(z - 1), "le": dist.cdf(z), "ge": dist.sf(z - 1), "gt": dist.sf(z)}[mode])


def chernoff_upper(mu: float, delta: float, side: Literal["upper", "lower"] = "upper") -> float:
    """Simplified Chernoff bound.

    ``side="upper"`` bounds P[X ≥ (1 + δ)μ] by e^{−δ²μ/3} (for 0 ≤ δ ≤ 1); ``side="lower"``
    bounds P[X ≤ (1 − δ)μ] by e^{−δ²μ/2}.

    Raises:
        InputError: If μ ≤ 0 or δ < 0

    """
    if mu <= 0 or delta < 0:
        raise InputError(f"Chernoff bound needs mu > 0 and delta ≥ 0, got mu={mu}, delta={delta}")
    if side not in {"upper", "lower"}:
        raise InputError(f"side must be 'upper' or 'lower', got {side!r}")
    return math.exp(-(delta**2) * mu / (3 if side == "upper" else 2))


def hoeffding_hypergeometric(n: int, x: int, h: int, t: float) -> float:
    """Hoeffding bound for draws without replacement: P[Z ≤ (x/n − t)·h] ≤ e^{−2t²h}.

    Raises:
        InputError: Unless 0 ≤ x ≤ n, 0 ≤ h ≤ n and 0 < t < x/n

    """
    if not (0 <= x <= n and 0 <= h <= n):
        raise InputError(f"Need 0 ≤ x, h ≤ n, got n={n}, x={x}, h={h}")
    if not 0 < t < x / n:
        raise InputError(f"Need 0 < t < x/n = {x / n}, got t={t}")
    return math.exp(-2 * t**2 * h)


# =============================================================================
# PROTOCOL-SPECIFIC QUANTITIES
# =============================================================================


def rabin_ot_abort_probability(k: int) -> Fraction:
    """Honest abort of the Rabin-to-OT protocol: fewer than k of 3k transfers arrive."""
    return binomial_tail(3 * k, Fraction(1, 2), k, "lt")


def rabin_ot_both_known_probability(k: int) -> Fraction:
    """At least 2k of 3k transfers arrive, so Bob can know both index sets."""
    return binomial_tail(3 * k, Fraction(1, 2), 2 * k, "ge")


def rabin_ot_envelopes(k: int) -> tuple[float, float]:
    """Chernoff envelopes (abort, both-known) with μ = 3k/2 and δ = 1/3."""
    mu = 1.5 * k
    return chernoff_upper(mu, 1 / 3, "lower"), chernoff_upper(mu, 1 / 3, "upper")


def quantum_ot_abort_probability(n: int) -> Fraction:
    """Honest abort of the BB84 protocol: fewer than k/3 of the k = n/2 untested bases agree."""
    k = n // 2
    return binomial_tail(k, Fraction(1, 2), math.ceil(Fraction(k, 3)), "lt")


def quantum_ot_both_known_probability(n: int) -> Fraction:
    """At least 2k/3 of the untested bases agree, so an honest-measuring Bob knows both intervals."""
    k = n // 2
    return binomial_tail(k, Fraction(1, 2), math.ceil(Fraction(2 * k, 3)), "ge")


def quantum_ot_envelopes(n: int) -> tuple[float, float]:
    """Chernoff envelopes (abort, both-known) with μ = k/2 and δ = 1/3."""
    mu = n / 4
    return chernoff_upper(mu, 1 / 3, "lower"), chernoff_upper(mu, 1 / 3, "upper")


def pi5_cheat_pass_probability(n: int, h: int, x: int) -> Fraction:
    """Exact test-pass probability of a Bob who leaves x of n states unmeasured.

    Each unmeasured state that lands in the test set is caught with probability 1/4, so the pass
    probability is Σ_z P[Z = z]·(3/4)^z with Z the hypergeometric number of unmeasured tested states.
    """
    return sum((hypergeometric_pmf(n, x, h, z) * THREE_QUARTERS**z for z in range(min(x, h) + 1)), Fraction(0))


def pi5_cheat_bound(n: int, h: int, x: int) -> float:
    """Envelope P[Z ≤ xh/2n] + (3/4)^{xh/2n} dominating :func:`pi5_cheat_pass_probability`."""
    threshold = x * h / (2 * n)
    return float(hypergeometric_tail(n, x, h, math.floor(threshold), "le")) + 0.75**threshold

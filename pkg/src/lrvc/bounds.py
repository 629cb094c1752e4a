"""Closed-form round bounds and the lower-bound arithmetic of Kuhn et al.

``round_bound`` is the per-vertex iteration bound ``K/eps' + log d / log K``.
The ``kmw_*`` and ``feasible_k_*`` helpers work in log2 space: ``n`` and
``Delta`` in a lower-bound construction are astronomically large, so they
are passed as ``log2 n`` and ``log2 Delta``. All logarithms are base 2;
changing the base rescales the feasibility inequalities by a constant
that can be folded into ``eps``.

Note that the ``delta`` returned here is an approximation-ratio quantity
of the lower-bound construction, unrelated to edge payments.
"""

from __future__ import annotations

import math


from ._rational import Q, Rational, as_fraction
from .protocol import exact_log2, kv_parameter


def _log2(x: Q | float) -> Q | float:
    if isinstance(x, Q) and x.denominator == 1:
        k = exact_log2(x.numerator)
        if k is not None:
            return Q(k)
    return math.log2(x)


def round_bound(d: int, eps: Rational) -> Q | float:
    """Iterations within which a vertex of degree ``d`` must return.

    Exact (a Q) whenever every logarithm involved is an integer.
    """
    if d < 1:
        raise ValueError(f"round bound undefined for degree {d}")
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    eps_p = eps / (2 + eps)
    k = kv_parameter(d)
    first = k / eps_p
    if d == 1:
        return first
    lg_d = _log2(Q(d))
    lg_k = _log2(k)
    return first + lg_d / lg_k


def iteration_cap(d: int, eps: Rational) -> int:
    """``ceil(round_bound) + 1``: the per-vertex cap asserted on simultaneous runs."""
    return int(math.ceil(round_bound(d, eps))) + 1


def asymptotic_envelope(d: int, eps: Rational, c: int = 16) -> float:
    """``c * log2 d / (eps * log2 log2 d)`` for ``d > 16``."""
    if d <= 16:
        raise ValueError("envelope only defined for d > 16")
    lg = math.log2(d)
    return c * lg / (float(as_fraction(eps)) * math.log2(lg))


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")


def kmw_delta_from_n(log2n: Rational, k: int) -> Q:
    """log2 of the ratio forced by ``n <= 2^(2k^3+4k) * delta^(4k^2)``."""
    _check_k(k)
    log2n = as_fraction(log2n)
    if log2n <= 0:
        raise ValueError("log2n must be positive")
    return log2n * (Q(1, 4 * k * k) - Q(2 * k**3 + 4 * k, 4 * k * k) / log2n)


def kmw_delta_from_Delta(log2Delta: Rational, k: int) -> Q:
    """log2 of the ratio forced by ``Delta = 2^(k(k+1)/2) * delta^(k+1)``."""
    _check_k(k)
    log2Delta = as_fraction(log2Delta)
    if log2Delta <= 0:
        raise ValueError("log2Delta must be positive")
    return log2Delta / (k + 1) - Q(k, 2)


def feasible_k_n(eps: Rational, log2n: Rational) -> int:
    """Largest ``k >= 1`` with ``2k^3 + 4k <= 4 eps log2 n``; 0 when there is none."""
    lim = 4 * as_fraction(eps) * as_fraction(log2n)
    k = 0
    while 2 * (k + 1) ** 3 + 4 * (k + 1) <= lim:
        k += 1
    return k


def feasible_k_Delta(eps: Rational, log2Delta: Rational) -> int:
    """Largest ``k >= 1`` with ``k(k+1) <= 2 eps log2 Delta``; 0 when there is none."""
    lim = 2 * as_fraction(eps) * as_fraction(log2Delta)
    k = 0
    while (k + 1) * (k + 2) <= lim:
        k += 1
    return k


def bounds_table(
    k_values: range,
    eps: Rational,
    log2n: Rational | None = None,
    log2Delta: Rational | None = None,
) -> list[dict]:
    """Rows of log2 delta and feasibility for each k, for the ``bounds`` command."""
    from ._rational import fmt

    rows = []
    kn = feasible_k_n(eps, log2n) if log2n is not None else None
    kd = feasible_k_Delta(eps, log2Delta) if log2Delta is not None else None
    for k in k_values:
        row: dict = {"k": k}
        if log2n is not None:
            val = kmw_delta_from_n(log2n, k)
            row.update(log2_delta_n=fmt(val), log2_delta_n_float=float(val), feasible_n=k <= kn)
        if log2Delta is not None:
            val = kmw_delta_from_Delta(log2Delta, k)
            row.update(log2_delta_Delta=fmt(val), log2_delta_Delta_float=float(val), feasible_Delta=k <= kd)
        rows.append(row)
    return rows

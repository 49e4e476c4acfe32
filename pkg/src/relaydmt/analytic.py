"""Closed-form diversity-multiplexing tradeoff curves for every protocol.

Rational breakpoints are computed exactly with Fractions and converted to
floats once; irrational breakpoints (the critical phase ratios) are floats
compared at 1e-12.  All curves clamp d at zero.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .curves import (
    PiecewiseLinearCurve,
    check_multiplexing_gain,
    max_abs_difference,
    pointwise_max,
    pointwise_min,
    uniform_grid,
)

_VARIABLE_GRID = 1000  # breakpoints per unit r for the curved variable-protocol branches


def _check_n(n: int, minimum: int = 2) -> int:
    n = int(n)
    if n < minimum:
        raise ValueError(f"need n >= {minimum}, got {n}")
    return n


def _check_pq(p: int, q: int):
    p, q = int(p), int(q)
    if q < 1 or p < q:
        raise ValueError(f"fixed protocols require p >= q >= 1, got p={p}, q={q}")
    return p, q


def _curve(points) -> PiecewiseLinearCurve:
    return PiecewiseLinearCurve(tuple((float(r), float(d)) for r, d in points))


def transmit_diversity_bound(n: int) -> PiecewiseLinearCurve:
    """n-antenna reference d(r) = n(1 - r); no (n-1)-relay protocol exceeds it."""
    n = _check_n(n)
    return _curve([(0, n), (1, 0)])


def oaf_optimal_dmt(n: int) -> PiecewiseLinearCurve:
    """Best tradeoff over the amplify-and-forward class:
    d(r) = n - (2n-1)r on [0, 1/2], then 1 - r."""
    n = _check_n(n)
    return _curve([(0, n), (Fraction(1, 2), Fraction(1, 2)), (1, 0)])


def naf_dmt(n: int) -> PiecewiseLinearCurve:
    """Non-orthogonal AF tradeoff d(r) = (1-r)+ + (n-1)(1-2r)+."""
    n = _check_n(n)
    return _curve([(0, n), (Fraction(1, 2), Fraction(1, 2)), (1, 0)])


def oaf_upper_bound(n: int, p: int, q: int) -> PiecewiseLinearCurve:
    """Tradeoff bound for an orthogonal AF protocol with phase lengths (p, q).

    Two regimes split at p/m = n/(2n-1); q = 0 is the non-cooperative source,
    d(r) = (1-r)+.  Cooperation is abandoned wherever direct transmission is
    better, so the bound never drops below 1 - r.
    """
    n = _check_n(n)
    p, q = int(p), int(q)
    if p < 1 or q < 0:
        raise ValueError(f"need p >= 1 and q >= 0, got p={p}, q={q}")
    if q == 0:
        return _curve([(0, 1), (1, 0)])
    m = p + q
    if p * (2 * n - 1) >= n * m:  # p/m >= n/(2n-1); implies p > q
        qm = Fraction(q, m)
        return _curve([(0, n), (qm, 1), (Fraction(1, 2), Fraction(1, 2)), (1, 0)])
    rc = Fraction((n - 1) * p, n * m - p)
    return _curve([(0, n), (rc, 1 - rc), (1, 0)])


def nsdf_kappa_n(n: int) -> float:
    """Critical phase ratio for non-orthogonal selection DF:
    the positive root of (n-1)k^2 - k - (n-1) = 0."""
    n = _check_n(n)
    return (1.0 + math.sqrt(1.0 + 4.0 * (n - 1) ** 2)) / (2.0 * (n - 1))


def osdf_kappa_n(n: int) -> float:
    """Critical phase ratio for orthogonal selection DF: n/(n-1)."""
    n = _check_n(n)
    return n / (n - 1)


def _nsdf_da_curve(n, p, q) -> PiecewiseLinearCurve:
    # relay-set-empty route: (n-1)(1 - mr/p)+ + (1-r)+
    m = p + q
    pm = Fraction(p, m)
    return _curve([(0, n), (pm, 1 - pm), (1, 0)])


def _nsdf_db_curve(n, p, q) -> PiecewiseLinearCurve:
    # all-relays route: n - (n-1)mr/q on [0, q/m], then (m/p)(1-r)
    m = p + q
    qm = Fraction(q, m)
    return _curve([(0, n), (qm, 1), (1, 0)])


def _assert_matches(published: PiecewiseLinearCurve, composed: PiecewiseLinearCurve, what: str):
    err = max_abs_difference(published, composed, uniform_grid(101))
    if err > 1e-9:
        raise AssertionError(f"{what}: composed curve deviates from piecewise form by {err:.3e}")


def nsdf_fixed_dmt(n: int, p: int, q: int) -> PiecewiseLinearCurve:
    """Tradeoff of non-orthogonal selection DF with fixed phase lengths (p, q).

    Below the critical ratio the empty-relay route dominates; above it the
    curve switches between routes at r = (np-m)/((n-2)m+p).  Past r = p/m no
    relay decodes and the curve is (1-r)+.
    """
    n = _check_n(n)
    p, q = _check_pq(p, q)
    m = p + q
    # kappa <= kappa_n  <=>  (n-1)p^2 - pq - (n-1)q^2 <= 0 (exact integer test)
    if (n - 1) * p * p - p * q - (n - 1) * q * q <= 0:
        curve = _curve([(0, n), (Fraction(p, m), Fraction(q, m)), (1, 0)])
    else:
        rstar = Fraction(n * p - m, (n - 2) * m + p)
        dstar = Fraction(m, p) * (1 - rstar)
        curve = _curve([
            (0, n),
            (Fraction(q, m), 1),
            (rstar, dstar),
            (Fraction(p, m), Fraction(q, m)),
            (1, 0),
        ])
    composed = pointwise_min(_nsdf_da_curve(n, p, q), _nsdf_db_curve(n, p, q))
    _assert_matches(curve, composed, f"nsdf_fixed_dmt(n={n}, p={p}, q={q})")
    return curve


def osdf_fixed_dmt(n: int, p: int, q: int) -> PiecewiseLinearCurve:
    """Tradeoff of orthogonal selection DF with fixed phase lengths (p, q).

    The source is silent in phase two, so the protocol falls back to plain
    direct transmission (1-r) wherever that beats cooperating.
    """
    n = _check_n(n)
    p, q = _check_pq(p, q)
    m = p + q
    r2 = Fraction((n - 1) * p, n * m - p)
    if p * (n - 1) <= n * q:  # kappa <= n/(n-1)
        curve = _curve([(0, n), (r2, 1 - r2), (1, 0)])
    else:
        r1 = Fraction(n * p - m, m * (n - 1))
        d1 = Fraction(m, p) * (1 - r1)
        curve = _curve([
            (0, n),
            (Fraction(q, m), 1),
            (r1, d1),
            (r2, 1 - r2),
            (1, 0),
        ])
    # cross-check against the route composition with non-cooperative fallback
    t1 = _curve([(0, n), (Fraction(p, m), 0), (1, 0)])
    noncoop = _curve([(0, 1), (1, 0)])
    composed = pointwise_max(pointwise_min(t1, _nsdf_db_curve(n, p, q)), noncoop)
    _assert_matches(curve, composed, f"osdf_fixed_dmt(n={n}, p={p}, q={q})")
    return curve


def nsdf_fixed_value(n: int, p: float, q: float, r: float) -> float:
    """Fixed-ratio NSDF tradeoff at one r, for real-valued phase lengths.

    Used to sweep the phase ratio continuously; the integer-phase curve
    builders agree with this evaluator.
    """
    r = check_multiplexing_gain(r)
    m = p + q
    da = (n - 1) * max(0.0, 1.0 - m * r / p) + max(0.0, 1.0 - r)
    if r <= q / m:
        db = n - (n - 1) * m * r / q
    else:
        db = (m / p) * max(0.0, 1.0 - r)
    return max(0.0, min(da, db))


def osdf_fixed_value(n: int, p: float, q: float, r: float) -> float:
    """Fixed-ratio OSDF tradeoff at one r, for real-valued phase lengths."""
    r = check_multiplexing_gain(r)
    m = p + q
    t1 = n * max(0.0, 1.0 - m * r / p)
    if r <= q / m:
        db = n - (n - 1) * m * r / q
    else:
        db = (m / p) * max(0.0, 1.0 - r)
    return max(min(t1, db), max(0.0, 1.0 - r))


def nsdf_variable_value(n: int, r: float) -> float:
    """Variable-ratio NSDF tradeoff at one r (phase ratio optimized per r)."""
    n = _check_n(n)
    r = check_multiplexing_gain(r)
    kn = nsdf_kappa_n(n)
    if r <= 1.0 / (kn + 1.0):
        return max(0.0, n - (n - 1) * (kn + 1.0) * r)
    return max(0.0, (n - r) * (1.0 - r) / ((n - 2) * r + 1.0))


def osdf_variable_value(n: int, r: float) -> float:
    """Variable-ratio OSDF tradeoff at one r (phase ratio optimized per r)."""
    n = _check_n(n)
    r = check_multiplexing_gain(r)
    if r <= (n - 1) / (2 * n - 1):  # 1/(kappa_n + 1) with kappa_n = n/(n-1)
        return max(0.0, n - (2 * n - 1) * r)
    return max(0.0, n * (1.0 - r) / ((n - 1) * r + 1.0))


def _variable_curve(n: int, value_fn, extra_breaks) -> PiecewiseLinearCurve:
    # the post-break branch is a rational function of r, so the curve is a
    # dense piecewise-linear rendering whose breakpoint values are exact
    rs = sorted(set(k / _VARIABLE_GRID for k in range(_VARIABLE_GRID + 1)) | set(extra_breaks))
    return _curve([(r, value_fn(n, r)) for r in rs])


def nsdf_variable_dmt(n: int) -> PiecewiseLinearCurve:
    n = _check_n(n)
    kn = nsdf_kappa_n(n)
    return _variable_curve(n, nsdf_variable_value, [1.0 / (kn + 1.0)])


def osdf_variable_dmt(n: int) -> PiecewiseLinearCurve:
    n = _check_n(n)
    return _variable_curve(n, osdf_variable_value, [(n - 1) / (2 * n - 1)])


def nsdf_optimal_kappa(n: int, r: float) -> float:
    """Phase ratio maximizing the NSDF tradeoff at r.

    Unbounded at r = 1 (reported as math.inf).
    """
    n = _check_n(n)
    r = check_multiplexing_gain(r)
    kn = nsdf_kappa_n(n)
    if r <= 1.0 / (kn + 1.0):
        return kn
    if r == 1.0:
        return math.inf
    return (1.0 + (n - 2) * r) / ((n - 1) * (1.0 - r))


def osdf_optimal_kappa(n: int, r: float) -> float:
    """Phase ratio maximizing the OSDF tradeoff at r (math.inf at r = 1)."""
    n = _check_n(n)
    r = check_multiplexing_gain(r)
    if r <= (n - 1) / (2 * n - 1):
        return osdf_kappa_n(n)
    if r == 1.0:
        return math.inf
    return (1.0 + (n - 1) * r) / ((n - 1) * (1.0 - r))


def nsdf_conditional_exponent(k: int, p: int, q: int) -> PiecewiseLinearCurve:
    """Outage exponent of the NSDF destination channel given k-1 active relays.

    k = 1 collapses to the direct channel (1-r)+; for k >= 2 the exponent is
    k - (k-1)mr/q up to r = q/m and (m/p)(1-r) beyond.
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    p, q = _check_pq(p, q)
    if k == 1:
        return _curve([(0, 1), (1, 0)])
    m = p + q
    return _curve([(0, k), (Fraction(q, m), 1), (1, 0)])


def participation_exponent(n: int, k: int, p: int, q: int, r: float) -> float:
    """SNR exponent of 'exactly k-1 of the n-1 relays decode' at gain r.

    For r <= p/m it is (n-k)(1 - mr/p)+.  Past p/m no relay can decode: the
    event has probability zero on the exponential scale for k >= 2 (reported
    as math.inf) and probability one for k = 1 (exponent 0).
    """
    n = _check_n(n)
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    p, q = _check_pq(p, q)
    r = check_multiplexing_gain(r)
    m = p + q
    if r > p / m:
        return 0.0 if k == 1 else math.inf
    return (n - k) * max(0.0, 1.0 - m * r / p)


def protocol_dmt(kind: str, n: int, p: int | None = None, q: int | None = None) -> PiecewiseLinearCurve:
    """Dispatch the analytic tradeoff curve for a protocol kind."""
    kind = kind.lower()
    if kind == "oaf":
        return oaf_optimal_dmt(n)
    if kind == "oaf-bound":
        if p is None or q is None:
            raise ValueError("oaf-bound requires p and q")
        return oaf_upper_bound(n, p, q)
    if kind == "naf":
        return naf_dmt(n)
    if kind == "nsdf-fixed":
        if p is None or q is None:
            raise ValueError("nsdf-fixed requires p and q")
        return nsdf_fixed_dmt(n, p, q)
    if kind == "osdf-fixed":
        if p is None or q is None:
            raise ValueError("osdf-fixed requires p and q")
        return osdf_fixed_dmt(n, p, q)
    if kind == "nsdf-variable":
        return nsdf_variable_dmt(n)
    if kind == "osdf-variable":
        return osdf_variable_dmt(n)
    if kind == "miso":
        return transmit_diversity_bound(n)
    raise ValueError(f"unknown protocol kind {kind!r}")

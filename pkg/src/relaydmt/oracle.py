"""Independent re-derivation of every tradeoff curve from its infimum problem.

Each protocol's outage exponent is the infimum of a linear objective over a
region cut out of the unit box by one piecewise-linear constraint.  The solver
enumerates candidate vertices exactly (splitting min{u, v} into its two linear
regimes) instead of using the closed forms, so it cross-checks the analytic
module from first principles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import nsdf_fixed_value, nsdf_kappa_n, osdf_fixed_value, osdf_kappa_n
from .curves import PiecewiseLinearCurve, check_multiplexing_gain, pointwise_max

_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class InfimumProblem:
    """minimize  u + obj_v * sum_j v_j   over 0 <= u, v_j <= 1  subject to

        con_u * u + con_min * sum_j min(u, v_j) >= rhs(r)      (coupled)
        con_u * u + con_min * v                 >= rhs(r)      (separable, n_v = 1)

    with rhs(r) = rhs_const + rhs_slope * r.  Strict inequalities are solved
    over the closure; the infimum of the continuous objective is attained
    there.
    """

    obj_v: float
    con_u: float
    con_min: float
    rhs_const: float
    rhs_slope: float
    n_v: int = 1
    coupled: bool = True


def _min_over_region(ou, ov, cu, cv, rhs, order=None):
    """Minimize ou*u + ov*v over the closed polygon
    {0 <= u, v <= 1, cu*u + cv*v >= rhs} (+ optional ordering), by
    enumerating pairwise intersections of its bounding lines."""
    lines = [
        (1.0, 0.0, 0.0),  # u = 0
        (1.0, 0.0, 1.0),  # u = 1
        (0.0, 1.0, 0.0),  # v = 0
        (0.0, 1.0, 1.0),  # v = 1
        (1.0, -1.0, 0.0),  # u = v
        (cu, cv, rhs),  # active constraint
    ]
    best = None
    for i in range(len(lines)):
        a1, b1, c1 = lines[i]
        for j in range(i + 1, len(lines)):
            a2, b2, c2 = lines[j]
            det = a1 * b2 - a2 * b1
            if abs(det) < 1e-13:
                continue
            u = (c1 * b2 - c2 * b1) / det
            v = (a1 * c2 - a2 * c1) / det
            if not (-_FEAS_TOL <= u <= 1.0 + _FEAS_TOL and -_FEAS_TOL <= v <= 1.0 + _FEAS_TOL):
                continue
            if order == "v<=u" and v > u + _FEAS_TOL:
                continue
            if order == "u<=v" and u > v + _FEAS_TOL:
                continue
            if cu * u + cv * v < rhs - _FEAS_TOL:
                continue
            u = min(max(u, 0.0), 1.0)
            v = min(max(v, 0.0), 1.0)
            val = ou * u + ov * v
            if best is None or val < best[0]:
                best = (val, u, v)
    return best


def solve_infimum_point(problem: InfimumProblem, r) -> tuple:
    """Exact infimum and one optimizer (value, u*, v*).

    Infeasible (empty) regions return 0 by convention: the exponent is never
    negative.  For the vector form, v* reports the smallest per-relay
    exponent at the optimum.
    """
    r = check_multiplexing_gain(r)
    b = problem.rhs_const + problem.rhs_slope * r
    cands = []
    if problem.n_v == 1:
        if problem.coupled:
            # min(u, v) = u regime (u <= v) and min(u, v) = v regime (v <= u)
            cands.append(_min_over_region(1.0, problem.obj_v,
                                          problem.con_u + problem.con_min, 0.0, b, "u<=v"))
            cands.append(_min_over_region(1.0, problem.obj_v,
                                          problem.con_u, problem.con_min, b, "v<=u"))
        else:
            cands.append(_min_over_region(1.0, problem.obj_v,
                                          problem.con_u, problem.con_min, b, None))
    else:
        if not problem.coupled:
            raise ValueError("vector problems are only defined in coupled form")
        # At an optimum every v_j sits at 0, at u, or (at most one) on the
        # active constraint; enumerate those patterns.
        for n_at_u in range(problem.n_v + 1):
            for has_free in (0, 1):
                if n_at_u + has_free > problem.n_v:
                    continue
                cand = _min_over_region(
                    1.0 + problem.obj_v * n_at_u,
                    problem.obj_v * has_free,
                    problem.con_u + problem.con_min * n_at_u,
                    problem.con_min * has_free,
                    b,
                    "v<=u",
                )
                cands.append(cand)
    cands = [c for c in cands if c is not None]
    if not cands:
        return 0.0, 0.0, 0.0
    val, u, v = min(cands, key=lambda c: c[0])
    return max(0.0, val), u, v


def solve_infimum(problem: InfimumProblem, r) -> float:
    return solve_infimum_point(problem, r)[0]


def oaf_problem(n: int, p: int, q: int) -> InfimumProblem:
    """Orthogonal-AF exponent region: (p-q)u + q*min(u, v) >= p - mr."""
    return InfimumProblem(obj_v=float(n - 1), con_u=float(p - q), con_min=float(q),
                          rhs_const=float(p), rhs_slope=float(-(p + q)))


def nsdf_conditional_problem(k: int, p: int, q: int) -> InfimumProblem:
    """NSDF destination-channel region given k-1 relays: pu + q*min(u, v) >= m(1-r)."""
    m = p + q
    return InfimumProblem(obj_v=float(k - 1), con_u=float(p), con_min=float(q),
                          rhs_const=float(m), rhs_slope=float(-m))


def osdf_conditional_problem(k: int, p: int, q: int) -> InfimumProblem:
    """OSDF destination-channel region given k-1 relays: pu + qv >= m(1-r)
    (source silent in phase two, so the constraint decouples)."""
    m = p + q
    return InfimumProblem(obj_v=float(k - 1), con_u=float(p), con_min=float(q),
                          rhs_const=float(m), rhs_slope=float(-m), coupled=False)


def best_oaf_problem(n: int) -> InfimumProblem:
    """Per-relay exponent region of the orthogonal-relay-matrix protocol:
    u + sum_j min(u, v_j) >= n - (2n-1)r."""
    return InfimumProblem(obj_v=1.0, con_u=1.0, con_min=1.0,
                          rhs_const=float(n), rhs_slope=float(-(2 * n - 1)),
                          n_v=n - 1)


def _oracle_grid(*exact_breaks) -> list:
    rs = set(j / 200 for j in range(201))
    for b in exact_breaks:
        b = float(b)
        if 0.0 < b < 1.0:
            rs.add(b)
    return sorted(rs)


def _noncoop() -> PiecewiseLinearCurve:
    return PiecewiseLinearCurve(((0.0, 1.0), (1.0, 0.0)))


def oracle_oaf_curve(n: int, p: int, q: int) -> PiecewiseLinearCurve:
    """Orthogonal-AF bound rebuilt from the infimum problem on an r grid.

    Direct transmission is always available, so the curve is the upper
    envelope of the cooperative exponent and (1-r)+.
    """
    if q == 0:
        return _noncoop()
    m = p + q
    problem = oaf_problem(n, p, q)
    rs = _oracle_grid(q / m, p / m, 0.5)
    coop = PiecewiseLinearCurve(tuple((r, solve_infimum(problem, r)) for r in rs))
    return pointwise_max(coop, _noncoop())


def _relay_set_exponent(n, k, p, q, r) -> float:
    # (n-k)(1 - mr/p)+ : probability exponent of exactly k-1 decoding relays
    m = p + q
    return (n - k) * max(0.0, 1.0 - m * r / p)


def oracle_nsdf_curve(n: int, p: int, q: int) -> PiecewiseLinearCurve:
    """Fixed-NSDF tradeoff rebuilt from conditional infimum problems.

    Sums the relay-set probability exponent with the conditional channel
    exponent and minimizes over the number of decoding relays; past r = p/m
    no relay decodes and the curve is (1-r)+.
    """
    m = p + q
    problems = {k: nsdf_conditional_problem(k, p, q) for k in range(2, n + 1)}
    pts = []
    for r in _oracle_grid(q / m, p / m, 0.5):
        if r > p / m:
            d = max(0.0, 1.0 - r)
        else:
            terms = [_relay_set_exponent(n, 1, p, q, r) + max(0.0, 1.0 - r)]
            for k in range(2, n + 1):
                terms.append(_relay_set_exponent(n, k, p, q, r) + solve_infimum(problems[k], r))
            d = min(terms)
        pts.append((r, d))
    return PiecewiseLinearCurve(tuple(pts))


def oracle_osdf_curve(n: int, p: int, q: int) -> PiecewiseLinearCurve:
    """Fixed-OSDF tradeoff rebuilt from conditional infimum problems.

    Same composition as NSDF except the no-relay channel only spans the first
    phase; direct transmission supplies the (1-r)+ floor.
    """
    m = p + q
    problems = {k: osdf_conditional_problem(k, p, q) for k in range(2, n + 1)}
    pts = []
    for r in _oracle_grid(q / m, p / m, 0.5):
        if r > p / m:
            d = 0.0
        else:
            terms = [_relay_set_exponent(n, 1, p, q, r) + max(0.0, 1.0 - m * r / p)]
            for k in range(2, n + 1):
                terms.append(_relay_set_exponent(n, k, p, q, r) + solve_infimum(problems[k], r))
            d = min(terms)
        pts.append((r, d))
    coop = PiecewiseLinearCurve(tuple(pts))
    return pointwise_max(coop, _noncoop())


def oracle_curve(kind: str, n: int, p: int, q: int) -> PiecewiseLinearCurve:
    kind = kind.lower()
    if kind in ("oaf", "oaf-bound"):
        return oracle_oaf_curve(n, p, q)
    if kind in ("nsdf", "nsdf-fixed"):
        return oracle_nsdf_curve(n, p, q)
    if kind in ("osdf", "osdf-fixed"):
        return oracle_osdf_curve(n, p, q)
    raise ValueError(f"no infimum oracle for protocol kind {kind!r}")


def default_kappa_grid(n: int, kind: str = "nsdf", step: float = 1e-2) -> list:
    """Phase-ratio grid covering [1, 4*kappa_n] at the given step, plus kappa_n.

    The optimizing ratio diverges as r -> 1 and the shortfall of a capped grid
    scales like (1 - r)^2, so the default extends well past 4*kappa_n to keep
    the envelope within the 5e-3 resolution everywhere.
    """
    kn = nsdf_kappa_n(n) if kind == "nsdf" else osdf_kappa_n(n)
    top = max(4.0 * kn, 40.0)
    count = int(math.ceil((top - 1.0) / step))
    grid = [1.0 + i * step for i in range(count + 1)]
    grid.append(kn)
    return sorted(grid)


def _fixed_values_over_kappa(kind: str, n: int, kappas, r: float):
    """Vectorized fixed-ratio tradeoff values at one r (phase split kappa : 1)."""
    p = np.asarray(kappas, dtype=float)
    m = p + 1.0
    da = (n - 1) * np.maximum(0.0, 1.0 - m * r / p) + max(0.0, 1.0 - r)
    db = np.where(r * m <= 1.0, n - (n - 1) * m * r, (m / p) * max(0.0, 1.0 - r))
    if kind == "nsdf":
        return np.maximum(0.0, np.minimum(da, db))
    t1 = n * np.maximum(0.0, 1.0 - m * r / p)
    return np.maximum(np.minimum(t1, db), max(0.0, 1.0 - r))


def oracle_variable_envelope(protocol_kind: str, n: int, kappa_grid=None,
                             r_grid_points: int = 100) -> PiecewiseLinearCurve:
    """Variable-protocol tradeoff as the upper envelope over the phase ratio.

    Sweeps fixed-ratio curves over a dense kappa grid and takes the pointwise
    maximum; matches the closed variable form to within the grid resolution.
    """
    kind = protocol_kind.lower().replace("-variable", "")
    if kind not in ("nsdf", "osdf"):
        raise ValueError(f"no variable envelope for protocol kind {protocol_kind!r}")
    if kappa_grid is None:
        kappa_grid = default_kappa_grid(n, kind)
    pts = []
    for j in range(r_grid_points + 1):
        r = j / r_grid_points
        pts.append((r, float(_fixed_values_over_kappa(kind, n, kappa_grid, r).max())))
    return PiecewiseLinearCurve(tuple(pts))


def envelope_argmax_kappa(protocol_kind: str, n: int, r: float, kappa_grid=None) -> float:
    """Phase ratio attaining the envelope at one r (grid resolution)."""
    kind = protocol_kind.lower().replace("-variable", "")
    if kind not in ("nsdf", "osdf"):
        raise ValueError(f"no variable envelope for protocol kind {protocol_kind!r}")
    if kappa_grid is None:
        kappa_grid = default_kappa_grid(n, kind)
    vals = _fixed_values_over_kappa(kind, n, kappa_grid, r)
    return float(kappa_grid[int(vals.argmax())])

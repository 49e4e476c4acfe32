"""Piecewise-linear diversity curves d(r) on the multiplexing-gain interval [0, 1]."""

from __future__ import annotations

import bisect
from dataclasses import dataclass

# Irrational breakpoints (critical phase ratios) are stored as 64-bit floats;
# comparisons against them use this tolerance.
BREAKPOINT_TOL = 1e-12


def check_multiplexing_gain(r) -> float:
    """Validate a multiplexing gain; values outside [0, 1] are rejected."""
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"multiplexing gain must lie in [0, 1], got {r}")
    return r


@dataclass(frozen=True)
class PiecewiseLinearCurve:
    """A diversity curve as ordered (r, d) breakpoints joined by line segments.

    The first breakpoint sits at r = 0 and the last at r = 1.  Evaluation is
    exact at breakpoints and linear in between.  Diversity values are clamped
    at zero (negative values within BREAKPOINT_TOL are treated as roundoff).
    """

    breakpoints: tuple

    def __post_init__(self):
        pts = tuple((float(r), float(d)) for r, d in self.breakpoints)
        if len(pts) < 2:
            raise ValueError("a curve needs at least two breakpoints")
        rs = [r for r, _ in pts]
        if rs[0] != 0.0 or rs[-1] != 1.0:
            raise ValueError("curve breakpoints must span exactly [0, 1]")
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("breakpoint abscissas must be strictly increasing")
        if any(d < -BREAKPOINT_TOL for _, d in pts):
            raise ValueError("diversity values must be nonnegative")
        pts = tuple((r, d if d > 0.0 else 0.0) for r, d in pts)
        object.__setattr__(self, "breakpoints", pts)

    @property
    def abscissas(self) -> list:
        return [r for r, _ in self.breakpoints]

    def value(self, r) -> float:
        """Evaluate d(r); exact at breakpoints, linear interpolation between."""
        r = check_multiplexing_gain(r)
        rs = self.abscissas
        i = bisect.bisect_left(rs, r)
        if i < len(rs) and rs[i] == r:
            return self.breakpoints[i][1]
        r0, d0 = self.breakpoints[i - 1]
        r1, d1 = self.breakpoints[i]
        slope = (d1 - d0) / (r1 - r0)
        return d0 + (r - r0) * slope

    def sample(self, rs) -> list:
        return [self.value(r) for r in rs]

    def __call__(self, r) -> float:
        return self.value(r)


def eval_curve(curve: PiecewiseLinearCurve, r) -> float:
    return curve.value(r)


def _combine(a: PiecewiseLinearCurve, b: PiecewiseLinearCurve, take_min: bool) -> PiecewiseLinearCurve:
    """Exact pointwise min/max of two curves, inserting crossing breakpoints.

    Crossing abscissas are solved in closed form from the segment endpoints.
    """
    rs = sorted(set(a.abscissas) | set(b.abscissas))
    va = [a.value(r) for r in rs]
    vb = [b.value(r) for r in rs]
    pick = min if take_min else max
    pts = []
    for i in range(len(rs) - 1):
        pts.append((rs[i], pick(va[i], vb[i])))
        diff0 = va[i] - vb[i]
        diff1 = va[i + 1] - vb[i + 1]
        if diff0 * diff1 < 0.0:
            t = diff0 / (diff0 - diff1)
            rx = rs[i] + t * (rs[i + 1] - rs[i])
            if rs[i] < rx < rs[i + 1]:
                dx = va[i] + t * (va[i + 1] - va[i])
                pts.append((rx, dx))
    pts.append((rs[-1], pick(va[-1], vb[-1])))
    return PiecewiseLinearCurve(tuple(pts))


def pointwise_min(a: PiecewiseLinearCurve, b: PiecewiseLinearCurve) -> PiecewiseLinearCurve:
    """Exact pointwise minimum of two curves (crossings become breakpoints)."""
    return _combine(a, b, take_min=True)


def pointwise_max(a: PiecewiseLinearCurve, b: PiecewiseLinearCurve) -> PiecewiseLinearCurve:
    """Exact pointwise maximum of two curves (crossings become breakpoints)."""
    return _combine(a, b, take_min=False)


def max_abs_difference(a: PiecewiseLinearCurve, b: PiecewiseLinearCurve, rs) -> float:
    return max(abs(a.value(r) - b.value(r)) for r in rs)


def uniform_grid(points: int = 100) -> list:
    """r = k/points for k = 0..points (exact decimal division per point)."""
    return [k / points for k in range(points + 1)]

"""Monotone cubic Hermite interpolation with accurate slopes.

Slopes come from a not-a-knot cubic spline (fourth-order accurate) and are
then limited with the Fritsch-Carlson conditions, so the interpolant is
monotone on every interval where the data are monotone.  On smooth
monotone data the limiter is inactive and the accuracy is that of the
spline; near extrema it falls back to the shape-preserving behaviour of
PCHIP, except around smooth peaks: the interval holding the turning point
is left unlimited and the slope at the sampled extremum is kept whenever it
lies between the two neighbouring secant slopes.
"""

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline, PPoly, make_interp_spline


def monotone_slopes(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    delta = np.diff(y) / np.diff(x)
    if x.size < 4:
        d = np.concatenate([delta[:1], 0.5 * (delta[1:] + delta[:-1]), delta[-1:]])
    else:
        d = CubicSpline(x, y).derivative()(x)
    d_raw = d
    # zero slope at interior extrema and next to flat intervals
    ext = np.zeros(x.size, dtype=bool)
    ext[1:-1] = delta[:-1] * delta[1:] <= 0
    flat = delta == 0
    ext[:-1] |= flat
    ext[1:] |= flat
    d = np.where(ext, 0.0, d)
    safe = np.where(flat, 1.0, delta)
    a = np.where(flat, 0.0, np.maximum(d[:-1] / safe, 0.0))
    b = np.where(flat, 0.0, np.maximum(d[1:] / safe, 0.0))
    r = a * a + b * b
    t = np.where(r > 9.0, 3.0 / np.sqrt(np.maximum(r, 9.0)), 1.0)
    left = t * a * delta
    right = t * b * delta
    # an interval next to a sampled extremum whose end slopes change sign
    # holds the smooth turning point: it is not monotone, so no limiting
    peak = np.zeros(x.size, dtype=bool)
    peak[1:-1] = delta[:-1] * delta[1:] < 0
    turning = (peak[:-1] | peak[1:]) & (d_raw[:-1] * d_raw[1:] < 0)
    left = np.where(turning, d_raw[:-1], left)
    right = np.where(turning, d_raw[1:], right)
    # each interior node gets the more restrictive of its two intervals
    out = np.empty_like(d)
    out[0] = left[0]
    out[-1] = right[-1]
    inner_l, inner_r = right[:-1], left[1:]
    out[1:-1] = np.where(np.abs(inner_l) < np.abs(inner_r), inner_l, inner_r)
    # at a smooth interior extremum the spline slope lies between the two
    # neighbouring secants; keep it there instead of flattening the peak
    lo = np.minimum(delta[:-1], delta[1:])
    hi = np.maximum(delta[:-1], delta[1:])
    between = np.zeros(x.size, dtype=bool)
    between[1:-1] = (d_raw[1:-1] >= lo) & (d_raw[1:-1] <= hi)
    keep = peak & between
    out[keep] = d_raw[keep]
    return out


def monotone_cubic(x, y) -> CubicHermiteSpline:
    return CubicHermiteSpline(x, y, monotone_slopes(x, y))


def shape_safe_quintic(x, y):
    """Quintic spline values, guarded by :func:`monotone_cubic`.

    Returns a callable.  The quintic (sixth-order accurate) is used on an
    interval when its derivative keeps the sign of the data slope over the
    whole interval; elsewhere the monotone cubic is used on
    the whole interval.  Intervals that hold a smooth turning point are
    not checked.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cubic = monotone_cubic(x, y)
    if x.size < 8:
        return cubic
    quintic = make_interp_spline(x, y, k=5)
    delta = np.diff(y)
    peak = np.zeros(x.size, dtype=bool)
    peak[1:-1] = delta[:-1] * delta[1:] < 0
    free = peak[:-1] | peak[1:]
    # the derivative is a quartic per interval: its minimum sits at an end
    # or at a root of the second derivative
    dq = PPoly.from_spline(quintic).derivative()
    crit = dq.derivative().roots(extrapolate=False)
    crit = crit[np.isfinite(crit)]
    direction = np.sign(delta)
    lowest = np.minimum(direction * dq(x[:-1]), direction * dq(x[1:]))
    if crit.size:
        owner = np.clip(np.searchsorted(x, crit, side="right") - 1, 0, x.size - 2)
        np.minimum.at(lowest, owner, direction[owner] * dq(crit))
    tol = 1e-12 * np.max(np.abs(delta / np.diff(x)))
    monotone = np.where(delta == 0, False, lowest >= -tol)
    use_cubic = ~free & ~monotone

    def evaluate(xq):
        xq = np.asarray(xq, dtype=float)
        idx = np.clip(np.searchsorted(x, xq) - 1, 0, x.size - 2)
        q = quintic(xq)
        bad = use_cubic[idx]
        if np.any(bad):
            q = np.where(bad, cubic(xq), q)
        return q

    return evaluate

"""Half-line quadrature for densities sampled on (log-spaced) size grids.

An integral ``∫ K(η x) x^ℓ g(x) dx`` is split into three pieces:

* the bulk ``[x_1, x_M]``, integrated in ``t = log x`` with the trapezoid
  rule plus Gregory end corrections (uniform log spacing) or the plain
  trapezoid rule (anything else);
* the head ``(0, x_1)``, integrated from an analytic model of ``g``:
  either the declared power-law extension ``c x^{-p} e^{-r x}`` or a
  quadratic extrapolation from x_1 and the samples near 2 x_1 and 4 x_1;
* the tail ``(x_M, ∞)``, integrated from the declared extension, or taken
  as zero when the samples have decayed.

Kernels are named: ``one`` (moments), ``exp`` (Laplace), ``bern``
(``1 - e^{-y}``), ``r2`` (``e^{-y} - 1 + y``) and ``r3``
(``1 - e^{-y} - y + y²/2``).  The last two are Taylor remainders used to
evaluate transforms of class-normalised densities without cancellation.
"""

import math

import numpy as np
from scipy import special

from .errors import MomentDivergenceError

# (order of vanishing at y = 0, leading coefficient)
KERNEL_LEADING = {
    "one": (0, 1.0),
    "exp": (0, 1.0),
    "bern": (1, 1.0),
    "r2": (2, 0.5),
    "r3": (3, 1.0 / 6.0),
}

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_SERIES_CUT = 1.0
_SERIES_TERMS = 24


def _exp_series_tail(y, start):
    """``sum_{j >= start} (-y)^j / j!`` for small ``y``."""
    term = (-y) ** start / math.factorial(start)
    total = term.copy()
    for j in range(start + 1, start + _SERIES_TERMS):
        term = term * (-y) / j
        total = total + term
    return total


def kernel_values(name, y):
    """Evaluate a named kernel at ``y = η x >= 0`` without cancellation."""
    y = np.asarray(y, dtype=float)
    if name == "one":
        return np.ones_like(y)
    if name == "exp":
        return np.exp(-y)
    if name == "bern":
        return -np.expm1(-y)
    small = y < _SERIES_CUT
    ys = np.where(small, y, 0.0)
    yl = np.where(small, _SERIES_CUT, y)
    if name == "r2":
        series = _exp_series_tail(ys, 2)
        direct = np.expm1(-yl) + yl
        return np.where(small, series, direct)
    if name == "r3":
        series = -_exp_series_tail(ys, 3)
        direct = -np.expm1(-yl) - yl + 0.5 * yl * yl
        return np.where(small, series, direct)
    raise ValueError(f"unknown kernel {name!r}")


def log_weights(x):
    """Quadrature weights ``w`` with ``∫_{x_1}^{x_M} f dx ≈ Σ w_i f(x_i)``.

    The rule integrates ``f(e^t) e^t`` over ``t = log x``.  On a uniform
    log grid the Gregory end corrections make it fourth order at the
    endpoints and spectrally accurate in the interior for smooth
    integrands.
    """
    x = np.asarray(x, dtype=float)
    t = np.log(x)
    n = t.size
    if n == 1:
        return np.zeros(1)
    dt = np.diff(t)
    h = dt.mean()
    if n >= 8 and np.max(np.abs(dt - h)) <= 1e-9 * h:
        w = np.ones(n)
        ends = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])
        w[:3] = ends
        w[-3:] = ends[::-1]
        w *= h
    else:
        w = np.zeros(n)
        w[:-1] += 0.5 * dt
        w[1:] += 0.5 * dt
    return w * x


def _panel_nodes(a, b, rate):
    """Gauss-Legendre nodes in ``t = log x`` over ``[a, b]``.

    Panels are at most 0.5 wide in ``t`` and span at most two e-folds of
    ``e^{-rate x}``.
    """
    if b <= a:
        return np.empty(0), np.empty(0)
    edges = [a]
    while edges[-1] < b:
        lo = edges[-1]
        hi = lo * math.exp(0.5)
        if rate > 0:
            hi = min(hi, lo + 2.0 / rate)
        edges.append(min(hi, b))
    edges = np.log(np.asarray(edges))
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    xs = np.exp(t)
    return xs, w * xs


class Extension:
    """Analytic model ``c x^{-p} e^{-rate x}`` used beyond the sampled grid."""

    __slots__ = ("p", "c", "rate")

    def __init__(self, p, c, rate=0.5):
        if rate <= 0:
            raise ValueError("extension rate must be positive")
        self.p = float(p)
        self.c = float(c)
        self.rate = float(rate)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * x ** (-self.p) * np.exp(-self.rate * x)

    def __eq__(self, other):
        return (isinstance(other, Extension)
                and (self.p, self.c, self.rate) == (other.p, other.c, other.rate))

    def __hash__(self):
        return hash((self.p, self.c, self.rate))

    def __repr__(self):
        return f"Extension(p={self.p!r}, c={self.c!r}, rate={self.rate!r})"

    def scaled(self, factor):
        return Extension(self.p, self.c * factor, self.rate)


def _head_model(x, values, ext):
    """Return ``(callable, exponent)`` for the head piece.

    ``exponent`` is the power ``q`` with ``g(x) ~ x^q`` as ``x -> 0``.
    """
    if ext is not None:
        return ext, -ext.p, ext.c
    if x.size < 2:
        return None, 0.0, 0.0
    if x.size >= 6:
        # quadratic through x_1, ~2 x_1 and ~4 x_1 (well conditioned)
        k = int(np.clip(np.searchsorted(x, 2.0 * x[0]), 1, (x.size - 1) // 2))
        idx = [0, k, 2 * k]
        # linear in the samples, so transforms stay linear in the density
        c2, c1, c0 = np.polyfit(x[idx], values[idx], 2)

        def quadratic(xx):
            xx = np.asarray(xx, dtype=float)
            return c0 + xx * (c1 + xx * c2)

        return quadratic, 0.0, c0
    slope = (values[1] - values[0]) / (x[1] - x[0])
    alpha = values[0] - slope * x[0]

    def linear(xx):
        return alpha + slope * np.asarray(xx, dtype=float)

    return linear, 0.0, alpha


def integrate(x, values, ext, kernel, etas=None, power=0, tail_check=True):
    """``∫_0^∞ K(η x) x^power g(x) dx`` for each ``η`` in ``etas``.

    Returns a scalar when ``etas`` is None (only meaningful for ``one``).
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    scalar = etas is None
    etas = np.atleast_1d(np.asarray(1.0 if scalar else etas, dtype=float))
    m, lead = KERNEL_LEADING[kernel]
    if kernel == "one":
        m = 0

    if ext is None and tail_check and values.size:
        top = np.max(np.abs(values))
        if top > 0 and abs(values[-1]) > 1e-14 * top:
            raise MomentDivergenceError(
                power, "density has not decayed at the last grid point and "
                "declares no tail extension")

    w = log_weights(x) * x ** power * values
    y = etas[:, None] * x[None, :]
    total = kernel_values(kernel, y) @ w

    model, q, amp = _head_model(x, values, ext)
    if model is not None:
        s_eff = power + q + m + 1.0
        if s_eff <= 0:
            raise MomentDivergenceError(
                power, f"x^{power} times the head x^{q:g} is not integrable at 0")
        span = min(max(40.0 / s_eff, 5.0), 400.0)
        x_lo = x[0] * math.exp(-span)
        rate = ext.rate if ext is not None else 0.0
        xs, ws = _panel_nodes(x_lo, x[0], rate)
        gw = ws * xs ** power * model(xs)
        total = total + kernel_values(kernel, etas[:, None] * xs[None, :]) @ gw
        if ext is not None:
            below = amp * x_lo ** s_eff / s_eff
        else:
            below = amp * x_lo ** (power + m + 1.0) / (power + m + 1.0)
        total = total + lead * etas ** m * below

    if ext is not None:
        x_hi = x[-1] + 60.0 / ext.rate
        xs, ws = _panel_nodes(x[-1], x_hi, ext.rate)
        gw = ws * xs ** power * ext(xs)
        total = total + kernel_values(kernel, etas[:, None] * xs[None, :]) @ gw

    return float(total[0]) if scalar else total


def extension_moment(ext, order, x_first, x_last):
    """Closed-form ``∫`` of ``x^order`` times the extension over head and tail."""
    s = order - ext.p + 1.0
    if s <= 0:
        raise MomentDivergenceError(order, "extension not integrable at 0")
    scale = ext.c * ext.rate ** (-s) * special.gamma(s)
    head = scale * special.gammainc(s, ext.rate * x_first)
    tail = scale * special.gammaincc(s, ext.rate * x_last)
    return head, tail


def moment(x, values, ext, order, tail_check=True):
    """``M_order`` of the sampled density with its head/tail models."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if ext is None:
        return integrate(x, values, None, "one", None, order, tail_check)
    w = log_weights(x) * x ** order
    head, tail = extension_moment(ext, order, x[0], x[-1])
    return float(w @ values + head + tail)

"""Self-similar changes of variables.

For a kernel of homogeneity ``γ`` the time map ``t(τ)`` and the scale
``s(t)`` solve

    t'(τ) ṡ(t)/s(t) = 1,        t'(τ) s(t)^(γ-1) = 1/k,

with ``s(t(τ)) = e^τ``.  The density in self-similar variables is
``g(τ, z) = e^{2τ} n(t(τ), e^τ z)``.  The three solvable kernels use
``k = 1, 2, 1``.

The multiplicative kernel reduces to the additive one through

    n_add(log(1/(1-t)), x) = (1 - t) x n_mult(t, x),

so the additive flow time that belongs to multiplicative original time
``t`` is ``σ = 2 log(1/(1-t))``: twice the multiplicative ``τ``.
:func:`mult_to_additive` and :func:`reduced_flow_time` perform this
bookkeeping; the transform of the reduced density is exactly the
``B[x g]`` weighting used for multiplicative distances.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .density import GriddedDensity, default_grid, rescale
from .quadrature import Extension
from .kernels import KernelKind


@dataclass(frozen=True)
class ScalingMap:
    kernel: KernelKind
    t_of_tau: Callable
    s_of_t: Callable
    tau_of_t: Callable
    gelation_time: float

    def check_time(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t >= self.gelation_time):
            raise ValueError(f"original time must lie in [0, {self.gelation_time})")
        return t


def general_time_map(gamma, k):
    """``(t(τ), s(t))`` for arbitrary homogeneity; used to cross-check."""
    if gamma == 1:
        return (lambda tau: np.asarray(tau) / k,
                lambda t: np.exp(k * np.asarray(t)))
    c = 1.0 - gamma
    return (lambda tau: np.expm1(c * np.asarray(tau)) / (k * c),
            lambda t: (1.0 + k * c * np.asarray(t)) ** (1.0 / c))


def make_scaling(kernel) -> ScalingMap:
    kernel = KernelKind.parse(kernel)
    if kernel is KernelKind.CONSTANT:
        return ScalingMap(kernel,
                          lambda tau: np.expm1(tau),
                          lambda t: 1.0 + np.asarray(t),
                          lambda t: np.log1p(t),
                          math.inf)
    if kernel is KernelKind.ADDITIVE:
        return ScalingMap(kernel,
                          lambda tau: 0.5 * np.asarray(tau),
                          lambda t: np.exp(2.0 * np.asarray(t)),
                          lambda t: 2.0 * np.asarray(t),
                          math.inf)
    return ScalingMap(kernel,
                      lambda tau: -np.expm1(-np.asarray(tau)),
                      lambda t: 1.0 / (1.0 - np.asarray(t)),
                      lambda t: -np.log1p(-np.asarray(t)),
                      1.0)


def _target_grid(grid):
    if grid is None:
        return default_grid()
    if isinstance(grid, str) and grid == "native":
        return None
    return np.asarray(grid, dtype=float)


def to_selfsimilar(n: GriddedDensity, tau, smap: ScalingMap = None, grid=None) -> GriddedDensity:
    """``g(z) = e^{2τ} n(e^τ z)``.

    The result is resampled on ``grid`` (default: the standard size grid);
    ``grid="native"`` keeps the exactly mapped grid ``n.grid e^{-τ}``.
    The time map itself does not enter: ``n`` is taken to be the state at
    ``t(τ)``.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return rescale(n, math.exp(2.0 * tau), math.exp(tau), _target_grid(grid))


def from_selfsimilar(g: GriddedDensity, tau, smap: ScalingMap = None, grid=None) -> GriddedDensity:
    """Inverse of :func:`to_selfsimilar`: ``n(x) = e^{-2τ} g(e^{-τ} x)``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return rescale(g, math.exp(-2.0 * tau), math.exp(-tau), _target_grid(grid))


def reduced_flow_time(t):
    """Additive self-similar time ``2 log(1/(1-t))`` of multiplicative time ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= 1.0):
        raise ValueError("multiplicative time must lie in [0, 1)")
    out = -2.0 * np.log1p(-t)
    return float(out) if out.ndim == 0 else out


def mult_to_additive(n: GriddedDensity, t) -> GriddedDensity:
    """Additive-kernel state ``(1 - t) x n(x)`` at time ``log(1/(1-t))``.

    Multiplicative class moments ``(M_2, M_3)`` become additive class
    moments ``(M_1, M_2)`` of the result.
    """
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise ValueError("multiplicative time must lie in [0, 1)")
    f = 1.0 - t
    ext = None
    if n.ext is not None:
        ext = Extension(n.ext.p - 1.0, f * n.ext.c, n.ext.rate)
    law = n.law.times_x().scaled(f, 1.0) if n.law is not None else None
    return GriddedDensity(n.grid, f * n.grid * n.values, ext, n.signed, law)


def original_time_exponent(flow_rate):
    """Power of ``(1 - t)`` equivalent to a decay ``e^{-rate σ}`` in flow time.

    The multiplicative flow runs in ``σ = 2 log(1/(1-t))``, hence
    ``e^{-rate σ} = (1 - t)^{2 rate}``.
    """
    return 2.0 * float(flow_rate)


def fit_power(ts, values):
    """Least-squares exponent ``p`` in ``values ≈ C (1 - t)^p``."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(ts >= 1.0) or np.any(values <= 0):
        raise ValueError("need t < 1 and positive values")
    return float(np.polyfit(np.log1p(-ts), np.log(values), 1)[0])

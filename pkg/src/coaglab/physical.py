"""Finite-volume solver for the coagulation equation in original variables.

The equation is written in conservative form for the mass density,

    ∂_t (x n) + ∂_x F = 0,
    F(t, x) = ∫_0^x ∫_{x-u}^∞ K(u, v) u n(u) n(v) dv du,

and discretised on geometric cells ``[e_i, e_{i+1}]`` with centres
``x_i = sqrt(e_i e_{i+1})``.  The flux through the right edge of cell
``i`` is

    F_{i+1/2} = Σ_{k ≤ i} x_k n_k Δ_k ∫_{e_{i+1} - x_k}^{e_M} K(x_k, v) n(v) dv,

where the inner integral is a sum over whole cells plus the part of the
cell containing ``e_{i+1} - x_k``.  All three kernels are separable, so
the inner integrals are suffix sums of ``n Δ`` and ``x n Δ``.  Mass that
would be created beyond ``e_M`` leaves through ``F_{M-1/2}``; it is
recorded as ``lost_mass``.
"""

import os
from dataclasses import dataclass, field
from typing import List, Optional

import numba
import numpy as np

from .density import GriddedDensity, default_grid, resample_values, write_density
from .errors import PositivityLossError, StabilityError
from .kernels import KernelKind

STABILITY_LIMIT = 0.5
NEGATIVE_TOL = -1e-14


def cell_edges(centres):
    """Edges of the geometric cells whose centres are ``centres``."""
    x = np.asarray(centres, dtype=float)
    mids = np.sqrt(x[:-1] * x[1:])
    first = x[0] * x[0] / mids[0]
    last = x[-1] * x[-1] / mids[-1]
    return np.concatenate([[first], mids, [last]])


@dataclass(frozen=True, eq=False)
class SolverConfig:
    kernel: KernelKind
    grid: np.ndarray = field(default_factory=default_grid)
    dt: Optional[float] = None
    t_end: float = 1.0
    flux_limiter: str = "none"
    integrator: str = "euler"
    cfl: float = 0.4
    dt_max: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kernel", KernelKind.parse(self.kernel))
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        if self.flux_limiter not in ("none", "minmod"):
            raise ValueError("flux_limiter must be 'none' or 'minmod'")
        if self.integrator not in ("euler", "heun"):
            raise ValueError("integrator must be 'euler' or 'heun'")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.kernel is KernelKind.MULTIPLICATIVE and self.t_end >= 1.0:
            raise ValueError("multiplicative runs must stop before gelation (t_end < 1)")


class FluxTable:
    """Index tables for the flux sums on one grid (built once per grid)."""

    def __init__(self, centres):
        x = np.asarray(centres, dtype=float)
        e = cell_edges(x)
        m = x.size
        self.x, self.edges, self.width = x, e, np.diff(e)
        ii, kk = np.tril_indices(m)
        v = e[ii + 1] - x[kk]
        alpha = np.clip(np.searchsorted(e, v, side="right") - 1, 0, m - 1)
        start = np.maximum(v, e[alpha])
        self.row, self.col = ii.astype(np.int64), kk.astype(np.int64)
        self.alpha = alpha.astype(np.int64)
        # fraction of cell alpha lying above the threshold
        self.frac = np.clip((e[alpha + 1] - start) / self.width[alpha], 0.0, 1.0)
        self.lo_part = start
        self.m = m

    def moments(self, n):
        """Cell-sum moments ``(M_0, M_1, M_2)``."""
        a = n * self.width
        return float(a.sum()), float((a * self.x).sum()), float((a * self.x ** 2).sum())


_TABLES = {}


def flux_table(centres) -> FluxTable:
    key = (centres.size, float(centres[0]), float(centres[-1]), float(centres[centres.size // 2]))
    tab = _TABLES.get(key)
    if tab is None:
        tab = FluxTable(centres)
        _TABLES[key] = tab
    return tab


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


@numba.njit(cache=True, nogil=True)
def _flux_kernel(row, col, alpha, lo_part, edges, x, n, slope, sa, sb, kind, m):
    out = np.zeros(m)
    for idx in range(row.size):
        k = col[idx]
        al = alpha[idx]
        lo = lo_part[idx]
        hi = edges[al + 1]
        s = slope[al]
        c = n[al] - s * x[al]
        # integrals of n and v n over [lo, hi] under the linear reconstruction
        p0 = c * (hi - lo) + 0.5 * s * (hi * hi - lo * lo)
        p1 = 0.5 * c * (hi * hi - lo * lo) + s * (hi ** 3 - lo ** 3) / 3.0
        if s == 0.0:
            p1 = p0 * x[al]
        i0 = p0 + sa[al + 1]
        i1 = p1 + sb[al + 1]
        if kind == 0:
            inner = 2.0 * i0
        elif kind == 1:
            inner = x[k] * i0 + i1
        else:
            inner = x[k] * i1
        out[row[idx]] += n[k] * (edges[k + 1] - edges[k]) * x[k] * inner
    return out


_KIND_CODE = {KernelKind.CONSTANT: 0, KernelKind.ADDITIVE: 1, KernelKind.MULTIPLICATIVE: 2}


def fluxes(n, tab: FluxTable, kernel: KernelKind, limiter="none"):
    """Edge fluxes ``F_{i+1/2}``, ``i = 0 … M-1``.

    The threshold cell is integrated with a constant profile
    (``limiter="none"``) or a minmod-limited linear reconstruction.
    """
    n = np.ascontiguousarray(n, dtype=float)
    a = n * tab.width
    b = a * tab.x
    # suffix sums over cells strictly above the threshold cell
    sa = np.concatenate([np.cumsum(a[::-1])[::-1], [0.0]])
    sb = np.concatenate([np.cumsum(b[::-1])[::-1], [0.0]])
    slope = np.zeros_like(n)
    if limiter == "minmod":
        d = np.diff(n) / np.diff(tab.x)
        slope[1:-1] = _minmod(d[:-1], d[1:])
    return _flux_kernel(tab.row, tab.col, tab.alpha, tab.lo_part, tab.edges, tab.x,
                        n, slope, sa, sb, _KIND_CODE[kernel], tab.m)


def loss_rate_bound(n, tab: FluxTable, kernel: KernelKind) -> float:
    """Largest explicit-Euler loss rate ``sup_x ∫ K(x, y) n(y) dy``."""
    m0, m1, _ = tab.moments(n)
    xm = tab.edges[-1]
    if kernel is KernelKind.CONSTANT:
        return 2.0 * m0
    if kernel is KernelKind.ADDITIVE:
        return xm * m0 + m1
    return xm * m1


def _rhs(n, tab, kernel, limiter):
    f = fluxes(n, tab, kernel, limiter)
    df = np.diff(np.concatenate([[0.0], f]))
    return -df / (tab.x * tab.width), f[-1]


def _advance(n, dt, tab, kernel, limiter, integrator):
    k1, out1 = _rhs(n, tab, kernel, limiter)
    if integrator == "euler":
        return n + dt * k1, dt * out1
    mid = n + dt * k1
    k2, out2 = _rhs(mid, tab, kernel, limiter)
    return n + 0.5 * dt * (k1 + k2), 0.5 * dt * (out1 + out2)


def _check_positive(values):
    if np.any(values < NEGATIVE_TOL):
        i = int(np.argmin(values))
        raise PositivityLossError(f"density became negative ({values[i]:.3e} at cell {i})")
    return np.maximum(values, 0.0)


def step(n: GriddedDensity, cfg: SolverConfig, dt=None) -> GriddedDensity:
    """One explicit step of size ``dt`` (default ``cfg.dt``)."""
    dt = cfg.dt if dt is None else dt
    tab = flux_table(n.grid)
    vals = np.asarray(n.values, dtype=float)
    rate = loss_rate_bound(vals, tab, cfg.kernel)
    if dt is None:
        dt = cfg.cfl / rate if rate > 0 else 0.0
    if dt * rate > STABILITY_LIMIT:
        raise StabilityError(f"dt*max_rate = {dt * rate:.3g} exceeds {STABILITY_LIMIT}")
    new, _ = _advance(vals, dt, tab, cfg.kernel, cfg.flux_limiter, cfg.integrator)
    return GriddedDensity(n.grid, _check_positive(new))


@dataclass
class Solution:
    times: List[float]
    states: List[GriddedDensity]
    lost_mass: List[float]
    steps: int = 0

    def at(self, t) -> GriddedDensity:
        for tt, s in zip(self.times, self.states):
            if abs(tt - t) <= 1e-12 * max(1.0, abs(t)):
                return s
        raise KeyError(f"no checkpoint at t={t}")

    def write(self, directory):
        os.makedirs(directory, exist_ok=True)
        paths = []
        for t, s in zip(self.times, self.states):
            path = os.path.join(directory, f"n_t{t:.6g}.csv")
            write_density(path, s)
            paths.append(path)
        return paths


_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


def cell_averages(f: GriddedDensity, grid=None) -> np.ndarray:
    """Cell averages of ``f`` (4-point Gauss-Legendre in ``log x`` per cell)."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    e = np.log(cell_edges(grid))
    half = 0.5 * np.diff(e)
    mid = 0.5 * (e[1:] + e[:-1])
    t = mid[:, None] + half[:, None] * _GL4_X[None, :]
    xs = np.exp(t)
    vals = resample_values(f, xs.ravel()).reshape(xs.shape)
    integral = (vals * xs * _GL4_W[None, :]).sum(axis=1) * half
    return np.maximum(integral / np.diff(np.exp(e)), 0.0)


def point_values(avg, grid) -> np.ndarray:
    """Centre values from cell averages on a geometric grid.

    With log spacing ``h`` the average over a cell equals
    ``f(x) + h² (x f'/8 + x² f''/24) + O(h⁴)`` at its geometric centre;
    derivatives of the averages stand in for those of ``f``.
    """
    x = np.asarray(grid, dtype=float)
    avg = np.asarray(avg, dtype=float)
    if x.size < 5:
        return avg.copy()
    h = np.log(x[1] / x[0])
    d1 = np.gradient(avg, x, edge_order=2)
    d2 = np.gradient(d1, x, edge_order=2)
    corr = h * h * (x * d1 / 8.0 + x * x * d2 / 24.0)
    corr[[0, -1]] = 0.0
    out = avg - corr
    return np.where(out >= 0.0, out, avg)


def solve(n0: GriddedDensity, cfg: SolverConfig, checkpoints=None) -> Solution:
    """Repeated steps up to ``cfg.t_end`` with snapshots at ``checkpoints``.

    The unknowns are cell averages: ``n0`` is averaged over the cells of
    ``cfg.grid`` and the snapshots hold centre values reconstructed from
    the averages (``point_values``); a snapshot at ``t = 0`` is the
    initial datum itself.  With ``cfg.dt = None`` each step
    uses ``cfl / max_rate``; the step before a checkpoint is shortened to
    land on it exactly.
    """
    initial = GriddedDensity(cfg.grid, np.maximum(resample_values(n0, cfg.grid), 0.0))
    n0 = GriddedDensity(cfg.grid, cell_averages(n0, cfg.grid))
    times = sorted(set(float(t) for t in (checkpoints or [])) | {cfg.t_end})
    if times and times[0] < 0:
        raise ValueError("checkpoint times must be nonnegative")
    if cfg.kernel is KernelKind.MULTIPLICATIVE and times[-1] >= 1.0:
        raise ValueError("multiplicative checkpoints must precede gelation (t < 1)")
    tab = flux_table(n0.grid)
    vals = np.array(n0.values, dtype=float)
    t, lost, steps = 0.0, 0.0, 0
    out_t, out_s, out_l = [], [], []
    for target in times:
        while t < target - 1e-14 * max(1.0, target):
            rate = loss_rate_bound(vals, tab, cfg.kernel)
            dt = cfg.dt if cfg.dt is not None else (cfg.cfl / rate if rate > 0 else target - t)
            if cfg.dt_max is not None:
                dt = min(dt, cfg.dt_max)
            if dt * rate > STABILITY_LIMIT:
                raise StabilityError(f"dt*max_rate = {dt * rate:.3g} exceeds {STABILITY_LIMIT}")
            dt = min(dt, target - t)
            vals, out = _advance(vals, dt, tab, cfg.kernel, cfg.flux_limiter, cfg.integrator)
            vals = _check_positive(vals)
            lost += out
            t += dt
            steps += 1
        t = target
        out_t.append(target)
        if steps == 0:
            out_s.append(initial)
        else:
            out_s.append(GriddedDensity(n0.grid, point_values(vals, n0.grid)))
        out_l.append(lost)
    return Solution(out_t, out_s, out_l, steps)


def cell_mass(n: GriddedDensity) -> float:
    tab = flux_table(n.grid)
    return tab.moments(np.asarray(n.values))[1]


def constant_kernel_exact(t, x):
    """``(1+t)^{-2} e^{-x/(1+t)}``, the solution from ``e^{-x}``."""
    return (1.0 + t) ** -2 * np.exp(-np.asarray(x) / (1.0 + t))

"""Densities on the half-line: sampling, moments, normalisation, profiles."""

import io
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import special

from . import quadrature
from .interp import shape_safe_quintic
from .errors import DegenerateDensityError, MomentDivergenceError
from .kernels import AdmissibleClass, KernelKind
from .quadrature import Extension

DEFAULT_GRID_SIZE = 600
DEFAULT_GRID_RANGE = (1e-4, 1e3)


def default_grid(n=DEFAULT_GRID_SIZE, lo=DEFAULT_GRID_RANGE[0], hi=DEFAULT_GRID_RANGE[1]):
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class GammaLaw:
    """``amplitude * rate^shape x^(shape-1) e^(-rate x) / Γ(shape)``.

    ``amplitude`` is the zeroth moment when ``shape > 0``.  Negative
    non-integer shapes are allowed, which covers the two fat-local
    self-similar profiles (their zeroth moment is infinite and the
    amplitude is then only a formal constant).
    """

    amplitude: float
    shape: float
    rate: float

    @property
    def coefficient(self) -> float:
        return self.amplitude * self.rate ** self.shape / special.gamma(self.shape)

    def extension(self) -> Extension:
        return Extension(1.0 - self.shape, self.coefficient, self.rate)

    def __call__(self, x):
        return self.extension()(x)

    def moment(self, order) -> float:
        s = self.shape + order
        if s <= 0:
            raise MomentDivergenceError(order, f"gamma law with shape {self.shape:g}")
        return float(self.amplitude * special.poch(self.shape, order) / self.rate ** order)

    def scaled(self, a, b) -> "GammaLaw":
        """Law of ``x -> a f(b x)``."""
        return GammaLaw(self.amplitude * a / b, self.shape, self.rate * b)

    def times_x(self) -> "GammaLaw":
        """Law of ``x -> x f(x)``."""
        return GammaLaw(self.amplitude * self.shape / self.rate, self.shape + 1.0, self.rate)


CATALOG = {
    "exp": GammaLaw(1.0, 1.0, 1.0),
    "G_const": GammaLaw(1.0, 1.0, 1.0),
    "G_add": GammaLaw(-1.0, -0.5, 0.5),
    "G_mult": GammaLaw(1.0 / 3.0, -1.5, 0.5),
}


def catalog_law(name: str) -> GammaLaw:
    """Resolve ``exp``, ``G_*`` or ``gamma(shape,rate)`` to a law."""
    key = name.strip()
    if key in CATALOG:
        return CATALOG[key]
    if key.startswith("gamma(") and key.endswith(")"):
        parts = key[6:-1].split(",")
        if len(parts) == 2:
            shape, rate = (float(v) for v in parts)
            if shape <= 0 or rate <= 0:
                raise ValueError("gamma(shape,rate) needs positive parameters")
            return GammaLaw(1.0, shape, rate)
    raise KeyError(f"unknown catalog density {name!r}")


@dataclass(frozen=True, eq=False)
class GriddedDensity:
    """Density values on a strictly increasing positive grid.

    ``ext`` is the analytic head/tail model used by all quadratures.
    ``signed`` marks difference objects, for which nonnegativity is not
    required.  ``law`` records an exact gamma-type formula when the
    samples came from one; it survives exact rescalings only.
    """

    grid: np.ndarray
    values: np.ndarray
    ext: Optional[Extension] = None
    signed: bool = False
    law: Optional[GammaLaw] = field(default=None, compare=False)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if grid.size < 2:
            raise ValueError("need at least two grid points")
        if grid[0] <= 0 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be positive and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if not self.signed and np.any(values < 0):
            raise ValueError("physical densities must be nonnegative")
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.grid.size

    def scaled(self, factor) -> "GriddedDensity":
        ext = self.ext.scaled(factor) if self.ext is not None else None
        law = None
        if self.law is not None:
            law = GammaLaw(self.law.amplitude * factor, self.law.shape, self.law.rate)
        signed = self.signed or factor < 0
        return GriddedDensity(self.grid, factor * self.values, ext, signed, law)

    def _combine(self, other, sign):
        if not np.array_equal(self.grid, other.grid):
            raise ValueError("densities live on different grids")
        ext = None
        if self.ext is not None or other.ext is not None:
            a, b = self.ext, other.ext
            if a is None or b is None or (a.p, a.rate) != (b.p, b.rate):
                raise ValueError("cannot combine incompatible extensions")
            ext = Extension(a.p, a.c + sign * b.c, a.rate)
        return GriddedDensity(self.grid, self.values + sign * other.values, ext,
                              signed=True)

    def __add__(self, other):
        out = self._combine(other, 1.0)
        if not np.any(out.values < 0) and not (self.signed or other.signed):
            return replace(out, signed=False)
        return out

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __call__(self, x):
        """Evaluate the density from its samples, with head and tail models off the grid."""
        return resample_values(self, np.asarray(x, dtype=float))


@dataclass(frozen=True)
class MomentVector:
    m0: Optional[float] = None
    m1: Optional[float] = None
    m2: Optional[float] = None
    m3: Optional[float] = None
    m4: Optional[float] = None

    def __getitem__(self, order):
        value = getattr(self, f"m{order}")
        if value is None:
            raise KeyError(f"moment {order} was not computed")
        return value

    def as_tuple(self):
        return tuple(getattr(self, f"m{i}") for i in range(5))


def compute_moments(f: GriddedDensity, max_order: int = 4, orders=None) -> MomentVector:
    """Moments ``M_l = ∫ x^l f(x) dx`` for ``l = 0..max_order``.

    ``orders`` restricts the computation to a subset (needed for the
    fat-local profiles, whose low moments diverge).  Bulk quadrature is
    the log-grid Gregory rule; declared extensions are integrated in
    closed form with incomplete gamma functions; without an extension the
    head is a low-order polynomial fitted to the first samples and the
    density must have decayed at the last grid point.
    """
    if max_order > 4:
        raise ValueError("max_order must be at most 4")
    if orders is None:
        orders = range(max_order + 1)
    out = {}
    for order in orders:
        if order > 4 or order < 0:
            raise ValueError("moment orders must lie in 0..4")
        out[f"m{order}"] = quadrature.moment(f.grid, f.values, f.ext, order,
                                             tail_check=not f.signed)
    return MomentVector(**out)


def rescale(f: GriddedDensity, a: float, b: float, grid=None) -> GriddedDensity:
    """Density ``x -> a f(b x)``.

    Without ``grid`` the result lives on ``f.grid / b`` so no
    interpolation is involved.
    """
    ext = None
    if f.ext is not None:
        ext = Extension(f.ext.p, a * f.ext.c * b ** (-f.ext.p), f.ext.rate * b)
    law = f.law.scaled(a, b) if f.law is not None else None
    out = GriddedDensity(f.grid / b, a * f.values, ext, f.signed, law)
    if grid is not None:
        out = resample(out, grid)
    return out


def normalize_to_class(f: GriddedDensity, cls, grid=None) -> GriddedDensity:
    """Rescale ``f`` so that the two required moments of ``cls`` equal 1.

    Densities that carry an exact law use its closed-form moments, so the
    rescaled law is exact as well.
    """
    if not isinstance(cls, AdmissibleClass):
        cls = AdmissibleClass.of(cls)
    p, q = cls.required_moments
    if f.law is not None:
        mp, mq = f.law.moment(p), f.law.moment(q)
    else:
        mom = compute_moments(f, orders=(p, q))
        mp, mq = mom[p], mom[q]
    if not (np.isfinite(mp) and np.isfinite(mq)) or mp <= 0 or mq <= 0:
        raise DegenerateDensityError(
            f"moments M_{p}={mp!r}, M_{q}={mq!r} must be finite and positive")
    b = mq / mp
    a = b ** (p + 1) / mp
    return rescale(f, a, b, grid)


def from_law(law: GammaLaw, grid=None) -> GriddedDensity:
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    ext = law.extension()
    return GriddedDensity(grid, ext(grid), ext, False, law)


def catalog_density(name: str, grid=None) -> GriddedDensity:
    return from_law(catalog_law(name), grid)


def exact_profile(kernel, grid=None) -> GriddedDensity:
    """Self-similar profile of the kernel with its exact extension."""
    kernel = KernelKind.parse(kernel)
    name = {"const": "G_const", "add": "G_add", "mult": "G_mult"}[kernel.value]
    return catalog_density(name, grid)


def _outside(f: GriddedDensity, x):
    """Values of the head/tail models at points outside the grid."""
    if f.ext is not None:
        return f.ext(x)
    out = np.zeros_like(x)
    below = x < f.grid[0]
    if np.any(below):
        x0, x1 = f.grid[0], f.grid[1]
        v0, v1 = f.values[0], f.values[1]
        if v0 > 0 and v1 > 0:
            # power law through the first two samples
            power = np.log(v1 / v0) / np.log(x1 / x0)
            out[below] = v0 * (x[below] / x0) ** power
        else:
            slope = (v1 - v0) / (x1 - x0)
            out[below] = v0 + slope * (x[below] - x0)
    return out


def resample_values(f: GriddedDensity, x):
    """Shape-safe interpolation in log-log coordinates.

    A quintic spline in ``(log x, log n)`` is used where it keeps every
    monotone interval monotone; the monotone cubic of :mod:`coaglab.interp`
    takes over elsewhere.

    Where the bracketing samples are not all positive the interpolant is
    piecewise linear in ``log x``.  Outside the grid the extension is used,
    or else a power-law head through the first two samples and a zero
    tail.  Densities that carry an exact law are evaluated from it
    instead.
    """
    x = np.asarray(x, dtype=float)
    if f.law is not None:
        return f.law(x)
    out = np.empty_like(x)
    inside = (x >= f.grid[0]) & (x <= f.grid[-1])
    out[~inside] = _outside(f, x[~inside])
    if np.any(inside):
        xi = x[inside]
        lx = np.log(f.grid)
        positive = f.values > 0
        linear = np.interp(np.log(xi), lx, f.values)
        if np.all(positive):
            cubic = np.exp(shape_safe_quintic(lx, np.log(f.values))(np.log(xi)))
            out[inside] = cubic
        else:
            idx = np.clip(np.searchsorted(f.grid, xi) - 1, 0, f.grid.size - 2)
            ok = positive[idx] & positive[idx + 1]
            vals = linear.copy()
            if np.any(ok):
                safe = np.where(positive, f.values, 1.0)
                cubic = np.exp(shape_safe_quintic(lx, np.log(safe))(np.log(xi)))
                vals[ok] = cubic[ok]
            out[inside] = vals
    return out


def resample(f: GriddedDensity, grid) -> GriddedDensity:
    grid = np.asarray(grid, dtype=float)
    values = resample_values(f, grid)
    if not f.signed:
        values = np.maximum(values, 0.0)
    return GriddedDensity(grid, values, f.ext, f.signed, f.law)


# -- CSV I/O ---------------------------------------------------------------

def _fmt(v):
    return format(float(v), ".17g")


def density_to_csv(f: GriddedDensity) -> str:
    """Two-column ``x,value`` text with ``#`` metadata lines first."""
    buf = io.StringIO()
    if f.ext is not None:
        if f.ext.rate == 0.5:
            buf.write(f"# tail {_fmt(f.ext.p)} {_fmt(f.ext.c)}\n")
        else:
            buf.write(f"# tail {_fmt(f.ext.p)} {_fmt(f.ext.c)} {_fmt(f.ext.rate)}\n")
    if f.signed:
        buf.write("# signed\n")
    buf.write("x,value\n")
    for x, v in zip(f.grid, f.values):
        buf.write(f"{_fmt(x)},{_fmt(v)}\n")
    return buf.getvalue()


def write_density(path, f: GriddedDensity):
    with open(path, "w", newline="\n") as fh:
        fh.write(density_to_csv(f))


def parse_density(text: str) -> GriddedDensity:
    ext = None
    signed = False
    xs, vs = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "tail":
                nums = [float(v) for v in parts[1:]]
                if len(nums) not in (2, 3):
                    raise ValueError("'# tail' expects p c [rate]")
                ext = Extension(*nums)
            elif parts and parts[0] == "signed":
                signed = True
            continue
        if line.lower().startswith("x,"):
            continue
        a, b = line.split(",")[:2]
        xs.append(float(a))
        vs.append(float(b))
    return GriddedDensity(np.array(xs), np.array(vs), ext, signed)


def read_density(path) -> GriddedDensity:
    with open(os.fspath(path)) as fh:
        return parse_density(fh.read())


def load_density(name: str, grid=None) -> GriddedDensity:
    """Catalog name or CSV path."""
    try:
        return catalog_density(name, grid)
    except KeyError:
        if os.path.exists(name):
            return read_density(name)
        raise


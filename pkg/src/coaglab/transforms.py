"""Laplace and Bernstein transforms of gridded densities.

A :class:`TransformCurve` stores the transform on an η grid together with
two auxiliary columns that make differences of class-normalised curves
accurate at small η:

``slopes``
    ``dG/dη``.
``remainder``
    the transform minus its Taylor polynomial built from the density's own
    moments: ``L[g] - (M_0 - η M_1)`` for Laplace curves and
    ``B[g] - (η M_1 - η² M_2 / 2)`` for Bernstein curves.  It is computed
    directly (never by subtraction), so it keeps full relative accuracy
    down to the smallest η.

Each curve may also carry a ``source``: an object with
``evaluate(etas) -> (values, slopes, remainder)`` that can evaluate the
same transform at arbitrary η (quadrature, closed form, interpolation or
a flow).  Flows and sup refinement use it instead of re-interpolating.
"""

import io
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import quadrature
from .interp import monotone_cubic
from .density import GammaLaw, GriddedDensity, catalog_law
from .errors import MomentDivergenceError

LAPLACE = "laplace"
BERNSTEIN = "bernstein"
KINDS = (LAPLACE, BERNSTEIN)

DEFAULT_ETA_SIZE = 400
DEFAULT_ETA_RANGE = (1e-6, 1e6)
# below this η the remainder column is used to form differences
REMAINDER_SWITCH = 1.0


def default_etas(n=DEFAULT_ETA_SIZE, lo=DEFAULT_ETA_RANGE[0], hi=DEFAULT_ETA_RANGE[1]):
    return np.geomspace(lo, hi, n)


def _check_etas(etas):
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if np.any(~np.isfinite(etas)) or np.any(etas <= 0):
        raise ValueError("transform variable eta must be positive")
    return etas


def taylor_part(kind, moments, etas):
    """Taylor polynomial subtracted to form the remainder column."""
    a, b = moments
    if kind == LAPLACE:
        return a - etas * b
    return etas * a - 0.5 * etas * etas * b


@dataclass(frozen=True, eq=False)
class TransformCurve:
    etas: np.ndarray
    values: np.ndarray
    kind: str = LAPLACE
    signed: bool = False
    remainder: Optional[np.ndarray] = None
    slopes: Optional[np.ndarray] = None
    moments: Optional[tuple] = None
    source: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        etas = np.array(self.etas, dtype=float)
        values = np.array(self.values, dtype=float)
        if etas.ndim != 1 or etas.shape != values.shape:
            raise ValueError("etas and values must be 1-d arrays of equal length")
        if np.any(etas <= 0) or np.any(np.diff(etas) <= 0):
            raise ValueError("etas must be positive and strictly increasing")
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "values", values)
        for name in ("remainder", "slopes"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=float)
                if arr.shape != etas.shape:
                    raise ValueError(f"{name} has the wrong shape")
                object.__setattr__(self, name, arr)

    def __len__(self):
        return self.etas.size

    def evaluate(self, etas):
        """``(values, slopes, remainder)`` at arbitrary η."""
        etas = _check_etas(etas)
        if self.source is None:
            object.__setattr__(self, "source", InterpolatedSource(self))
        return self.source.evaluate(etas)

    def at(self, etas) -> "TransformCurve":
        """The same transform on another η grid."""
        etas = _check_etas(etas)
        v, s, r = self.evaluate(etas)
        return TransformCurve(etas, v, self.kind, self.signed, r, s, self.moments, self.source)

    def scaled(self, factor) -> "TransformCurve":
        mom = None if self.moments is None else tuple(factor * m for m in self.moments)
        rem = None if self.remainder is None else factor * self.remainder
        sl = None if self.slopes is None else factor * self.slopes
        src = None if self.source is None else ScaledSource(self.source, factor)
        return TransformCurve(self.etas, factor * self.values, self.kind,
                              self.signed or factor < 0, rem, sl, mom, src)

    def __add__(self, other):
        return _combine(self, other, 1.0)

    def __sub__(self, other):
        return _combine(self, other, -1.0)


def _combine(c1, c2, sign):
    if c1.kind != c2.kind:
        raise ValueError("cannot combine Laplace and Bernstein curves")
    if not np.array_equal(c1.etas, c2.etas):
        raise ValueError("curves live on different eta grids")
    rem = sl = mom = None
    if c1.remainder is not None and c2.remainder is not None:
        rem = c1.remainder + sign * c2.remainder
    if c1.slopes is not None and c2.slopes is not None:
        sl = c1.slopes + sign * c2.slopes
    if c1.moments is not None and c2.moments is not None:
        mom = tuple(a + sign * b for a, b in zip(c1.moments, c2.moments))
    src = None
    if c1.source is not None and c2.source is not None:
        src = SumSource(c1.source, c2.source, sign)
    return TransformCurve(c1.etas, c1.values + sign * c2.values, c1.kind, True,
                          rem, sl, mom, src)


def difference(c1: TransformCurve, c2: TransformCurve) -> TransformCurve:
    """Signed curve ``c1 - c2`` for two curves of the same admissible class.

    The two curves share their leading Taylor coefficients, so at small η
    the difference is taken between remainder columns; at large η between
    values.  The result is exact for class members and avoids the
    cancellation that ruins a plain subtraction near η = 0.
    """
    if c1.kind != c2.kind:
        raise ValueError("cannot subtract Laplace and Bernstein curves")
    if not np.array_equal(c1.etas, c2.etas):
        raise ValueError("curves live on different eta grids")
    values = c1.values - c2.values
    if c1.remainder is not None and c2.remainder is not None:
        small = c1.etas <= REMAINDER_SWITCH
        values = np.where(small, c1.remainder - c2.remainder, values)
    src = None
    if c1.source is not None and c2.source is not None:
        src = DifferenceSource(c1.source, c2.source)
    return TransformCurve(c1.etas, values, c1.kind, True, None, None, None, src)


# -- sources ---------------------------------------------------------------

class QuadratureSource:
    """Numerical transform of a gridded density (optionally of ``x g``)."""

    def __init__(self, density: GriddedDensity, kind: str, power: int = 0):
        self.density = density
        self.kind = kind
        self.power = power

    def _int(self, kernel, etas, power):
        f = self.density
        return quadrature.integrate(f.grid, f.values, f.ext, kernel, etas,
                                    power, tail_check=not f.signed)

    def moments(self):
        f, p = self.density, self.power
        if self.kind == LAPLACE:
            orders = (p, p + 1)
        else:
            orders = (p + 1, p + 2)
        return tuple(quadrature.moment(f.grid, f.values, f.ext, o,
                                       tail_check=not f.signed) for o in orders)

    def evaluate(self, etas):
        p = self.power
        if self.kind == LAPLACE:
            values = self._int("exp", etas, p)
            slopes = -self._int("exp", etas, p + 1)
            rem = self._int("r2", etas, p)
        else:
            values = self._int("bern", etas, p)
            slopes = self._int("exp", etas, p + 1)
            rem = self._int("r3", etas, p)
        return values, slopes, rem


def binomial_remainder(alpha, y, order):
    """``(1+y)^α - Σ_{j<order} C(α, j) y^j`` without cancellation."""
    y = np.asarray(y, dtype=float)
    coef = [1.0]
    for j in range(order):
        coef.append(coef[-1] * (alpha - j) / (j + 1))
    small = y < 0.5
    out = np.empty_like(y)
    ys = y[small]
    if ys.size:
        term = coef[order] * ys ** order
        series = term.copy()
        for j in range(order, order + 80):
            term = term * (alpha - j) / (j + 1) * ys
            series = series + term
            if np.all(np.abs(term) <= 1e-17 * np.abs(series)):
                break
        out[small] = series
    yl = y[~small]
    if yl.size:
        direct = (1.0 + yl) ** alpha
        for j in range(order):
            direct = direct - coef[j] * yl ** j
        out[~small] = direct
    return out


class ClosedFormSource:
    """Exact transform of a gamma-type law ``A r^k x^{k-1} e^{-rx} / Γ(k)``.

    Laplace: ``A (1 + η/r)^{-k}``; Bernstein: ``A - A (1 + η/r)^{-k}``.
    With ``power = 1`` the law of ``x g`` is used instead.
    """

    def __init__(self, law: GammaLaw, kind: str, power: int = 0):
        for _ in range(power):
            law = law.times_x()
        self.law = law
        self.kind = kind
        if kind == LAPLACE and law.shape <= 0:
            raise MomentDivergenceError(power, "Laplace transform needs a finite zeroth moment")
        if kind == BERNSTEIN and law.shape <= -1:
            raise MomentDivergenceError(power + 1, "Bernstein transform needs a finite mass")

    def moments(self):
        law = self.law
        a, k, r = law.amplitude, law.shape, law.rate
        if self.kind == LAPLACE:
            return (a, a * k / r)
        return (-a * (-k) / r, a * (-k) * (-k - 1) / r ** 2)

    def evaluate(self, etas):
        a, k, r = self.law.amplitude, self.law.shape, self.law.rate
        y = etas / r
        power = (1.0 + y) ** (-k)
        dpower = -k / r * (1.0 + y) ** (-k - 1.0)
        if self.kind == LAPLACE:
            return a * power, a * dpower, a * binomial_remainder(-k, y, 2)
        # 1 - (1+y)^{-k} is the order-1 binomial remainder, free of cancellation
        return -a * binomial_remainder(-k, y, 1), -a * dpower, -a * binomial_remainder(-k, y, 3)


class InterpolatedSource:
    """Monotone cubic interpolation of a curve in ``log η``."""

    def __init__(self, curve: TransformCurve):
        self.curve = curve
        self._interp = monotone_cubic(np.log(curve.etas), curve.values)
        self._deriv = self._interp.derivative()
        rem = curve.remainder
        self._rem = None if rem is None else monotone_cubic(np.log(curve.etas), rem)

    def evaluate(self, etas):
        c = self.curve
        lo, hi = c.etas[0], c.etas[-1]
        if np.any(etas < lo * (1 - 1e-12)) or np.any(etas > hi * (1 + 1e-12)):
            raise ValueError("eta outside the tabulated range of the curve")
        le = np.log(np.clip(etas, lo, hi))
        values = self._interp(le)
        slopes = self._deriv(le) / etas
        if self._rem is not None:
            rem = self._rem(le)
        elif c.moments is not None:
            rem = values - taylor_part(c.kind, c.moments, etas)
        else:
            rem = None
        return values, slopes, rem


class ScaledSource:
    def __init__(self, inner, factor):
        self.inner = inner
        self.factor = factor

    def evaluate(self, etas):
        v, s, r = self.inner.evaluate(etas)
        f = self.factor
        return f * v, (None if s is None else f * s), (None if r is None else f * r)


class SumSource:
    def __init__(self, a, b, sign):
        self.a, self.b, self.sign = a, b, sign

    def evaluate(self, etas):
        va, sa, ra = self.a.evaluate(etas)
        vb, sb, rb = self.b.evaluate(etas)
        s = None if sa is None or sb is None else sa + self.sign * sb
        r = None if ra is None or rb is None else ra + self.sign * rb
        return va + self.sign * vb, s, r


class DifferenceSource:
    """Evaluator behind :func:`difference`."""

    def __init__(self, a, b):
        self.a, self.b = a, b

    def evaluate(self, etas):
        va, _, ra = self.a.evaluate(etas)
        vb, _, rb = self.b.evaluate(etas)
        values = va - vb
        if ra is not None and rb is not None:
            values = np.where(etas <= REMAINDER_SWITCH, ra - rb, values)
        return values, None, None


def curve_from_source(source, etas, kind, signed=False) -> TransformCurve:
    etas = _check_etas(etas)
    values, slopes, rem = source.evaluate(etas)
    moments = source.moments() if hasattr(source, "moments") else None
    return TransformCurve(etas, values, kind, signed, rem, slopes, moments, source)


# -- public operations -----------------------------------------------------

def laplace(f: GriddedDensity, etas=None) -> TransformCurve:
    """``∫ e^{-ηx} f(x) dx`` by quadrature over the grid plus head and tail models."""
    etas = default_etas() if etas is None else _check_etas(etas)
    return curve_from_source(QuadratureSource(f, LAPLACE), etas, LAPLACE, f.signed)


def bernstein(f: GriddedDensity, etas=None) -> TransformCurve:
    """``∫ (1 - e^{-ηx}) f(x) dx`` by quadrature; finite whenever ``M_1`` is."""
    etas = default_etas() if etas is None else _check_etas(etas)
    return curve_from_source(QuadratureSource(f, BERNSTEIN), etas, BERNSTEIN, f.signed)


def mult_bernstein(f: GriddedDensity, etas=None) -> TransformCurve:
    """Bernstein transform of ``x -> x f(x)``."""
    etas = default_etas() if etas is None else _check_etas(etas)
    return curve_from_source(QuadratureSource(f, BERNSTEIN, 1), etas, BERNSTEIN, f.signed)


CLOSED_FORMS = ("exp", "gamma(shape,rate)", "G_add_bernstein", "const_profile_laplace")


def closed_form(name: str, etas=None, kind=None) -> TransformCurve:
    """Analytic transforms used as quadrature oracles.

    ``exp`` and ``gamma(k,r)`` default to the Laplace transform (pass
    ``kind="bernstein"`` for the other one); ``G_add_bernstein`` is
    ``sqrt(1 + 2η) - 1`` and ``const_profile_laplace`` is ``1/(1 + η)``.
    """
    etas = default_etas() if etas is None else _check_etas(etas)
    key = name.strip()
    if key == "G_add_bernstein":
        law, kind = catalog_law("G_add"), BERNSTEIN
    elif key == "const_profile_laplace":
        law, kind = catalog_law("G_const"), LAPLACE
    else:
        try:
            law = catalog_law(key)
        except KeyError:
            raise KeyError(f"unknown closed form {name!r}") from None
        kind = kind or LAPLACE
    return curve_from_source(ClosedFormSource(law, kind), etas, kind)


def law_transform(law: GammaLaw, kind: str, power: int = 0, etas=None) -> TransformCurve:
    etas = default_etas() if etas is None else _check_etas(etas)
    return curve_from_source(ClosedFormSource(law, kind, power), etas, kind)


def kernel_transform(f: GriddedDensity, kernel, etas=None, closed=False) -> TransformCurve:
    """The transform the kernel's norm is built on.

    Laplace (constant), Bernstein (additive), Bernstein of ``x f``
    (multiplicative).  With ``closed=True`` and a known law the exact
    formula replaces quadrature.
    """
    from .kernels import KernelKind

    kernel = KernelKind.parse(kernel)
    etas = default_etas() if etas is None else _check_etas(etas)
    kind = LAPLACE if kernel is KernelKind.CONSTANT else BERNSTEIN
    power = 1 if kernel is KernelKind.MULTIPLICATIVE else 0
    if closed and f.law is not None:
        return law_transform(f.law, kind, power, etas)
    return curve_from_source(QuadratureSource(f, kind, power), etas, kind, f.signed)


# -- checks ----------------------------------------------------------------

def shape_violations(curve: TransformCurve, tol=1e-10):
    """Indices where monotonicity or convexity/concavity fails.

    Returns a dict with keys ``sign``, ``monotone`` and ``curvature``.
    Curvature is tested on the chords in η, i.e. with divided differences.
    """
    v, e = curve.values, curve.etas
    scale = max(np.max(np.abs(v)), 1e-300)
    dv = np.diff(v) / np.diff(e)
    d2 = np.diff(dv)
    out = {"sign": np.nonzero(v < -tol * scale)[0]}
    if curve.kind == BERNSTEIN:
        out["monotone"] = np.nonzero(np.diff(v) < -tol * scale)[0]
        out["curvature"] = np.nonzero(d2 > tol * np.max(np.abs(dv)))[0]
    else:
        out["monotone"] = np.nonzero(np.diff(v) > tol * scale)[0]
        out["curvature"] = np.nonzero(d2 < -tol * np.max(np.abs(dv)))[0]
    return out


# -- CSV I/O ---------------------------------------------------------------

def _fmt(v):
    return format(float(v), ".17g")


def curve_to_csv(curve: TransformCurve) -> str:
    buf = io.StringIO()
    buf.write(f"# kind {curve.kind}\n")
    if curve.signed:
        buf.write("# signed\n")
    buf.write("eta,value\n")
    for e, v in zip(curve.etas, curve.values):
        buf.write(f"{_fmt(e)},{_fmt(v)}\n")
    return buf.getvalue()


def write_curve(path, curve: TransformCurve):
    with open(path, "w", newline="\n") as fh:
        fh.write(curve_to_csv(curve))


def parse_curve(text: str) -> TransformCurve:
    kind, signed = LAPLACE, False
    es, vs = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) >= 2 and parts[0] == "kind":
                kind = parts[1]
            elif parts and parts[0] == "signed":
                signed = True
            continue
        if line.lower().startswith("eta,"):
            continue
        a, b = line.split(",")[:2]
        es.append(float(a))
        vs.append(float(b))
    return TransformCurve(np.array(es), np.array(vs), kind, signed)


def read_curve(path) -> TransformCurve:
    with open(os.fspath(path)) as fh:
        return parse_curve(fh.read())

"""κ-weighted sup norms of transform curves, with distances and fitted decay rates."""

import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy import optimize

from .density import GriddedDensity, compute_moments
from .errors import MomentMismatchError, SupNotBracketedError
from .kernels import AdmissibleClass, KernelKind
from .transforms import TransformCurve, difference, kernel_transform

KAPPA_SETS = {
    KernelKind.CONSTANT: (1.25, 1.5, 1.75, 2.0),
    KernelKind.ADDITIVE: (2.25, 2.5, 2.75),
    KernelKind.MULTIPLICATIVE: (2.25, 2.5, 2.75),
}
# order of vanishing at η = 0 of a difference of two class members
VANISHING_ORDER = {
    KernelKind.CONSTANT: 2.0,
    KernelKind.ADDITIVE: 3.0,
    KernelKind.MULTIPLICATIVE: 3.0,
}
FLOOR_RATIO = 1e-13
MOMENT_TOL = 1e-6
SUP_RTOL = 1e-6
# relative change across the first grid cells accepted as a converged limit
PLATEAU_RTOL = 1e-3


@dataclass(frozen=True)
class KappaNorm:
    """``‖G‖_κ = sup_η η^{-κ} |G(η)|`` for the transform of ``kernel``."""

    kappa: float
    kernel: KernelKind

    def __post_init__(self):
        object.__setattr__(self, "kernel", KernelKind.parse(self.kernel))
        lo, hi = self.kernel.norm_kappa_range
        if not lo <= self.kappa <= hi:
            raise ValueError(f"kappa={self.kappa} outside [{lo}, {hi}] where the norm is finite")

    @property
    def valid_range(self):
        return self.kernel.theorem_kappa_range

    @property
    def in_theorem_range(self) -> bool:
        return self.kernel.in_theorem_range(self.kappa)

    @property
    def theorem_rate(self) -> float:
        return self.kernel.theorem_rate(self.kappa)

    def __call__(self, curve: TransformCurve) -> float:
        return weighted_sup(curve, self.kappa, VANISHING_ORDER[self.kernel])


def weighted_ratio(curve: TransformCurve, kappa):
    return np.abs(curve.values) / curve.etas ** kappa


def weighted_sup(curve: TransformCurve, kappa, vanishing_order=None, refine=True) -> float:
    """Grid sup of ``|G(η)|/η^κ`` refined by golden-section search.

    The ratio must peak inside the grid.  A maximum at the right end, or
    at the left end while the ratio still changes there, raises
    :class:`SupNotBracketedError`.  When ``kappa`` equals the declared
    ``vanishing_order`` the ratio tends to a finite Taylor coefficient at
    ``η → 0``; a left-end maximum is then accepted once the ratio has
    settled to within ``PLATEAU_RTOL`` over the first grid cells, and the
    limit is extrapolated linearly in η.
    """
    r = weighted_ratio(curve, kappa)
    top = float(np.max(r)) if r.size else 0.0
    if top == 0.0:
        return 0.0
    eta = curve.etas
    n = r.size
    i = int(np.argmax(r))
    at_right = r[-1] >= top * (1.0 - 1e-12)
    if at_right:
        raise SupNotBracketedError("right", float(eta[-1]), float(r[-1]))
    if i == 0:
        limit_case = vanishing_order is not None and abs(kappa - vanishing_order) < 1e-12
        settled = n > 3 and abs(r[0] - r[3]) <= PLATEAU_RTOL * r[0]
        if limit_case and settled:
            # the sup is the η → 0 limit; extrapolate r(η) ≈ L - c η
            limit = r[0] + (r[0] - r[1]) * eta[0] / (eta[1] - eta[0])
            return float(max(top, limit))
        raise SupNotBracketedError("left", float(eta[0]), float(r[0]))
    if not refine or i == n - 1:
        return top
    lo, mid, hi = math.log(eta[i - 1]), math.log(eta[i]), math.log(eta[i + 1])

    def neg(le):
        v = curve.evaluate(np.array([math.exp(le)]))[0]
        return -abs(float(v[0])) / math.exp(kappa * le)

    try:
        res = optimize.minimize_scalar(neg, bracket=(lo, mid, hi), method="golden",
                                       tol=SUP_RTOL)
        best = -float(res.fun)
    except (ValueError, RuntimeError):
        best = top
    return max(top, best)


def dense_scan_sup(func, kappa, lo=1e-6, hi=1e6, n=10_000_000, chunk=1_000_000):
    """Brute-force sup of ``|func(η)|/η^κ`` over a dense log grid."""
    best = 0.0
    edges = np.linspace(math.log(lo), math.log(hi), n)
    for start in range(0, n, chunk):
        le = edges[start:start + chunk]
        eta = np.exp(le)
        best = max(best, float(np.max(np.abs(func(eta)) / eta ** kappa)))
    return best


def ratio_vanishes_at_origin(curve: TransformCurve, kappa) -> bool:
    """Weighted ratio decreasing toward 0 over the three smallest η."""
    r = weighted_ratio(curve, kappa)[:3]
    return bool(r[0] < r[1] < r[2])


def check_same_class(g1: GriddedDensity, g2: GriddedDensity, kernel, tol=MOMENT_TOL):
    cls = AdmissibleClass.of(kernel)
    orders = cls.required_moments
    m1 = compute_moments(g1, orders=orders)
    m2 = compute_moments(g2, orders=orders)
    for o in orders:
        if abs(m1[o] - m2[o]) > tol * max(1.0, abs(m1[o])):
            raise MomentMismatchError(
                f"M_{o} differs between the inputs ({m1[o]:.10g} vs {m2[o]:.10g})")


def curve_distance(c1: TransformCurve, c2: TransformCurve, kernel, kappa) -> float:
    kernel = KernelKind.parse(kernel)
    return weighted_sup(difference(c1, c2), kappa, VANISHING_ORDER[kernel])


def distance(g1: GriddedDensity, g2: GriddedDensity, kernel, kappa, etas=None) -> float:
    """κ-distance between two densities of the same admissible class."""
    kernel = KernelKind.parse(kernel)
    KappaNorm(kappa, kernel)
    check_same_class(g1, g2, kernel)
    c1 = kernel_transform(g1, kernel, etas)
    c2 = kernel_transform(g2, kernel, etas)
    return curve_distance(c1, c2, kernel, kappa)


@dataclass
class RateFit:
    rate: float
    window: tuple
    points: int
    warning: Optional[str] = None


def fit_rate(taus, distances, window=(1.0, 5.0), floor_ratio=FLOOR_RATIO) -> RateFit:
    """Negative least-squares slope of ``log d`` against ``τ``.

    Points below ``floor_ratio · d(0)`` (numerical floor) are dropped; if
    that empties part of the window it shrinks and a warning is recorded.
    """
    taus = np.asarray(taus, dtype=float)
    d = np.asarray(distances, dtype=float)
    if taus.size != d.size:
        raise ValueError("taus and distances must have equal length")
    if taus.size < 5:
        raise ValueError("need at least five checkpoints")
    d0 = d[0] if d[0] > 0 else np.max(d)
    floor = max(floor_ratio, 10.0 * np.finfo(float).eps) * d0
    lo, hi = window
    in_window = (taus >= lo - 1e-12) & (taus <= hi + 1e-12)
    usable = in_window & (d > floor)
    note = None
    if np.count_nonzero(usable) < np.count_nonzero(in_window):
        keep = np.nonzero(usable)[0]
        hi = float(taus[keep[-1]]) if keep.size else lo
        note = f"fit window shrunk to [{lo:g}, {hi:g}] (distances at numerical floor)"
    if np.count_nonzero(usable) < 2:
        return RateFit(float("nan"), (lo, hi), int(np.count_nonzero(usable)),
                       note or "fewer than two usable points")
    slope = np.polyfit(taus[usable], np.log(d[usable]), 1)[0]
    return RateFit(-float(slope), (float(lo), float(hi)), int(np.count_nonzero(usable)), note)


def contraction_holds(taus, distances, rate, slack=1e-2):
    """``d(τ_j) ≤ e^{-rate τ_j} d(0) (1 + slack)`` at every checkpoint."""
    taus = np.asarray(taus, dtype=float)
    d = np.asarray(distances, dtype=float)
    bound = np.exp(-rate * taus) * d[0] * (1.0 + slack)
    return d <= bound


@dataclass
class ContractionReport:
    kernel: str
    taus: List[float]
    kappas: List[float]
    distances: Dict[float, List[float]]
    fitted_rates: Dict[float, float] = field(default_factory=dict)
    theorem_rates: Dict[float, float] = field(default_factory=dict)
    rate_errors: Dict[float, float] = field(default_factory=dict)
    inequality: Dict[float, bool] = field(default_factory=dict)
    warnings: Dict[float, str] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @classmethod
    def build(cls, kernel, taus, distances, window=(1.0, 5.0), slack=1e-2):
        kernel = KernelKind.parse(kernel)
        kappas = sorted(distances)
        rep = cls(kernel.value, [float(t) for t in taus], kappas,
                  {k: [float(v) for v in distances[k]] for k in kappas})
        for k in kappas:
            d = np.asarray(rep.distances[k])
            theo = kernel.theorem_rate(k)
            rep.theorem_rates[k] = theo
            rep.inequality[k] = bool(np.all(contraction_holds(taus, d, theo, slack)))
            if d[0] == 0.0 and np.all(d == 0.0):
                rep.fitted_rates[k] = float("nan")
                rep.rate_errors[k] = float("nan")
                rep.warnings[k] = "identical inputs: rate fit skipped"
                continue
            fit = fit_rate(taus, d, window)
            rep.fitted_rates[k] = fit.rate
            rep.rate_errors[k] = (abs(fit.rate - theo) / abs(theo)) if theo != 0 else float("nan")
            if fit.warning:
                rep.warnings[k] = fit.warning
        return rep

    def rate_ok(self, kappa, rel_tol=0.05) -> bool:
        err = self.rate_errors.get(kappa, float("nan"))
        return bool(np.isfinite(err) and err <= rel_tol)

    @property
    def all_inequalities_hold(self) -> bool:
        return all(self.inequality.values())

    def to_records(self):
        """One JSON-ready record per κ, sorted by κ."""
        out = []
        for k in self.kappas:
            out.append({
                "kappa": k,
                "taus": self.taus,
                "distances": self.distances[k],
                "fitted_rate": _finite_or_none(self.fitted_rates.get(k)),
                "theorem_rate": self.theorem_rates.get(k),
                "rate_error": _finite_or_none(self.rate_errors.get(k)),
                "inequality_holds": self.inequality.get(k),
                "warning": self.warnings.get(k),
            })
        return out

    def to_json(self) -> str:
        doc = {"kernel": self.kernel, "results": self.to_records()}
        if self.extra:
            doc["extra"] = self.extra
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("tau,kappa,distance\n")
        for j, t in enumerate(self.taus):
            for k in self.kappas:
                buf.write(f"{t:.17g},{k:.17g},{self.distances[k][j]:.17g}\n")
        return buf.getvalue()


def _finite_or_none(v):
    if v is None or not np.isfinite(v):
        return None
    return float(v)


__all__ = [
    "KAPPA_SETS", "KappaNorm", "weighted_sup", "dense_scan_sup", "distance",
    "curve_distance", "fit_rate", "RateFit", "contraction_holds",
    "ContractionReport", "ratio_vanishes_at_origin", "check_same_class",
]

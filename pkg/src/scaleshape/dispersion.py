"""Location and dispersion functionals, empirical and population.

Empirical side: median under explicit lo/hi/averaged conventions, the
asymmetric kMAD (shortest interval around the median whose right arm is
k times the left arm, covering half the sample), and the Rousseeuw-Croux
Sn and Qn statistics, all without consistency constants.

Population side: the same three functionals evaluated on a continuous
scale-shape model by bracketed root finding and adaptive quadrature,
plus the scale-free quotient curve

    q(xi) = dispersion(beta=1, xi) / median(beta=1, xi)

whose monotone branches are inverted to estimate the shape.  Curves are
cached on Chebyshev grids; an inversion brackets the root inside one
grid cell and refines it with a single exact root solve.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import distributions as dists
from .distributions import Family, ScaleShapeModel
from .errors import BreakdownSignal, DataError, NumericError, ParameterError


class MedianConvention(enum.Enum):
    HI = "hi"
    LO = "lo"
    AVERAGE = "average"

    @classmethod
    def parse(cls, name: str) -> "MedianConvention":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ParameterError(f"unknown median convention {name!r}") from None


@dataclass(frozen=True)
class DispersionKind:
    """Which dispersion functional to use; k only applies to kMAD."""

    name: str          # "kmad" | "sn" | "qn"
    k: float = 1.0

    def __post_init__(self):
        if self.name not in ("kmad", "sn", "qn"):
            raise ParameterError(f"unknown dispersion kind {self.name!r}")
        if self.name == "kmad" and not self.k > 0:
            raise ParameterError(f"kMAD requires k > 0, got {self.k}")

    @property
    def label(self) -> str:
        return f"kmad{self.k:g}" if self.name == "kmad" else self.name


def kmad(k: float = 1.0) -> DispersionKind:
    return DispersionKind("kmad", float(k))


SN = DispersionKind("sn")
QN = DispersionKind("qn")


# ---------------------------------------------------------------------------
# empirical functionals
# ---------------------------------------------------------------------------

def empirical_median(x, convention: MedianConvention = MedianConvention.HI) -> float:
    """Sample median: hi-med x_(floor(n/2)+1), lo-med x_(ceil(n/2)), or their mean."""
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n == 0:
        raise DataError("median of an empty sample")
    hi = xs[n // 2]
    lo = xs[int(np.ceil(n / 2)) - 1]
    if convention is MedianConvention.HI:
        return float(hi)
    if convention is MedianConvention.LO:
        return float(lo)
    return float(0.5 * (lo + hi))


def empirical_kmad(x, k: float, convention: MedianConvention = MedianConvention.HI) -> float:
    """Smallest t >= 0 with #{x_i in [m - t, m + k t]} >= ceil(n/2).

    The infimum is attained at a data-driven candidate (t = m - x_i or
    t = (x_i - m)/k), so the scan over sorted candidates is exact.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n < 2:
        raise DataError("dispersion needs at least two observations")
    m = empirical_median(xs, convention)
    need = -(-n // 2)  # ceil(n/2)
    left = m - xs[xs <= m]
    right = (xs[xs >= m] - m) / k
    cand = np.unique(np.concatenate([[0.0], left, right]))
    counts = (np.searchsorted(xs, m + k * cand, side="right")
              - np.searchsorted(xs, m - cand, side="left"))
    ok = np.nonzero(counts >= need)[0]
    if ok.size == 0:
        # the largest candidate always covers everything; guard anyway
        raise NumericError("kMAD scan failed to reach coverage")
    return float(cand[ok[0]])


_EXACT_PAIRWISE_LIMIT = 2000


def qn_rank(n: int) -> int:
    """1-based order-statistic rank of Qn among the n(n-1)/2 pairwise gaps."""
    h = n // 2 + 1
    return h * (h - 1) // 2


def empirical_qn(x) -> float:
    """Qn: k-th smallest pairwise absolute difference, k = C(h,2), h = floor(n/2)+1.

    No consistency constant is applied.  Exact selection throughout: an
    O(n^2) partition for small samples, otherwise value bisection with a
    two-pointer pair count followed by an exact snap to the attained gap.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n < 2:
        raise DataError("dispersion needs at least two observations")
    k = qn_rank(n)
    if n <= _EXACT_PAIRWISE_LIMIT:
        iu = np.triu_indices(n, 1)
        diffs = xs[iu[1]] - xs[iu[0]]
        return float(np.partition(diffs, k - 1)[k - 1])

    def count_le(s):  # pairs with gap <= s
        return int((np.searchsorted(xs, xs + s, side="right") - np.arange(1, n + 1)).sum())

    lo, hi = 0.0, float(xs[-1] - xs[0])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if count_le(mid) >= k:
            hi = mid
        else:
            lo = mid
    # snap to the smallest attained gap above lo
    j = np.searchsorted(xs, xs + lo, side="right")
    best = np.inf
    for i in range(n):
        if j[i] < n:
            best = min(best, xs[j[i]] - xs[i])
    return float(best)


def _sn_inner_rank(n: int) -> int:
    # hi-med of the n-1 gaps to the other points
    return n // 2 + 1


def empirical_sn(x) -> float:
    """Sn: lo-med over i of the hi-med over j != i of |x_i - x_j|.

    Inner rank floor(n/2)+1 among the n-1 other points, outer rank
    ceil(n/2); no consistency constant.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n < 2:
        raise DataError("dispersion needs at least two observations")
    r_in = _sn_inner_rank(n)
    if n <= _EXACT_PAIRWISE_LIMIT:
        d = np.abs(xs[:, None] - xs[None, :])
        np.fill_diagonal(d, np.inf)
        inner = np.partition(d, r_in - 1, axis=1)[:, r_in - 1]
    else:
        inner = _sn_inner_large(xs, r_in)
    r_out = int(np.ceil(n / 2))
    return float(np.partition(inner, r_out - 1)[r_out - 1])


def _sn_inner_large(xs: np.ndarray, r_in: int) -> np.ndarray:
    """Per-row inner hi-meds by vectorized radius bisection on the sorted sample."""
    n = xs.size
    lo = np.zeros(n)
    hi = np.full(n, float(xs[-1] - xs[0]))

    def counts(r):  # neighbors within radius r, excluding self
        return (np.searchsorted(xs, xs + r, side="right")
                - np.searchsorted(xs, xs - r, side="left") - 1)

    for _ in range(120):
        mid = 0.5 * (lo + hi)
        ok = counts(mid) >= r_in
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
        if np.all((hi - lo) <= 1e-13 * np.maximum(hi, 1e-300)):
            break
    return hi


def empirical_dispersion(x, kind: DispersionKind,
                         convention: MedianConvention = MedianConvention.HI) -> float:
    """Dispatch to the requested dispersion statistic.

    The median convention only enters through kMAD's anchor; Sn and Qn
    carry their own fixed internal median conventions.
    """
    if kind.name == "kmad":
        return empirical_kmad(x, kind.k, convention)
    if kind.name == "qn":
        return empirical_qn(x)
    return empirical_sn(x)


# ---------------------------------------------------------------------------
# population functionals
# ---------------------------------------------------------------------------

def _probe_range(model: ScaleShapeModel) -> tuple[float, float]:
    return (float(dists.quantile(model, 1e-12)),
            float(dists.quantile(model, 1.0 - 1e-12)))


def population_kmad(model: ScaleShapeModel, k: float) -> float:
    """Root of F(m + k t) - F(m - t) = 1/2 in t (unique; the lhs is increasing)."""
    m = dists.median(model)
    left, _ = model.support()

    def g(t):
        return dists.cdf(model, m + k * t) - dists.cdf(model, m - t) - 0.5

    hi = m - left if math.isfinite(left) else max(m, model.beta)
    while g(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise NumericError("kMAD bracket expansion failed")
    return float(optimize.brentq(g, 1e-300, hi, xtol=1e-14, rtol=1e-12))


def _window_mass(model: ScaleShapeModel, t: float) -> tuple[float, float, float]:
    """Measure of {x : F(x+t) - F(x-t) >= 1/2} for a unimodal density.

    Returns (probability, x_lo, x_hi); probability 0 when no window of
    half-width t captures half the mass.
    """
    p_lo, p_hi = _probe_range(model)

    def h(x):
        return float(dists.cdf(model, x + t) - dists.cdf(model, x - t))

    res = optimize.minimize_scalar(lambda x: -h(x), bounds=(p_lo, p_hi),
                                   method="bounded",
                                   options={"xatol": 1e-10 * max(1.0, model.beta)})
    xstar, hmax = float(res.x), -float(res.fun)
    if hmax < 0.5:
        return 0.0, math.nan, math.nan
    if h(p_lo) >= 0.5:
        xlo = p_lo
    else:
        xlo = optimize.brentq(lambda x: h(x) - 0.5, p_lo, xstar, xtol=1e-13)
    if h(p_hi) >= 0.5:
        xhi = p_hi
    else:
        xhi = optimize.brentq(lambda x: h(x) - 0.5, xstar, p_hi, xtol=1e-13)
    prob = float(dists.cdf(model, xhi) - dists.cdf(model, xlo))
    return prob, float(xlo), float(xhi)


def population_sn(model: ScaleShapeModel) -> float:
    """Sn functional: med_X med_Y |X - Y| via nested root finding.

    The inner median of |Y - x| is g(x) = inf{s : F(x+s) - F(x-s) >= 1/2};
    Sn solves P(g(X) <= t) = 1/2, and {g <= t} is an interval for the
    unimodal families here, so the outer probability is an exact cdf
    difference at the interval's endpoints.
    """
    m = dists.median(model)
    left, _ = model.support()

    def outer(t):
        return _window_mass(model, t)[0] - 0.5

    hi = m - left if math.isfinite(left) else max(m, model.beta)
    while outer(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise NumericError("Sn bracket expansion failed")
    lo = hi / 2**40
    while outer(lo) > 0:
        lo /= 2**10
    return float(optimize.brentq(outer, lo, hi, xtol=1e-13, rtol=1e-11))


def population_qn(model: ScaleShapeModel) -> float:
    """Qn functional: inf{s > 0 : integral F(t+s) dF(t) >= 5/8}.

    The consistency factor in the defining display is taken as 1 on both
    the population and the sample side; it cancels in the quotient
    matching either way.
    """
    p_lo, p_hi = _probe_range(model)
    mode_pts = [dists.median(model)]

    def K(s):
        val, _ = integrate.quad(
            lambda t: dists.cdf(model, t + s) * dists.pdf(model, t),
            p_lo, p_hi, limit=300, epsabs=1e-12, epsrel=1e-10,
            points=[p for p in mode_pts if p_lo < p < p_hi])
        return val - 0.625

    hi = max(dists.median(model), model.beta)
    while K(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise NumericError("Qn bracket expansion failed")
    return float(optimize.brentq(K, 1e-300, hi, xtol=1e-13, rtol=1e-11))


def population_dispersion(model: ScaleShapeModel, kind: DispersionKind) -> float:
    if kind.name == "kmad":
        return population_kmad(model, kind.k)
    if kind.name == "qn":
        return population_qn(model)
    return population_sn(model)


# ---------------------------------------------------------------------------
# quotient curve q(xi) = dispersion / median at beta = 1
# ---------------------------------------------------------------------------

def quotient(family: Family, kind: DispersionKind, xi: float) -> float:
    """Scale-free dispersion-to-median quotient at shape xi (beta drops out)."""
    model = ScaleShapeModel(family, 1.0, xi)
    return population_dispersion(model, kind) / dists.median(model)


# brackets for the shape inversion; expanded on demand
_XI_HI = {Family.GPD: 30.0, Family.GEV: 30.0, Family.WEIBULL: 30.0, Family.GAMMA: 50.0}
_XI_LO_UNRESTRICTED = {Family.GPD: -5.0, Family.GEV: -3.0}
_XI_TINY = 1e-3
_GRID_POINTS = 64
_BRANCH_REF_XI = 0.7   # GEV estimation is confined to the branch holding this shape


def _cheb_grid(lo: float, hi: float, n: int) -> np.ndarray:
    k = np.arange(n)
    nodes = np.cos(np.pi * (2 * k + 1) / (2 * n))
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes)


@dataclass(frozen=True)
class QuotientCurve:
    """Monotone branch of xi -> q(xi) with its solvable range and cache."""

    family: Family
    kind: DispersionKind
    xi_lo: float
    xi_hi: float
    increasing: bool
    qcheck: float            # lower solvability limit of the quotient
    qbar: float              # upper solvability limit
    xi0: float | None        # GEV maximizer, None elsewhere
    grid_xi: np.ndarray
    grid_q: np.ndarray

    def q_range(self) -> tuple[float, float]:
        lo = min(self.grid_q[0], self.grid_q[-1])
        hi = max(self.grid_q[0], self.grid_q[-1])
        return float(lo), float(hi)


_curve_cache: dict[tuple, QuotientCurve] = {}
_curve_lock = threading.Lock()


def _gev_xi0(kind: DispersionKind) -> float:
    res = optimize.minimize_scalar(lambda x: -quotient(Family.GEV, kind, x),
                                   bounds=(0.05, 6.0), method="bounded",
                                   options={"xatol": 1e-6})
    return float(res.x)


def _build_curve(family: Family, kind: DispersionKind, restricted: bool) -> QuotientCurve:
    if family is Family.GEV:
        xi0 = _gev_xi0(kind)
        if _BRANCH_REF_XI < xi0:    # increasing branch left of the maximum
            lo = 0.0 if restricted else _XI_LO_UNRESTRICTED[family]
            hi, increasing = xi0, True
        else:                       # decreasing branch right of the maximum
            lo, hi, increasing = xi0, _XI_HI[family], False
        qbar = quotient(family, kind, xi0)
        qcheck = quotient(family, kind, 0.0)
    elif family is Family.GPD:
        xi0 = None
        lo = 0.0 if restricted else _XI_LO_UNRESTRICTED[family]
        hi, increasing = _XI_HI[family], True
        qcheck = quotient(family, kind, 0.0)
        qbar = 1.0
    else:  # Weibull, Gamma: q decreases from 1 (xi -> 0) to 0 (xi -> inf)
        xi0 = None
        lo, hi, increasing = _XI_TINY, _XI_HI[family], False
        qcheck, qbar = 0.0, 1.0

    grid = _cheb_grid(lo if lo > -math.inf else -5.0, hi, _GRID_POINTS)
    if lo == 0.0 and family in (Family.GPD, Family.GEV):
        grid[0] = 0.0   # exact Exponential/Gumbel limit endpoint
    qs = np.array([quotient(family, kind, x) for x in grid])
    return QuotientCurve(family, kind, float(grid[0]), float(grid[-1]),
                         increasing, float(qcheck), float(qbar), xi0, grid, qs)


def quotient_curve(family: Family, kind: DispersionKind,
                   restricted: bool = True) -> QuotientCurve:
    """Cached quotient branch; built once per (family, kind, restriction)."""
    key = (family, kind.name, round(kind.k, 12), restricted)
    curve = _curve_cache.get(key)
    if curve is None:
        with _curve_lock:
            curve = _curve_cache.get(key)
            if curve is None:
                curve = _build_curve(family, kind, restricted)
                _curve_cache[key] = curve
    return curve


def quotient_limits(family: Family, kind: DispersionKind) -> tuple[float, float]:
    """(qcheck, qbar): the solvable range of the quotient for this family."""
    curve = quotient_curve(family, kind, restricted=True)
    return curve.qcheck, curve.qbar


def quotient_invert(family: Family, kind: DispersionKind, qhat: float,
                    restricted: bool = True) -> float:
    """Solve q(xi) = qhat on the family's monotone branch.

    Raises BreakdownSignal("explosion") at or above the upper solvable
    limit and BreakdownSignal("implosion") at or below the lower one
    (for the restricted branch; the unrestricted GPD/GEV branch extends
    below the xi -> 0 limit into negative shapes).
    """
    curve = quotient_curve(family, kind, restricted)
    qmin, qmax = curve.q_range()
    upper = curve.qbar
    lower = curve.qcheck if restricted else qmin
    if qhat >= upper:
        raise BreakdownSignal("explosion", qhat, (lower, upper))
    if qhat <= lower:
        raise BreakdownSignal("implosion", qhat, (lower, upper))
    if qhat >= qmax or qhat <= qmin:
        # inside the theoretical range but beyond the tabulated branch
        raise NumericError(
            f"quotient {qhat:.6g} outside the tabulated branch "
            f"[{qmin:.6g}, {qmax:.6g}] for {family.value}/{kind.label}")

    # locate the grid cell holding qhat, then refine with one exact solve
    xg, qg = curve.grid_xi, curve.grid_q
    signed_q = qg if curve.increasing else -qg
    target = qhat if curve.increasing else -qhat
    i = int(np.clip(np.searchsorted(signed_q, target) - 1, 0, len(xg) - 2))
    lo_x, hi_x = xg[i], xg[i + 1]

    def f(x):
        return quotient(family, kind, x) - qhat

    f_lo, f_hi = f(lo_x), f(hi_x)
    if f_lo == 0.0:
        return float(lo_x)
    if f_hi == 0.0:
        return float(hi_x)
    if f_lo * f_hi > 0:   # interpolation cell missed; fall back to the branch
        lo_x, hi_x = xg[0], xg[-1]
    return float(optimize.brentq(f, lo_x, hi_x, xtol=1e-12, rtol=1e-11))

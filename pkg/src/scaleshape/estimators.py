"""Point estimators for (scale, shape): quantile matching and median-dispersion matching.

The quantile (elementary percentile) estimators match the empirical 50%
and 75% quantiles against their model counterparts: closed form for the
GPD and Weibull, a one-dimensional root solve for the GEV ratio curve
q0 and for the Gamma quantile ratio.  The median-dispersion estimators
divide a robust dispersion statistic (kMAD, Sn, or Qn) by the sample
median and invert the scale-free quotient curve for the shape, then
recover the scale from the median.

Every estimator is scale-equivariant: rescaling the data by c multiplies
the scale estimate by c and leaves the shape estimate unchanged.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import dispersion as disp
from . import distributions as dists
from .distributions import Family, ScaleShapeModel
from .errors import BreakdownSignal, DataError, DegenerateSampleError, NumericError

LOG2 = math.log(2.0)
_A = math.log(4.0 / 3.0)   # -log(1 - 3/4) of the Gumbel reduced quantile
_B = math.log(2.0)

# Small-shape limit of the GEV quantile-ratio curve: log(_A/_B)/log(_B).
Q0_AT_ZERO = math.log(_A / _B) / math.log(_B)


class EstimateStatus(enum.Enum):
    VALID = "valid"
    INVALID_NEG_SCALE = "invalid_neg_scale"
    INVALID_NEG_SHAPE = "invalid_neg_shape"
    BREAKDOWN_EXPLOSION = "breakdown_explosion"
    BREAKDOWN_IMPLOSION = "breakdown_implosion"


@dataclass(frozen=True)
class Estimate:
    """Estimated (beta, xi) with a validity/breakdown status.

    ``beta_hat``/``xi_hat`` are NaN unless status is VALID.  ``q2``/``q3``
    expose the matched empirical quantiles (quantile estimators) and
    ``quotient`` the dispersion-to-median ratio (LD estimators) for
    diagnostics and testing.
    """

    estimator: str
    status: EstimateStatus
    beta_hat: float = math.nan
    xi_hat: float = math.nan
    restricted: bool = False
    q2: float = math.nan
    q3: float = math.nan
    quotient: float = math.nan

    @property
    def valid(self) -> bool:
        return self.status is EstimateStatus.VALID


def empirical_quantile(x, p: float) -> float:
    """Right-continuous inverse of the empirical cdf, x_(ceil(np)).

    For p = 1/2 the hi-med x_(floor(n/2)+1) is used instead, matching
    the median convention of the breakdown-count formulas.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n == 0:
        raise DataError("quantile of an empty sample")
    if p == 0.5:
        return float(xs[n // 2])
    rank = int(np.ceil(n * p))
    return float(xs[min(max(rank, 1), n) - 1])


def pe_ranks(n: int) -> tuple[int, int]:
    """1-based order-statistic ranks used by the quantile estimators."""
    return n // 2 + 1, int(np.ceil(0.75 * n))


def _pe_quantiles(x) -> tuple[float, float, int]:
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n < 4:
        raise DataError("quantile estimators need at least four observations")
    i1, i2 = pe_ranks(n)
    return float(xs[i1 - 1]), float(xs[i2 - 1]), n


def pickands_gpd(x, restricted: bool = False) -> Estimate:
    """GPD quantile estimator from (Q2, Q3).

    xi = log2((Q3 - Q2)/Q2), beta = xi Q2^2 / (Q3 - 2 Q2); requires
    Q3 > 2 Q2 for a positive scale, in which case the shape is
    automatically positive.
    """
    q2, q3, _ = _pe_quantiles(x)
    if q2 <= 0:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SCALE, restricted=restricted,
                        q2=q2, q3=q3)
    if q3 <= 2.0 * q2:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SCALE, restricted=restricted,
                        q2=q2, q3=q3)
    xi = math.log2((q3 - q2) / q2)
    beta = xi * q2 * q2 / (q3 - 2.0 * q2)
    return Estimate("pe", EstimateStatus.VALID, beta, xi, restricted, q2, q3)


def q0(xi: float) -> float:
    """GEV quantile-ratio curve (Q3 - Q2)/Q2 as a function of the shape.

    Strictly increasing on the real line; the xi = 0 value is taken as
    the analytic limit.
    """
    if abs(xi) < 1e-9:
        return Q0_AT_ZERO
    return (_A ** -xi - _B ** -xi) / (_B ** -xi - 1.0)


def q0_invert(r: float) -> float:
    """Inverse of q0 by bracketed root finding (r > 0)."""
    if not r > 0:
        raise DataError(f"q0 takes positive values only, got ratio {r}")
    lo, hi = -1.0, 1.0
    while q0(lo) > r:
        lo *= 2.0
        if lo < -1e6:
            raise NumericError("q0 inversion bracket failed (low)")
    while q0(hi) < r:
        hi *= 2.0
        if hi > 1e6:
            raise NumericError("q0 inversion bracket failed (high)")
    return float(optimize.brentq(lambda t: q0(t) - r, lo, hi,
                                 xtol=1e-12, rtol=1e-11))


def _gev_beta(q2: float, q3: float, xi: float) -> float:
    """Scale estimate for the GEV quantile match.

    The correction factor diverges like 1/xi at zero while the leading
    term vanishes like xi; the product has a finite limit, taken
    analytically below the zero threshold.
    """
    la, lb = math.log(_A), math.log(_B)
    if abs(xi) < 1e-9:
        return q2 * q2 * (2.0 * lb - la) / ((q3 - 2.0 * q2) * lb * lb)
    a, b = _A ** -xi, _B ** -xi
    factor = (a + 1.0 - 2.0 * b) / (b * b + 1.0 - 2.0 * b)
    return xi * q2 * q2 / (q3 - 2.0 * q2) * factor


def pickands_gev(x, restricted: bool = False) -> Estimate:
    """GEV quantile estimator: solve q0(xi) = (Q3 - Q2)/Q2, then match the scale."""
    q2, q3, _ = _pe_quantiles(x)
    if q2 <= 0 or q3 <= q2:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SCALE, restricted=restricted,
                        q2=q2, q3=q3)
    if q3 <= 2.0 * q2:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SCALE, restricted=restricted,
                        q2=q2, q3=q3)
    if restricted and q3 <= (1.0 + Q0_AT_ZERO) * q2:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SHAPE, restricted=restricted,
                        q2=q2, q3=q3)
    xi = q0_invert((q3 - q2) / q2)
    beta = _gev_beta(q2, q3, xi)
    if beta <= 0:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SCALE, restricted=restricted,
                        q2=q2, q3=q3)
    return Estimate("pe", EstimateStatus.VALID, beta, xi, restricted, q2, q3)


def pickands_weibull(x) -> Estimate:
    """Weibull quantile estimator; defined for any 0 < Q2 < Q3.

    xi = log(log4 / log2) / (log Q3 - log Q2) reduced from the Gumbel
    quantiles of the log-observations; beta = Q2 / (log 2)^(1/xi).
    """
    q2, q3, _ = _pe_quantiles(x)
    if q2 <= 0:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SCALE, q2=q2, q3=q3)
    if q3 == q2:
        raise DegenerateSampleError("tied quantiles: Weibull shape is undefined")
    xi = (math.log(_A) - math.log(_B)) / (math.log(q3) - math.log(q2))
    beta = q2 / LOG2 ** (1.0 / xi)
    return Estimate("pe", EstimateStatus.VALID, beta, xi, False, q2, q3)


def _gamma_quantile_ratio(xi: float) -> float:
    m = ScaleShapeModel(Family.GAMMA, 1.0, xi)
    return dists.quantile(m, 0.75) / dists.quantile(m, 0.5)


def pickands_gamma(x) -> Estimate:
    """Gamma quantile estimator: the 75%/50% quantile ratio pins the shape."""
    q2, q3, _ = _pe_quantiles(x)
    if q2 <= 0:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SCALE, q2=q2, q3=q3)
    r = q3 / q2
    if r <= 1.0:
        return Estimate("pe", EstimateStatus.INVALID_NEG_SHAPE, q2=q2, q3=q3)
    lo, hi = 1e-3, 50.0
    # ratio decreases in the shape; expand the bracket if the target escapes it
    while _gamma_quantile_ratio(hi) > r:
        hi *= 4.0
        if hi > 1e6:
            return Estimate("pe", EstimateStatus.INVALID_NEG_SHAPE, q2=q2, q3=q3)
    while _gamma_quantile_ratio(lo) < r:
        lo /= 8.0
        if lo < 1e-12:
            return Estimate("pe", EstimateStatus.INVALID_NEG_SHAPE, q2=q2, q3=q3)
    xi = float(optimize.brentq(lambda t: _gamma_quantile_ratio(t) - r, lo, hi,
                               xtol=1e-12, rtol=1e-11))
    beta = q2 / dists.quantile(ScaleShapeModel(Family.GAMMA, 1.0, xi), 0.5)
    return Estimate("pe", EstimateStatus.VALID, beta, xi, False, q2, q3)


def pickands(x, family: Family, restricted: bool = False) -> Estimate:
    if family is Family.GPD:
        return pickands_gpd(x, restricted)
    if family is Family.GEV:
        return pickands_gev(x, restricted)
    if family is Family.WEIBULL:
        return pickands_weibull(x)
    return pickands_gamma(x)


def ld_estimate(x, kind: disp.DispersionKind, family: Family,
                restricted: bool = True,
                convention: disp.MedianConvention = disp.MedianConvention.HI) -> Estimate:
    """Median-dispersion estimator: invert the quotient curve, then match the median.

    Breakdown of the quotient is reported through the status rather than
    raised: explosion when the quotient reaches its upper solvable limit
    and implosion when it reaches the lower one.
    """
    xa = np.asarray(x, dtype=float)
    if xa.size < 2:
        raise DataError("LD estimation needs at least two observations")
    m_hat = disp.empirical_median(xa, convention)
    if m_hat <= 0:
        return Estimate(f"med{kind.label}", EstimateStatus.INVALID_NEG_SCALE,
                        restricted=restricted)
    s_hat = disp.empirical_dispersion(xa, kind, convention)
    qhat = s_hat / m_hat
    name = f"med{kind.label}"
    if s_hat <= 0:
        return Estimate(name, EstimateStatus.BREAKDOWN_IMPLOSION,
                        restricted=restricted, quotient=qhat)
    try:
        xi = disp.quotient_invert(family, kind, qhat, restricted)
    except BreakdownSignal as sig:
        status = (EstimateStatus.BREAKDOWN_EXPLOSION if sig.direction == "explosion"
                  else EstimateStatus.BREAKDOWN_IMPLOSION)
        return Estimate(name, status, restricted=restricted, quotient=qhat)
    beta = m_hat / dists.median(ScaleShapeModel(family, 1.0, xi))
    return Estimate(name, EstimateStatus.VALID, beta, xi, restricted,
                    quotient=qhat)

"""Breakdown-point diagnostics: sample counts, asymptotic values, and
exact finite-sample count distributions.

Sample side
-----------
``fsbp_pe`` and ``fsbp_medkmad`` count, for a concrete sample, how many
observations an adversary must replace to break the corresponding
estimator, following the constructive characterizations:

* quantile estimators: the observations in the closed window
  ``[2*Q2, Q3]`` (GPD, and GEV without shape restriction) or
  ``[(1+q0(0))*Q2, Q3]`` (GEV restricted to positive shapes), where Q2
  is the hi-med and Q3 the order statistic of rank ceil(3n/4);
* median-kMAD matching: ``N' = #{m < x <= (k+1) m}`` replacements force
  the dispersion-to-median quotient to its upper limit, while
  ``N'' = ceil(n/2) - (#inside - 1)`` replacements fill the open
  interval ``((1-qc) m, (1+k qc) m)`` (the median itself not counted)
  far enough to push the quotient to its lower limit ``qc``.

Distribution side
-----------------
``count_pmf`` evaluates the exact distribution of these counts under an
ideal model by integrating order-statistic densities over the median's
probability position u.  All integrands are assembled in log space so
cells as small as 1e-300 and far below remain meaningful; the GEV
families, whose support crosses zero, contribute an explicit
``invalid_mass`` = P(sample median <= 0) on which the estimator is
already undefined and the breakdown count is zero.

Derived quantities: ``efsbp`` (the expected breakdown fraction),
``p0`` (probability of a zero count), and ``q1`` (the lower count
quantile calibrated to a simulation-study size).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import binom

from . import dispersion as disp
from . import distributions as dists
from .distributions import Family, ScaleShapeModel
from .errors import DataError, NumericError, ParameterError
from .estimators import Q0_AT_ZERO, pe_ranks
from .quadrature import integrate_log, log1mexp


class CountKind(enum.Enum):
    N0 = "n0"                  # quantile-window count, threshold 2*Q2
    N0_TILDE = "n0_tilde"      # quantile-window count, restricted-GEV threshold
    NPRIME = "nprime"          # kMAD explosion count
    NDPRIME = "ndprime"        # kMAD implosion count


@dataclass(frozen=True)
class BreakdownReport:
    """Counts and breakdown fraction for one sample."""

    estimator: str
    n: int
    fsbp: float
    counts: dict = field(default_factory=dict)
    restricted: bool = False


@dataclass(frozen=True)
class CountDistribution:
    """Exact pmf of a breakdown count under an ideal model.

    ``values[i]`` carries probability ``pmf[i]``; ``log_pmf`` preserves
    magnitudes that underflow.  ``invalid_mass`` is the probability of a
    sample whose median quantile configuration already invalidates the
    estimator (positive only for GEV); the breakdown fraction is zero
    there, and pmf + invalid_mass sums to one.
    """

    kind: CountKind
    n: int
    model: ScaleShapeModel
    k: float | None
    values: np.ndarray
    pmf: np.ndarray
    log_pmf: np.ndarray
    invalid_mass: float

    def mean_count(self) -> float:
        return float(np.sum(np.maximum(self.values, 0) * self.pmf))

    def cdf_below(self, v: int) -> float:
        """P(count < v), counting the invalid mass at zero."""
        mask = self.values < v
        total = float(self.pmf[mask].sum())
        if v > 0:
            total += self.invalid_mass
        return total


# ---------------------------------------------------------------------------
# sample-wise counters
# ---------------------------------------------------------------------------

def equivariant_upper_bound(x) -> float:
    """Largest breakdown fraction any scale-equivariant estimator allows:
    floor((n - n0 - 1)_+ / 2) / n with n0 the highest tie multiplicity."""
    xs = np.asarray(x, dtype=float)
    n = xs.size
    if n == 0:
        raise DataError("empty sample")
    _, counts = np.unique(xs, return_counts=True)
    n0 = int(counts.max())
    return (max(n - n0 - 1, 0) // 2) / n


def _pe_window_count(xs: np.ndarray, mult: float) -> tuple[int, float, float]:
    n = xs.size
    i1, i2 = pe_ranks(n)
    q2, q3 = xs[i1 - 1], xs[i2 - 1]
    if q2 <= 0:
        return 0, q2, q3
    cnt = int(np.count_nonzero((xs >= mult * q2) & (xs <= q3)))
    return cnt, q2, q3


def fsbp_pe(x, family: Family, restricted: bool = False,
            gev_threshold: str = "consistent") -> BreakdownReport:
    """Breakdown count for the quantile estimator on one sample.

    ``gev_threshold`` selects the restricted-GEV window multiplier:
    "consistent" uses 1 + q0(0) (the value matching the estimator's own
    positivity condition), "printed" uses the bare q0(0) variant for
    auditing.  The fraction is capped at 1/4: replacing the upper
    quarter of the sample always drives the 75% quantile away.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n < 4:
        raise DataError("breakdown counts need at least four observations")
    if family is Family.WEIBULL:
        # the Weibull quantile match stays valid for all 0 < Q2 < Q3
        return BreakdownReport("pe", n, 0.25, {}, restricted)
    if family is Family.GAMMA:
        raise ParameterError("no analytic breakdown count for the Gamma "
                             "quantile estimator; use the simulation path")
    if family is Family.GEV and restricted:
        mult = (1.0 + Q0_AT_ZERO) if gev_threshold == "consistent" else Q0_AT_ZERO
        label = "n0_tilde"
    else:
        mult, label = 2.0, "n0"
    cnt, _, _ = _pe_window_count(xs, mult)
    i2 = pe_ranks(n)[1]
    cnt = min(cnt, n - i2 + 1)
    return BreakdownReport("pe", n, min(cnt / n, 0.25), {label: cnt}, restricted)


def kmad_counts(xs: np.ndarray, k: float, qcheck: float,
                convention: disp.MedianConvention = disp.MedianConvention.HI
                ) -> tuple[int, int]:
    """(N', N'') for a sorted sample: explosion and implosion move counts.

    The implosion interval count excludes the median point itself (one
    copy) whenever the median is an observation.
    """
    n = xs.size
    m = disp.empirical_median(xs, convention)
    nprime = int(np.count_nonzero((xs > m) & (xs <= (k + 1.0) * m)))
    inside = int(np.count_nonzero((xs > (1.0 - qcheck) * m)
                                  & (xs < (1.0 + k * qcheck) * m)))
    if np.any(xs == m):
        inside -= 1
    ndprime = int(np.ceil(n / 2)) - inside
    return nprime, ndprime


def fsbp_medkmad(x, k: float, family: Family, restricted: bool = False,
                 convention: disp.MedianConvention = disp.MedianConvention.HI,
                 qcheck: float | None = None) -> BreakdownReport:
    """Breakdown counts for the median-kMAD estimator on one sample.

    Unrestricted GPD and the always-positive Weibull/Gamma shapes break
    only by explosion (N'); the restricted GPD also breaks by implosion,
    so its fraction is min(N', N'')/n, floored at zero when the sample
    is already past a limit.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if n < 2:
        raise DataError("breakdown counts need at least two observations")
    if family is Family.GEV:
        raise ParameterError("no closed-form kMAD breakdown counts for GEV; "
                             "use the simulation path")
    if qcheck is None:
        qcheck = disp.quotient_limits(family, disp.kmad(k))[0]
    nprime, ndprime = kmad_counts(xs, k, qcheck, convention)
    if family is Family.GPD and restricted:
        fs = max(0, min(nprime, ndprime)) / n
    else:
        fs = nprime / n
    return BreakdownReport(f"medkmad{k:g}", n, fs,
                           {"nprime": nprime, "ndprime": ndprime}, restricted)


# ---------------------------------------------------------------------------
# asymptotic breakdown points
# ---------------------------------------------------------------------------

def abp(estimator: str, family: Family, xi: float, k: float = 10.0,
        restricted: bool = False) -> float:
    """Asymptotic breakdown point at shape xi (closed form).

    Quantile estimators: the ideal-model mass of the defining window,
    e.g. (2^(xi+1) - 1)^(-1/xi) - 1/4 for the GPD.  Median-kMAD:
    eps' = F((k+1) m) - 1/2 for explosion and
    eps'' = 1/2 - F((k qc + 1) m) + F((1 - qc) m) for implosion, with
    the restricted value min(eps', eps'').
    """
    model = ScaleShapeModel(family, 1.0, xi)
    m = dists.median(model)
    if estimator == "pe":
        if family is Family.WEIBULL:
            return 0.25
        if family is Family.GAMMA:
            raise ParameterError("no closed-form breakdown point for the "
                                 "Gamma quantile estimator")
        if family is Family.GEV and restricted:
            return 0.75 - float(dists.cdf(model, (1.0 + Q0_AT_ZERO) * m))
        return 0.75 - float(dists.cdf(model, 2.0 * m))
    if estimator == "medkmad":
        if family is Family.GEV:
            raise ParameterError("no closed-form kMAD breakdown point for GEV")
        qc = disp.quotient_limits(family, disp.kmad(k))[0]
        eps1 = float(dists.cdf(model, (k + 1.0) * m)) - 0.5
        if not (family is Family.GPD and restricted):
            return eps1
        eps2 = (0.5 - float(dists.cdf(model, (k * qc + 1.0) * m))
                + float(dists.cdf(model, (1.0 - qc) * m)))
        return min(eps1, eps2)
    raise ParameterError(f"unknown estimator {estimator!r}")


# ---------------------------------------------------------------------------
# exact count distributions (order-statistic integrals)
# ---------------------------------------------------------------------------

def _u_lower(model: ScaleShapeModel) -> float:
    # GEV puts mass below zero; the window constructions need a positive median
    return float(dists.cdf(model, 0.0)) if model.family is Family.GEV else 0.0


def _median_invalid_mass(model: ScaleShapeModel, n: int, rank: int) -> float:
    p0_ = float(dists.cdf(model, 0.0))
    if p0_ <= 0.0:
        return 0.0
    return float(binom.sf(rank - 1, n, p0_))


def _panel_points(u_lo: float, n: int, rank: int) -> list[float]:
    """Initial panels bracketing the beta-density peak of the median position."""
    mode = (rank - 1) / (n - 1) if n > 1 else 0.5
    sd = math.sqrt(max(mode * (1 - mode), 0.05) / n)
    pts = {u_lo, 1.0}
    for c in (-12.0, -6.0, -2.0, 0.0, 2.0, 6.0, 12.0):
        pts.add(min(max(mode + c * sd, u_lo + 1e-13), 1.0 - 1e-13))
    return sorted(pts)


def _log_interval_above(model: ScaleShapeModel, t: np.ndarray,
                        log_one_minus_u: np.ndarray) -> np.ndarray:
    """log(F(t) - u) for thresholds t at or above the u-quantile."""
    lsf = np.asarray(dists.log_sf(model, t), dtype=float)
    with np.errstate(invalid="ignore"):
        out = log_one_minus_u + log1mexp(np.minimum(lsf - log_one_minus_u, 0.0))
    return np.where(lsf >= log_one_minus_u, -np.inf, out)


def _log_interval_below(model: ScaleShapeModel, t: np.ndarray,
                        log_u: np.ndarray) -> np.ndarray:
    """log(u - F(t)) for thresholds t at or below the u-quantile."""
    ft = np.asarray(dists.cdf(model, t), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lcdf = np.log(ft)
        out = log_u + log1mexp(np.minimum(lcdf - log_u, 0.0))
    return np.where(ft <= 0.0, log_u, np.where(lcdf >= log_u, -np.inf, out))


def _logC(n: int, parts: list[np.ndarray]) -> np.ndarray:
    rest = n - sum(parts)
    out = gammaln(n + 1)
    for p in parts + [rest]:
        out = out - gammaln(np.asarray(p) + 1.0)
    return out


def _pe_count_log_pmf(model: ScaleShapeModel, n: int, mult: float
                      ) -> tuple[np.ndarray, np.ndarray, float]:
    """log pmf of the quantile-window count (values 0..i2-i1) plus invalid mass."""
    i1, i2 = pe_ranks(n)
    u_lo = _u_lower(model)
    ls = np.arange(1, i2 - i1 + 1)
    j2 = i2 - i1 - ls
    above = n - i2 + ls
    logc = _logC(n - 1, [np.full_like(ls, i1 - 1), j2])

    j2_zero = np.arange(i2 - i1, n - i1 + 1)
    above_zero = n - i1 - j2_zero
    logc_zero = _logC(n - 1, [np.full_like(j2_zero, i1 - 1), j2_zero])

    j2_all = np.concatenate([j2, j2_zero])
    ab_all = np.concatenate([above, above_zero])
    lc_all = np.concatenate([logc, logc_zero])

    def log_f(u):
        x = np.asarray(dists.quantile(model, u))
        log_u = np.log(u)
        log_1mu = np.log1p(-u)
        lmid = _log_interval_above(model, mult * x, log_1mu)
        lsf = np.asarray(dists.log_sf(model, mult * x), dtype=float)
        base = math.log(n) + lc_all[:, None] + (i1 - 1) * log_u[None, :]
        mid = np.where(j2_all[:, None] > 0, j2_all[:, None] * lmid[None, :], 0.0)
        top = np.where(ab_all[:, None] > 0, ab_all[:, None] * lsf[None, :], 0.0)
        return base + mid + top

    log_parts = integrate_log(log_f, _panel_points(u_lo, n, i1))
    log_pl = log_parts[:len(ls)]
    log_p0 = float(logsumexp(log_parts[len(ls):]))
    values = np.concatenate([[0], ls])
    log_pmf = np.concatenate([[log_p0], log_pl])
    invalid = _median_invalid_mass(model, n, i1)
    return values, log_pmf, invalid


def _nprime_log_pmf(model: ScaleShapeModel, n: int, k: float
                    ) -> tuple[np.ndarray, np.ndarray, float]:
    """log pmf of the kMAD explosion count N' (values 0..n-h)."""
    h = n // 2 + 1
    ls = np.arange(0, n - h + 1)
    above = n - h - ls
    logc = _logC(n - 1, [np.full_like(ls, h - 1), ls])
    u_lo = _u_lower(model)

    def log_f(u):
        x = np.asarray(dists.quantile(model, u))
        t = (k + 1.0) * x
        log_u = np.log(u)
        log_1mu = np.log1p(-u)
        lmid = _log_interval_above(model, t, log_1mu)
        lsf = np.asarray(dists.log_sf(model, t), dtype=float)
        base = math.log(n) + logc[:, None] + (h - 1) * log_u[None, :]
        mid = np.where(ls[:, None] > 0, ls[:, None] * lmid[None, :], 0.0)
        top = np.where(above[:, None] > 0, above[:, None] * lsf[None, :], 0.0)
        return base + mid + top

    log_pmf = integrate_log(log_f, _panel_points(u_lo, n, h))
    invalid = _median_invalid_mass(model, n, h)
    return ls, log_pmf, invalid


def _ndprime_interval_logprobs(model: ScaleShapeModel, k: float, qcheck: float,
                               u: np.ndarray):
    """Conditional log-probabilities of the four regions around the median.

    Given the median's position u, a below-median point lies in the open
    band ((1-qc)m, m) with conditional probability pb and an above-median
    point in (m, (1+k qc)m) with probability pc.
    """
    x = np.asarray(dists.quantile(model, u))
    log_u = np.log(u)
    log_1mu = np.log1p(-u)
    lo_band = _log_interval_below(model, (1.0 - qcheck) * x, log_u)      # log(u - F(t-))
    hi_band = _log_interval_above(model, (1.0 + k * qcheck) * x, log_1mu)  # log(F(t+) - u)
    log_pb = lo_band - log_u
    log_pc = hi_band - log_1mu
    return np.minimum(log_pb, 0.0), np.minimum(log_pc, 0.0)


def _band_binomial_logpmfs(model: ScaleShapeModel, n: int, k: float,
                           qcheck: float, u: np.ndarray):
    """Binomial log-pmf matrices for the inside-band counts (b, c) given u."""
    h = n // 2 + 1
    nb, nc = h - 1, n - h
    log_pb, log_pc = _ndprime_interval_logprobs(model, k, qcheck, u)
    bs = np.arange(nb + 1)
    cs = np.arange(nc + 1)
    lb = (_logC(nb, [bs])[:, None] + bs[:, None] * log_pb[None, :]
          + (nb - bs)[:, None] * log1mexp(np.minimum(log_pb[None, :], -1e-12)))
    lc = (_logC(nc, [cs])[:, None] + cs[:, None] * log_pc[None, :]
          + (nc - cs)[:, None] * log1mexp(np.minimum(log_pc[None, :], -1e-12)))
    return lb, lc


def _ndprime_log_pmf(model: ScaleShapeModel, n: int, k: float,
                     qcheck: float) -> tuple[np.ndarray, np.ndarray, float]:
    """log pmf of N'' = ceil(n/2) - (#inside - 1).

    Conditionally on the median's position, the numbers of non-median
    points inside the band on each side are independent binomials, so
    the inside total is their convolution, mixed over the beta density
    of the median position.  Small n convolves exactly in log space;
    larger n uses a scaled FFT convolution, accurate to ~1e-15 relative
    to the distribution's bulk (the deep tail needed by p0 is computed
    separately in ndprime_tail_log).
    """
    from scipy.signal import fftconvolve

    h = n // 2 + 1
    half = int(np.ceil(n / 2))
    nb, nc = h - 1, n - h     # candidates below / above the median
    s_vals = np.arange(0, n)  # s = b + c = inside - 1
    log_beta_coef = math.log(n) + float(_logC(n - 1, [np.array(h - 1)]))
    exact = n <= 128

    def log_f(u):
        lb, lc = _band_binomial_logpmfs(model, n, k, qcheck, u)
        nn = u.size
        if exact:
            conv = np.full((n, nn), -np.inf)
            for s in range(n):
                b_lo, b_hi = max(0, s - nc), min(nb, s)
                if b_lo > b_hi:
                    continue
                block = lb[b_lo:b_hi + 1, :] + lc[s - b_hi:s - b_lo + 1, :][::-1, :]
                conv[s, :] = logsumexp(block, axis=0)
        else:
            lb_max = lb.max(axis=0)
            lc_max = lc.max(axis=0)
            lin = fftconvolve(np.exp(lb - lb_max[None, :]),
                              np.exp(lc - lc_max[None, :]), axes=0)[:n]
            lin = np.maximum(lin, 0.0)
            with np.errstate(divide="ignore"):
                conv = np.log(lin) + (lb_max + lc_max)[None, :]
        front = (log_beta_coef + (h - 1) * np.log(u) + (n - h) * np.log1p(-u))
        return conv + front[None, :]

    log_s = integrate_log(log_f, _panel_points(_u_lower(model), n, h),
                          rel_tol=1e-10)
    values = half - s_vals
    order = np.argsort(values)
    return values[order], log_s[order], _median_invalid_mass(model, n, h)


def ndprime_tail_log(model: ScaleShapeModel, n: int, k: float,
                     qcheck: float, s0: int) -> float:
    """log P(#inside - 1 >= s0), i.e. log P(N'' <= ceil(n/2) - s0), exactly.

    Keeps full log-space accuracy for probabilities far below the FFT
    floor of the pmf path (p0 cells reach the 1e-18 range and beyond).
    """
    h = n // 2 + 1
    nb, nc = h - 1, n - h
    if s0 <= 0:
        return 0.0
    log_beta_coef = math.log(n) + float(_logC(n - 1, [np.array(h - 1)]))

    def log_f(u):
        lb, lc = _band_binomial_logpmfs(model, n, k, qcheck, u)
        # P(c >= t) for all t via reverse cumulative logsumexp
        rev = np.logaddexp.accumulate(lc[::-1, :], axis=0)[::-1, :]
        rows = []
        bs = np.arange(nb + 1)
        t = s0 - bs
        for i, b in enumerate(bs):
            ti = t[i]
            if ti <= 0:
                rows.append(lb[i, :])
            elif ti <= nc:
                rows.append(lb[i, :] + rev[ti, :])
            else:
                rows.append(np.full(u.size, -np.inf))
        tail = logsumexp(np.stack(rows, axis=0), axis=0)
        front = (log_beta_coef + (h - 1) * np.log(u) + (n - h) * np.log1p(-u))
        return (tail + front)[None, :]

    out = integrate_log(log_f, _panel_points(_u_lower(model), n, h),
                        rel_tol=1e-9)
    return float(out[0])


def count_pmf(kind: CountKind, n: int, model: ScaleShapeModel,
              k: float = 10.0, qcheck: float | None = None,
              gev_threshold: str = "consistent") -> CountDistribution:
    """Exact distribution of a breakdown count under the ideal model.

    Raises NumericError when the computed mass (pmf plus any invalid
    mass) fails to normalize to within 1e-6.
    """
    if n < 3:
        raise ParameterError("count distributions need n >= 3")
    if kind is CountKind.N0:
        values, log_pmf, invalid = _pe_count_log_pmf(model, n, 2.0)
    elif kind is CountKind.N0_TILDE:
        mult = (1.0 + Q0_AT_ZERO) if gev_threshold == "consistent" else Q0_AT_ZERO
        values, log_pmf, invalid = _pe_count_log_pmf(model, n, mult)
    elif kind is CountKind.NPRIME:
        values, log_pmf, invalid = _nprime_log_pmf(model, n, k)
    else:
        if qcheck is None:
            qcheck = disp.quotient_limits(model.family, disp.kmad(k))[0]
        values, log_pmf, invalid = _ndprime_log_pmf(model, n, k, qcheck)

    pmf = np.exp(log_pmf)
    total = pmf.sum() + invalid
    if abs(total - 1.0) > 1e-6:
        raise NumericError(f"count pmf failed to normalize: total={total!r}")
    return CountDistribution(kind, n, model, k, values, pmf, log_pmf, invalid)


# ---------------------------------------------------------------------------
# EFSBP / p0 / q1
# ---------------------------------------------------------------------------

def _joint_counts_mc(model: ScaleShapeModel, k: float, n: int, runs: int,
                     seed: int, qcheck: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact (N', N'') pairs counted on `runs` ideal samples (no estimation)."""
    half = int(np.ceil(n / 2))
    nprime = np.empty(runs, dtype=np.int64)
    ndprime = np.empty(runs, dtype=np.int64)
    chunk = max(1, min(runs, 20_000_000 // max(n, 1)))
    done = 0
    block = 0
    while done < runs:
        m_runs = min(chunk, runs - done)
        u = dists.uniform_stream(dists.replicate_seed(seed, block), m_runs * n)
        x = np.sort(np.asarray(dists.quantile(model, u)).reshape(m_runs, n), axis=1)
        med = x[:, n // 2][:, None]
        np_c = ((x > med) & (x <= (k + 1.0) * med)).sum(axis=1)
        inside = ((x > (1.0 - qcheck) * med) & (x < (1.0 + k * qcheck) * med)).sum(axis=1)
        nprime[done:done + m_runs] = np_c
        ndprime[done:done + m_runs] = half - (inside - 1)
        done += m_runs
        block += 1
    return nprime, ndprime


def efsbp(estimator: str, model: ScaleShapeModel, n: int, k: float = 10.0,
          restricted: bool = False, mc_runs: int = 100_000,
          seed: int = 20_000) -> float:
    """Expected breakdown fraction at sample size n under the ideal model.

    Analytic through the count distributions wherever a single count
    characterizes breakdown; the restricted-GPD median-kMAD case needs
    the joint law of (N', N''), evaluated by exact counting on seeded
    Monte-Carlo samples of the ideal model (no estimator evaluations).
    """
    fam = model.family
    if estimator == "pe":
        if fam is Family.WEIBULL:
            return 0.25
        if fam is Family.GAMMA:
            raise ParameterError("no analytic EFSBP for the Gamma quantile estimator")
        kind = CountKind.N0_TILDE if (fam is Family.GEV and restricted) else CountKind.N0
        dist = count_pmf(kind, n, model, k)
        return min(dist.mean_count() / n, 0.25)
    if estimator != "medkmad":
        raise ParameterError(f"unknown estimator {estimator!r}")
    if fam is Family.GEV:
        raise ParameterError("no analytic EFSBP for median-kMAD under GEV; simulate")
    if fam is Family.GPD and restricted:
        qc = disp.quotient_limits(fam, disp.kmad(k))[0]
        np_c, npp_c = _joint_counts_mc(model, k, n, mc_runs, seed, qc)
        return float(np.maximum(0, np.minimum(np_c, npp_c)).mean() / n)
    dist = count_pmf(CountKind.NPRIME, n, model, k)
    return dist.mean_count() / n


def p0_log(estimator: str, model: ScaleShapeModel, n: int, k: float = 10.0,
           restricted: bool = False) -> float:
    """log P(breakdown count = 0) under the ideal model; -inf when impossible.

    For GEV quantile estimators this is the probability that the window
    above a positive sample median is empty, matching the analytic count
    distribution (the separately reported invalid configurations are not
    included here).
    """
    fam = model.family
    if estimator == "pe":
        if fam is Family.WEIBULL:
            return -math.inf
        if fam is Family.GAMMA:
            raise ParameterError("no analytic p0 for the Gamma quantile estimator")
        kind = CountKind.N0_TILDE if (fam is Family.GEV and restricted) else CountKind.N0
        dist = count_pmf(kind, n, model, k)
        return float(dist.log_pmf[dist.values == 0][0])
    if estimator != "medkmad":
        raise ParameterError(f"unknown estimator {estimator!r}")
    if fam is Family.GEV:
        raise ParameterError("no analytic p0 for median-kMAD under GEV")
    qc = disp.quotient_limits(fam, disp.kmad(k))[0]
    dist = count_pmf(CountKind.NPRIME, n, model, k)
    log_p_np0 = float(dist.log_pmf[dist.values == 0][0])
    if not (fam is Family.GPD and restricted):
        return log_p_np0
    # N'' <= 0 means the inside band already holds ceil(n/2) non-median points
    log_p_npp0 = ndprime_tail_log(model, n, k, qc, int(np.ceil(n / 2)))
    #近-disjoint events; subtract the independent-overlap estimate
    log_sum = float(np.logaddexp(log_p_np0, log_p_npp0))
    overlap = log_p_np0 + log_p_npp0
    return log_sum + float(log1mexp(min(overlap - log_sum, -1e-12)))


def p0(estimator: str, model: ScaleShapeModel, n: int, k: float = 10.0,
       restricted: bool = False) -> float:
    lp = p0_log(estimator, model, n, k, restricted)
    return 0.0 if lp == -math.inf else math.exp(lp)


def simulation_threshold(runs: int = 10_000, conf: float = 0.95) -> float:
    """Per-run probability that stays invisible over `runs` replicates."""
    return 1.0 - conf ** (1.0 / runs)


def q1(estimator: str, model: ScaleShapeModel, n: int, k: float = 10.0,
       restricted: bool = False, runs: int = 10_000, conf: float = 0.95) -> float:
    """Largest fraction l/n with P(count < l) below the simulation threshold.

    A study of `runs` ideal-model replicates will, with probability
    `conf`, contain no sample whose breakdown fraction is below q1.
    """
    fam = model.family
    thr = simulation_threshold(runs, conf)
    if estimator == "pe":
        if fam is Family.WEIBULL:
            return 0.25
        if fam is Family.GAMMA:
            raise ParameterError("no analytic q1 for the Gamma quantile estimator")
        kind = CountKind.N0_TILDE if (fam is Family.GEV and restricted) else CountKind.N0
        dists_ = [count_pmf(kind, n, model, k)]
    elif estimator == "medkmad":
        if fam is Family.GEV:
            raise ParameterError("no analytic q1 for median-kMAD under GEV")
        dists_ = [count_pmf(CountKind.NPRIME, n, model, k)]
        if fam is Family.GPD and restricted:
            dists_.append(count_pmf(CountKind.NDPRIME, n, model, k))
    else:
        raise ParameterError(f"unknown estimator {estimator!r}")

    best = 0
    for l in range(1, n + 1):
        # union bound over the contributing counts; exact for a single count
        below = sum(d.cdf_below(l) for d in dists_)
        if below <= thr:
            best = l
        else:
            break
    return best / n

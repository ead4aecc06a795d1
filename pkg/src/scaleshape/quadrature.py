"""Adaptive Gauss-Legendre quadrature for log-space integrands.

The order-statistic integrals behind the breakdown-count distributions
involve factors like u^500 (1-F)^499 whose product underflows double
precision by hundreds of orders of magnitude even though the final
integral (e.g. a probability of 1e-300) is meaningful.  The integrand is
therefore supplied as its logarithm, panels are accumulated with
log-sum-exp, and each panel's error is estimated by comparing an
order-n rule against an order-2n rule on the same interval.
"""

from __future__ import annotations

import heapq

import numpy as np
from scipy.special import logsumexp

from .errors import NumericError

_NODE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _NODE_CACHE:
        _NODE_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _NODE_CACHE[order]


def _panel(log_f, a: float, b: float, order: int):
    """Log-integral of exp(log_f) over (a,b) at two rules; returns both."""
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    out = []
    for m in (order, 2 * order):
        x, w = _nodes(m)
        u = mid + half * x
        vals = log_f(u) + np.log(w * half)[None, :]
        out.append(logsumexp(vals, axis=1))
    return out[0], out[1]


def integrate_log(log_f, points, rel_tol: float = 1e-11, order: int = 24,
                  max_panels: int = 600) -> np.ndarray:
    """Integrate a vector of log-space integrands over a panelized interval.

    ``log_f(u)`` maps an array of nodes to an (m, len(u)) matrix of
    log-integrand values (one row per component; -inf where the
    integrand vanishes).  ``points`` is an increasing sequence of panel
    boundaries covering the integration range.  Returns the (m,) vector
    of log-integrals.

    Panels are split until every component's panel-error sum is below
    ``rel_tol`` relative to its running total, so sharply peaked
    components stay accurate even when other components dominate.
    """
    points = np.asarray(points, dtype=float)
    if np.any(np.diff(points) <= 0):
        raise NumericError("integration points must be strictly increasing")

    # priority queue of panels by error magnitude
    heap = []
    done: list[np.ndarray] = []
    counter = 0
    for a, b in zip(points[:-1], points[1:]):
        lo, hi = _panel(log_f, a, b, order)
        err = _log_err(lo, hi)
        heapq.heappush(heap, (-err, counter, a, b, hi))
        counter += 1

    n_panels = len(heap)
    while heap:
        neg_err, _, a, b, val = heapq.heappop(heap)
        total = _running_total(done, heap, val)
        if -neg_err <= np.log(rel_tol) + total or (b - a) < 1e-14:
            done.append(val)
            continue
        if n_panels >= max_panels:
            raise NumericError("quadrature failed to converge within panel budget")
        mid = 0.5 * (a + b)
        for aa, bb in ((a, mid), (mid, b)):
            lo, hi = _panel(log_f, aa, bb, order)
            heapq.heappush(heap, (-_log_err(lo, hi), counter, aa, bb, hi))
            counter += 1
        n_panels += 1
    return logsumexp(np.stack(done, axis=0), axis=0) if done else None


def _log_err(lo: np.ndarray, hi: np.ndarray) -> float:
    # max over components of |I_n - I_2n| in log space
    both = np.stack([lo, hi])
    if np.all(np.isneginf(both)):
        return -np.inf
    big = np.maximum(lo, hi)
    with np.errstate(invalid="ignore"):
        diff = big + np.log(-np.expm1(-np.abs(lo - hi)))
    diff = np.where(np.isneginf(big), -np.inf, diff)
    return float(np.max(diff))


def _running_total(done, heap, current) -> float:
    parts = [current] + [v for *_ , v in heap] + done
    stacked = np.stack(parts, axis=0)
    return float(np.max(logsumexp(stacked, axis=0)))


def log1mexp(x) -> np.ndarray:
    """log(1 - exp(x)) for x <= 0, stable near both ends."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.log(-np.expm1(x))          # accurate for x near 0-
        large = np.log1p(-np.exp(x))          # accurate for very negative x
    return np.where(x > -0.693, small, large)

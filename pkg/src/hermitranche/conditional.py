"""Loss statistics conditional on the systematic factors.

Given a factor point the loan losses are independent scaled Bernoulli
variables, so the cumulants of the portfolio loss are sums of per-loan
cumulants. The Gram-Charlier coefficients of the standardized loss follow
from those cumulants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .exceptions import DegenerateVariance, DomainError, OrderTooLarge
from .model import Loan, Portfolio

MAX_ORDER = 10


def _check_order(nmax: int, allow_high_order: bool = False) -> None:
    if int(nmax) != nmax or nmax < 1:
        raise DomainError(f"order must be a positive integer, got {nmax}")
    if nmax > MAX_ORDER:
        if not allow_high_order:
            raise OrderTooLarge(
                f"order {nmax} exceeds {MAX_ORDER}; Gram-Charlier series of Bernoulli "
                "sums are asymptotic, pass allow_high_order=True to override"
            )
        warnings.warn(f"expansion order {nmax} above {MAX_ORDER}", RuntimeWarning, stacklevel=3)


def _factor_matrix(phi, m: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.ndim <= 1:
        phi = phi.reshape(1, -1)
    if phi.shape[-1] != m:
        raise DomainError(f"factor point has {phi.shape[-1]} components, expected {m}")
    if not np.all(np.isfinite(phi)):
        raise DomainError("factor point must be finite")
    return phi


def conditional_probabilities(portfolio: Portfolio, phi) -> tuple[np.ndarray, np.ndarray]:
    """Conditional default and survival probabilities.

    ``phi`` is a single factor point of length m or an array of shape (G, m).
    Returns ``(p, q)`` of shape (G, n) with ``q = 1 - p`` evaluated without
    cancellation.
    """
    phi = _factor_matrix(phi, portfolio.m)
    z = (portfolio.thresholds - phi @ portfolio.loadings.T) / portfolio.idiosyncratic_scale
    return ndtr(z), ndtr(-z)


def conditional_default_prob(loan: Loan, phi) -> float:
    """``Phi((Phi^-1(p) - w.phi) / sqrt(1 - |w|^2))`` for a single loan."""
    portfolio = Portfolio((loan,), loan.m, allow_partial_notional=True)
    p, _ = conditional_probabilities(portfolio, phi)
    return float(p[0, 0])


@lru_cache(maxsize=None)
def _bernoulli_cumulant_terms(j: int) -> tuple[tuple[int, int, int], ...]:
    """kappa_j of Bernoulli(p) as ``sum coef * p**a * q**b`` with q = 1 - p.

    Uses kappa_{j+1} = p q d(kappa_j)/dp where d/dp acts as (d/dp - d/dq).
    """
    if j == 1:
        return ((1, 1, 0),)
    acc: dict[tuple[int, int], int] = {}
    for coef, a, b in _bernoulli_cumulant_terms(j - 1):
        if a:
            key = (a, b + 1)  # p q * a p^(a-1) q^b
            acc[key] = acc.get(key, 0) + coef * a
        if b:
            key = (a + 1, b)  # -p q * b p^a q^(b-1)
            acc[key] = acc.get(key, 0) - coef * b
    return tuple((c, a, b) for (a, b), c in sorted(acc.items()) if c)


def bernoulli_cumulant(j: int, p, q=None):
    """j-th cumulant of a Bernoulli(p) variable."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p if q is None else np.asarray(q, dtype=float)
    out = np.zeros(np.broadcast(p, q).shape)
    for coef, a, b in _bernoulli_cumulant_terms(j):
        out = out + coef * p**a * q**b
    return out


def cumulants_from_probabilities(exposures, p, q, nmax: int) -> np.ndarray:
    """Cumulants kappa_1..kappa_nmax of sum_i e_i B_i; shape (..., nmax)."""
    exposures = np.asarray(exposures, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.empty(p.shape[:-1] + (nmax,))
    for j in range(1, nmax + 1):
        out[..., j - 1] = bernoulli_cumulant(j, p, q) @ exposures**j
    return out


def conditional_mean_variance(portfolio: Portfolio, phi) -> tuple[float, float]:
    p, q = conditional_probabilities(portfolio, phi)
    kappa = cumulants_from_probabilities(portfolio.exposures, p[0], q[0], 2)
    return float(kappa[0]), float(kappa[1])


def conditional_cumulants(portfolio: Portfolio, phi, nmax: int,
                          allow_high_order: bool = False) -> np.ndarray:
    """Cumulants ``kappa_1..kappa_nmax`` of the loss at a single factor point."""
    _check_order(nmax, allow_high_order)
    p, q = conditional_probabilities(portfolio, phi)
    return cumulants_from_probabilities(portfolio.exposures, p[0], q[0], nmax)


def charlier_from_cumulants(kappa: np.ndarray) -> np.ndarray:
    """Vectorized core of :func:`charlier_coefficients`.

    ``kappa`` has shape (..., N) with a strictly positive second column.
    The coefficients are the Taylor coefficients of
    ``exp(sum_{j>=3} kappa_j t^j / (j! kappa_2^(j/2)))``, which equals
    ``E[exp(t X - t^2/2)] = sum_n E[He_n(X)] t^n / n!`` for the standardized
    loss X.
    """
    kappa = np.asarray(kappa, dtype=float)
    N = kappa.shape[-1]
    c = np.zeros(kappa.shape[:-1] + (N + 1,))
    c[..., 0] = 1.0
    if N < 3:
        return c
    sd = np.sqrt(kappa[..., 1])
    # h[k] = k * standardized kappa_k / k!
    h = np.zeros_like(c)
    for k in range(3, N + 1):
        h[..., k] = kappa[..., k - 1] / sd**k / math.factorial(k - 1)
    for n in range(3, N + 1):
        acc = np.zeros(kappa.shape[:-1])
        for k in range(3, n + 1):
            acc = acc + h[..., k] * c[..., n - k]
        c[..., n] = acc / n
    return c


def charlier_coefficients(cumulants) -> np.ndarray:
    """Gram-Charlier coefficients ``c_n = E[He_n(X)] / n!``, n = 0..N.

    ``X = (L - kappa_1) / sqrt(kappa_2)`` is the standardized loss. By
    construction ``c_0 = 1`` and ``c_1 = c_2 = 0``; ``c_3`` is skewness / 6
    and ``c_4`` excess kurtosis / 24.
    """
    kappa = np.asarray(cumulants, dtype=float)
    if kappa.ndim != 1 or kappa.size < 1:
        raise DomainError("expected a one-dimensional sequence of cumulants")
    if kappa.size < 2:
        return np.array([1.0, 0.0])
    if not kappa[1] > 0.0:
        raise DegenerateVariance(f"second cumulant {kappa[1]!r} is not positive")
    return charlier_from_cumulants(kappa)


@dataclass(frozen=True)
class ConditionalLossStats:
    mean: float
    variance: float
    cumulants: np.ndarray
    charlier: np.ndarray

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


def conditional_stats(portfolio: Portfolio, phi, order: int,
                      allow_high_order: bool = False) -> ConditionalLossStats:
    """All conditional statistics needed by the order-``order`` pricer."""
    nmax = max(order, 2)
    kappa = conditional_cumulants(portfolio, phi, nmax, allow_high_order)
    return ConditionalLossStats(
        mean=float(kappa[0]),
        variance=float(kappa[1]),
        cumulants=kappa,
        charlier=charlier_coefficients(kappa),
    )

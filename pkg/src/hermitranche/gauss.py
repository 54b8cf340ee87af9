"""Standard normal functions, probabilists' Hermite polynomials and
Gauss-Hermite quadrature under the standard normal weight."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import ndtr, ndtri

from .exceptions import DomainError, GridTooLarge, OrderOutOfRange, OrderTooLarge

MAX_HERMITE_ORDER = 50
MAX_RULE_ORDER = 256
MAX_GRID_POINTS = 10**7
DEFAULT_NODES = 64

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def std_normal_cdf(x):
    """Standard normal cdf. Accepts scalars or arrays."""
    out = ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def std_normal_inv_cdf(u):
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1)."""
    arr = np.asarray(u, dtype=float)
    if np.any(~(arr > 0.0) | ~(arr < 1.0)):
        raise DomainError("inverse normal cdf needs 0 < u < 1")
    out = ndtri(arr)
    return float(out) if np.ndim(out) == 0 else out


def hermite_poly(n: int, x):
    """Probabilists' Hermite polynomial ``He_n(x)`` by three-term recurrence."""
    if n < 0:
        raise DomainError(f"Hermite order must be nonnegative, got {n}")
    if n > MAX_HERMITE_ORDER:
        raise OrderTooLarge(f"Hermite order {n} exceeds {MAX_HERMITE_ORDER}")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if n == 0:
        cur = prev
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return float(cur) if cur.ndim == 0 else cur


def hermite_table(nmax: int, x) -> np.ndarray:
    """``He_0(x) .. He_nmax(x)`` stacked on a new leading axis."""
    if nmax > MAX_HERMITE_ORDER:
        raise OrderTooLarge(f"Hermite order {nmax} exceeds {MAX_HERMITE_ORDER}")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for k in range(1, nmax):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights with ``sum_j w_j g(x_j) ~ E[g(Z)]``, ``Z ~ N(0, 1)``."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)

    def expect(self, values) -> float:
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class FactorGrid:
    points: np.ndarray  # (G, m)
    weights: np.ndarray  # (G,)

    def __len__(self):
        return len(self.weights)

    @property
    def m(self) -> int:
        return self.points.shape[1]


def gauss_hermite_rule(K: int) -> QuadratureRule:
    """K-node Gauss-Hermite rule for the standard normal density.

    Exact for polynomials of degree up to ``2K - 1``.
    """
    if int(K) != K or not (1 <= K <= MAX_RULE_ORDER):
        raise OrderOutOfRange(f"node count K={K} outside [1, {MAX_RULE_ORDER}]")
    x, w = hermegauss(int(K))
    # enforce exact symmetry; hermegauss weights are for exp(-x^2/2)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    w = w / w.sum()
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w)


def scaled_gauss_hermite_rule(K: int, scale: float = 1.0) -> QuadratureRule:
    """K-node rule for the standard normal built on the nodes of N(0, scale^2).

    With ``scale < 1`` the nodes are packed more densely around the origin,
    which pays off for integrands that turn over on a scale much narrower
    than the factor distribution itself (expected tranche losses do). The
    polynomial exactness of :func:`gauss_hermite_rule` holds only for
    ``scale == 1``.
    """
    if not (0.0 < scale <= 1.0):
        raise DomainError(f"node scale {scale} outside (0, 1]")
    base = gauss_hermite_rule(K)
    if scale == 1.0:
        return base
    x = base.nodes
    # E[g(Z)] = E[g(sX) * s * pdf(sX) / pdf(X)] for X ~ N(0, 1)
    w = base.weights * scale * np.exp(0.5 * x * x * (1.0 - scale * scale))
    w = w / w.sum()
    nodes = scale * x
    nodes.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(nodes, w)


def tensor_grid(rule: QuadratureRule, m: int) -> FactorGrid:
    """Product grid of ``rule`` over ``m`` independent factors."""
    if m < 1:
        raise DomainError(f"factor dimension must be positive, got {m}")
    size = rule.order**m
    if size > MAX_GRID_POINTS:
        raise GridTooLarge(f"{rule.order}^{m} = {size} grid points exceeds {MAX_GRID_POINTS}")
    if m == 1:
        points = rule.nodes.reshape(-1, 1)
        weights = rule.weights
    else:
        idx = np.indices((rule.order,) * m).reshape(m, -1).T
        points = rule.nodes[idx]
        weights = np.prod(rule.weights[idx], axis=1)
    return FactorGrid(np.ascontiguousarray(points, dtype=float), np.asarray(weights, dtype=float))

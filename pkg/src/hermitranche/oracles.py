"""Reference engines: Monte Carlo simulation of the full default model and
exact enumeration of the conditional loss distribution for small portfolios.

RNG contract
------------
Paths are generated in fixed-size batches. Batch ``b`` draws from
``numpy.random.Generator(Philox(SeedSequence(seed).spawn(...)[b]))``; the
child sequence of batch ``b`` depends only on ``(seed, b)``, so results are
identical for any worker count. Normals come from the inverse cdf applied to
uniforms in the open interval (0, 1).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .conditional import conditional_probabilities
from .exceptions import DomainError, PortfolioTooLarge
from .gauss import DEFAULT_NODES
from .model import Portfolio, Tranche
from .pricer import DEFAULT_NODE_SCALE, factor_grid, tranche_profile

MC_BATCH = 1 << 15
MAX_ENUMERATION = 20
_ENUM_ENTRIES = 1 << 22
_LEVEL_TOL = 1e-12


@dataclass(frozen=True)
class McConfig:
    samples: int = 10**6
    seed: int = 0
    antithetic: bool = False
    n_jobs: int = 1

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise DomainError(f"samples must be a positive integer, got {self.samples}")
        if self.antithetic and self.samples < 2:
            raise DomainError("antithetic sampling needs at least 2 samples")
        if not (0 <= self.seed < 2**64):
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McResult:
    estimate: float
    std_error: float
    samples: int


def _open_uniforms(rng: np.random.Generator, shape) -> np.ndarray:
    # random() returns k / 2^53; shift by half a step to stay inside (0, 1)
    return rng.random(shape) + 2.0**-54


def _simulate_batch(portfolio: Portfolio, seq: np.random.SeedSequence, size: int,
                    antithetic: bool) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seq))
    factors = ndtri(_open_uniforms(rng, (size, portfolio.m)))
    idio = ndtri(_open_uniforms(rng, (size, portfolio.n)))
    e = portfolio.exposures

    def losses(sign):
        latent = sign * (factors @ portfolio.loadings.T) + sign * idio * portfolio.idiosyncratic_scale
        return (latent < portfolio.thresholds) @ e

    if antithetic:
        return np.stack([losses(1.0), losses(-1.0)], axis=1)
    return losses(1.0)[:, None]


def simulate_losses(portfolio: Portfolio, cfg: McConfig) -> np.ndarray:
    """Simulated portfolio losses, shape (paths, 1) or (pairs, 2) if antithetic."""
    units = cfg.samples // 2 if cfg.antithetic else cfg.samples
    nbatch = -(-units // MC_BATCH)
    children = np.random.SeedSequence(cfg.seed).spawn(nbatch)
    sizes = [min(MC_BATCH, units - b * MC_BATCH) for b in range(nbatch)]
    args = [(portfolio, children[b], sizes[b], cfg.antithetic) for b in range(nbatch)]
    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(cfg.n_jobs) as pool:
            parts = list(pool.map(lambda a: _simulate_batch(*a), args))
    else:
        parts = [_simulate_batch(*a) for a in args]
    return np.concatenate(parts, axis=0)


def _mc_summary(payoff: np.ndarray) -> McResult:
    per_unit = payoff.mean(axis=1)
    count = len(per_unit)
    estimate = float(np.mean(per_unit))
    se = float(np.std(per_unit, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    return McResult(min(1.0, max(0.0, estimate)), se, payoff.size)


def mc_price_many(portfolio: Portfolio, tranches, cfg: McConfig | None = None) -> list[McResult]:
    """Monte Carlo prices of several tranches on one set of paths."""
    cfg = cfg or McConfig()
    losses = simulate_losses(portfolio, cfg)
    return [_mc_summary(tranche_profile(t, losses)) for t in tranches]


def mc_price(portfolio: Portfolio, t: Tranche, cfg: McConfig | None = None) -> McResult:
    return mc_price_many(portfolio, [t], cfg)[0]


def _check_enumerable(portfolio: Portfolio) -> None:
    if portfolio.n > MAX_ENUMERATION:
        raise PortfolioTooLarge(
            f"exact enumeration limited to {MAX_ENUMERATION} loans, got {portfolio.n}"
        )


def subset_losses(exposures) -> np.ndarray:
    """Loss of every default subset; subset bitmask ``s`` sits at index ``s``."""
    losses = np.zeros(1)
    for e in exposures:
        losses = np.concatenate([losses, losses + e])
    return losses


def subset_probabilities(p, q) -> np.ndarray:
    """Probability of every default subset for rows of independent defaults.

    ``p``, ``q`` have shape (G, n); returns (G, 2^n) in the order of
    :func:`subset_losses`.
    """
    p = np.atleast_2d(p)
    q = np.atleast_2d(q)
    probs = np.ones((p.shape[0], 1))
    for i in range(p.shape[1]):
        probs = np.concatenate([probs * q[:, i:i + 1], probs * p[:, i:i + 1]], axis=1)
    return probs


def loss_pmf(exposures, p, q=None) -> list[tuple[float, float]]:
    """Exact pmf of ``sum_i e_i B_i`` for independent Bernoulli(p_i)."""
    exposures = np.asarray(exposures, dtype=float)
    if exposures.size > MAX_ENUMERATION:
        raise PortfolioTooLarge(f"exact enumeration limited to {MAX_ENUMERATION} loans")
    p = np.asarray(p, dtype=float)
    q = 1.0 - p if q is None else np.asarray(q, dtype=float)
    levels = subset_losses(exposures)
    probs = subset_probabilities(p[None, :], q[None, :])[0]
    keep = probs > 0.0
    levels, probs = levels[keep], probs[keep]
    order = np.argsort(levels, kind="stable")
    levels, probs = levels[order], probs[order]
    # one atom per loss level; sums of the same exposures in different order
    # differ by rounding only
    tol = _LEVEL_TOL * max(1.0, float(exposures.sum()))
    starts = np.flatnonzero(np.r_[True, np.diff(levels) > tol])
    mass = np.add.reduceat(probs, starts)
    return list(zip(levels[starts].tolist(), mass.tolist()))


def conditional_loss_pmf(portfolio: Portfolio, phi) -> list[tuple[float, float]]:
    """Exact distribution of the portfolio loss given the factor point ``phi``."""
    _check_enumerable(portfolio)
    p, q = conditional_probabilities(portfolio, phi)
    return loss_pmf(portfolio.exposures, p[0], q[0])


def exact_price(portfolio: Portfolio, t: Tranche, K: int = DEFAULT_NODES,
                node_scale: float = DEFAULT_NODE_SCALE) -> float:
    """Expected tranche loss with the conditional loss enumerated exactly.

    Only the outer factor integral is approximated, on the same grid as the
    semi-analytic pricer.
    """
    return exact_prices(portfolio, [t], K, node_scale)[0]


def exact_prices(portfolio: Portfolio, tranches, K: int = DEFAULT_NODES,
                 node_scale: float = DEFAULT_NODE_SCALE) -> list[float]:
    _check_enumerable(portfolio)
    grid = factor_grid(portfolio.m, K, node_scale)
    levels = subset_losses(portfolio.exposures)
    payoffs = np.stack([tranche_profile(t, levels) for t in tranches], axis=1)
    total = np.zeros(len(tranches))
    step = max(1, _ENUM_ENTRIES // len(levels))
    for lo in range(0, len(grid), step):
        p, q = conditional_probabilities(portfolio, grid.points[lo:lo + step])
        probs = subset_probabilities(p, q)
        total += grid.weights[lo:lo + step] @ (probs @ payoffs)
    return [min(1.0, max(0.0, float(v))) for v in total]

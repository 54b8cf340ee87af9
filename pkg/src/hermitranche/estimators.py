"""scikit-learn style pricers.

``fit`` takes a portfolio (a :class:`~hermitranche.model.Portfolio` or a
loan matrix with columns ``f, p, r, w_1..w_m``) and does the expensive,
tranche-independent work. ``predict`` takes tranches as (attachment,
detachment) rows and returns expected tranche losses.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import PortfolioTooLarge
from .gauss import DEFAULT_NODES
from .oracles import MAX_ENUMERATION, McConfig, _mc_summary, exact_prices, simulate_losses
from .pricer import (
    DEFAULT_NODE_SCALE,
    DEFAULT_SIGMA_FLOOR,
    PricerConfig,
    compute_grid_stats,
    integrate_tranche,
    tranche_profile,
)
from .validation import check_portfolio, check_tranches


class SemiAnalyticTranchePricer(BaseEstimator):
    """Expected tranche loss with a closed-form inner integral.

    Parameters
    ----------
    order : int, default=1
        Truncation order of the Gram-Charlier expansion of the conditional
        loss. ``1`` uses the plain normal approximation.
    nodes : int, default=64
        Gauss-Hermite nodes per systematic factor.
    sigma_floor : float, default=1e-12
        Conditional standard deviations at or below this value are treated
        as a point mass at the conditional mean.
    allow_high_order : bool, default=False
        Permit ``order`` above 10 (with a warning).
    allow_partial_notional : bool, default=False
        Accept loan matrices whose notionals sum to less than one.
    node_scale : float, default=0.7
        Outer nodes are Gauss-Hermite nodes of N(0, node_scale**2),
        reweighted to the standard normal. ``1.0`` gives the plain rule.

    Attributes
    ----------
    portfolio_ : Portfolio
        The validated portfolio.
    stats_ : GridStats
        Conditional mean, standard deviation and Charlier coefficients on
        the factor grid.
    grid_size_ : int
        Number of factor grid points.
    n_floored_ : int
        Grid points where the conditional loss was treated as deterministic.

    Examples
    --------
    >>> from hermitranche import SemiAnalyticTranchePricer, preset_portfolio
    >>> pricer = SemiAnalyticTranchePricer(order=5).fit(preset_portfolio("paper25"))
    >>> pricer.predict([[0.0, 0.03], [0.03, 0.07]]).shape
    (2,)
    """

    def __init__(self, order=1, nodes=DEFAULT_NODES, sigma_floor=DEFAULT_SIGMA_FLOOR,
                 allow_high_order=False, allow_partial_notional=False,
                 node_scale=DEFAULT_NODE_SCALE):
        self.order = order
        self.nodes = nodes
        self.sigma_floor = sigma_floor
        self.allow_high_order = allow_high_order
        self.allow_partial_notional = allow_partial_notional
        self.node_scale = node_scale

    def fit(self, X, y=None):
        self.portfolio_ = check_portfolio(X, self.allow_partial_notional)
        self.config_ = PricerConfig(self.order, self.nodes, self.sigma_floor,
                                    self.allow_high_order, self.node_scale)
        self.stats_ = compute_grid_stats(self.portfolio_, self.config_)
        self.grid_size_ = self.stats_.grid_size
        self.n_floored_ = int(np.count_nonzero(self.stats_.floored))
        return self

    def price(self, X):
        """Full :class:`PriceResult` objects, with diagnostics, per tranche."""
        check_is_fitted(self, "stats_")
        return [integrate_tranche(self.stats_, t) for t in check_tranches(X)]

    def predict(self, X):
        return np.array([r.value for r in self.price(X)])


class MonteCarloTranchePricer(BaseEstimator):
    """Seeded Monte Carlo simulation of the full default model.

    ``fit`` simulates and stores the path losses; every ``predict`` call
    reuses them, so tranches priced together share common random numbers.
    """

    def __init__(self, samples=10**6, seed=0, antithetic=False, n_jobs=1,
                 allow_partial_notional=False):
        self.samples = samples
        self.seed = seed
        self.antithetic = antithetic
        self.n_jobs = n_jobs
        self.allow_partial_notional = allow_partial_notional

    def fit(self, X, y=None):
        self.portfolio_ = check_portfolio(X, self.allow_partial_notional)
        cfg = McConfig(self.samples, self.seed, self.antithetic, self.n_jobs)
        self.losses_ = simulate_losses(self.portfolio_, cfg)
        return self

    def price(self, X):
        check_is_fitted(self, "losses_")
        return [_mc_summary(tranche_profile(t, self.losses_)) for t in check_tranches(X)]

    def predict(self, X, return_std=False):
        results = self.price(X)
        est = np.array([r.estimate for r in results])
        if return_std:
            return est, np.array([r.std_error for r in results])
        return est


class ExactTranchePricer(BaseEstimator):
    """Exact enumeration of the conditional loss (portfolios of at most 20 loans)."""

    def __init__(self, nodes=DEFAULT_NODES, node_scale=DEFAULT_NODE_SCALE,
                 allow_partial_notional=False):
        self.nodes = nodes
        self.node_scale = node_scale
        self.allow_partial_notional = allow_partial_notional

    def fit(self, X, y=None):
        portfolio = check_portfolio(X, self.allow_partial_notional)
        if portfolio.n > MAX_ENUMERATION:
            raise PortfolioTooLarge(
                f"exact enumeration limited to {MAX_ENUMERATION} loans, got {portfolio.n}"
            )
        self.portfolio_ = portfolio
        return self

    def predict(self, X):
        check_is_fitted(self, "portfolio_")
        return np.array(exact_prices(self.portfolio_, check_tranches(X), self.nodes, self.node_scale))

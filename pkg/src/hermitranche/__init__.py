"""Semi-analytic expected tranche loss in the Gaussian m-factor default model."""

from .conditional import (
    ConditionalLossStats,
    charlier_coefficients,
    conditional_cumulants,
    conditional_default_prob,
    conditional_mean_variance,
    conditional_stats,
)
from .estimators import ExactTranchePricer, MonteCarloTranchePricer, SemiAnalyticTranchePricer
from .gauss import (
    FactorGrid,
    QuadratureRule,
    gauss_hermite_rule,
    hermite_poly,
    std_normal_cdf,
    std_normal_inv_cdf,
    tensor_grid,
)
from .model import (
    Loan,
    Portfolio,
    Tranche,
    effective_exposure,
    preset_portfolio,
    read_portfolio_csv,
    truncate_portfolio,
    validate_portfolio,
    write_portfolio_csv,
)
from .oracles import McConfig, McResult, conditional_loss_pmf, exact_price, mc_price
from .pricer import (
    PriceResult,
    PricerConfig,
    inner_gaussian,
    inner_hermite,
    price_base_curve,
    price_tranche,
    tranche_profile,
)

__version__ = "0.1.0"

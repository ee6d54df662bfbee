"""Design and evaluation of reputation-based social norms for anonymous
communities with random matching."""

__version__ = "0.1.0"

from .errors import (
    BenefitNotAboveCost,
    ConfigError,
    DimensionMismatch,
    HorizonTooShort,
    HypothesisViolated,
    LTooLarge,
    MissingWhitewashCost,
    NoConvergence,
    NormForgeError,
    OutOfRange,
    SingularSystem,
    UnknownFigure,
    UnsupportedRequest,
    UnsupportedScheme,
    ValidationError,
)
from .model import (
    DEFAULT_PARAMS,
    Action,
    CommunityParams,
    ReputationDistribution,
    ReputationScheme,
    SocialNorm,
    SocialStrategy,
    enumerate_strategies,
    evolve_distribution,
    stationary,
    stationary_closed_form,
    stationary_general,
    validate_params,
)
from .payoff import (
    long_term_values,
    period_payoffs,
    social_welfare,
    transition_matrix,
    value_differences_closed_form,
)
from .incentives import (
    cooperation_constraints,
    find_profitable_deviation,
    is_sustainable,
    is_sustainable_bruteforce,
    whitewash_check,
    whitewash_sufficiency_bound,
    zero_welfare_test,
)
from .optimizer import (
    analytic_optimal_L1,
    lift_strategy,
    max_min_difference_strategy,
    prune_candidates,
    solve_dp_fixed_L,
    solve_dp_variable_M,
    solve_dp_whitewash,
    welfare_bounds,
)
from .simulation import SimulationConfig, match_agents, simulate_population, simulate_value_function
from .strategies import named, parse_strategy

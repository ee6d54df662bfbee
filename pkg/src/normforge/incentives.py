"""Sustainability and whitewash-proofness checks.

``cooperation_constraints`` uses the one-shot deviation conditions; the
brute-force path enumerates every alternative strategy and compares
long-term payoffs directly, which is the independent check on the former.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import MissingWhitewashCost
from .model import (
    CommunityParams,
    ReputationDistribution,
    SocialNorm,
    SocialStrategy,
    _guard_enumeration,
    all_strategy_bits,
    stationary,
)
from .payoff import (
    deviation_transition,
    deviation_values,
    long_term_values,
    transition_matrix,
)

CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class IncentiveReport:
    cooperation_margins: np.ndarray
    cooperation_incentive: float
    sustainable: bool
    binding_reputations: tuple
    whitewash_incentive: float
    whitewash_proof: Optional[bool] = None
    longterm: np.ndarray = field(default=None, repr=False)


def punishment_spread(longterm: np.ndarray, scheme, params: CommunityParams) -> np.ndarray:
    """``delta (1 - 2 eps) [v_inf(up(theta)) - v_inf(down(theta))]`` per theta."""
    theta = np.arange(scheme.size)
    gap = longterm[scheme.up(theta)] - longterm[scheme.down(theta)]
    return params.delta * (1 - 2 * params.eps) * gap


def _margins(spread: np.ndarray, serves_anyone: np.ndarray, c: float) -> np.ndarray:
    # rows with an F need spread >= c; all-D rows only need spread >= -c
    return spread - np.where(serves_anyone, c, -c)


def cooperation_constraints(
    norm: SocialNorm, params: CommunityParams, dist: Optional[ReputationDistribution] = None
) -> IncentiveReport:
    if dist is None:
        dist = stationary(params, norm.scheme)
    values = long_term_values(norm, params, dist)
    v = values.longterm
    spread = punishment_spread(v, norm.scheme, params)
    margins = _margins(spread, norm.strategy.serves_anyone(), params.c)
    lowest = margins.min()
    binding = tuple(int(t) for t in np.flatnonzero(margins <= lowest + CONSTRAINT_TOL))
    ww = float(np.max(v[norm.scheme.K] - v))
    proof = None if params.c_w is None else bool(ww <= params.c_w + CONSTRAINT_TOL)
    return IncentiveReport(
        cooperation_margins=margins,
        cooperation_incentive=float(spread.min()),
        sustainable=bool(lowest >= -CONSTRAINT_TOL),
        binding_reputations=binding,
        whitewash_incentive=max(ww, 0.0),
        whitewash_proof=proof,
        longterm=v,
    )


def is_sustainable(norm: SocialNorm, params: CommunityParams) -> bool:
    return cooperation_constraints(norm, params).sustainable


@dataclass(frozen=True)
class Deviation:
    strategy: SocialStrategy
    theta: int
    client: int
    gain: float


def deviation_gains(
    norm: SocialNorm,
    params: CommunityParams,
    alt_strategy,
    dist: Optional[ReputationDistribution] = None,
) -> np.ndarray:
    """Gain, per matched pair ``(theta, client)``, from switching to
    ``alt_strategy`` for good, excluding this period's client benefit."""
    if dist is None:
        dist = stationary(params, norm.scheme)
    follow = long_term_values(norm, params, dist).longterm
    dev = deviation_values(norm, params, alt_strategy, dist).longterm
    P = transition_matrix(norm.scheme, params).rows
    alt = alt_strategy.serve if isinstance(alt_strategy, SocialStrategy) else np.asarray(alt_strategy, bool)
    c = params.c
    stay = -c * norm.strategy.serve + params.delta * (P @ follow)[:, None]
    cond = deviation_transition(norm, params, alt, dist)
    move = -c * alt + params.delta * np.einsum("tcn,n->tc", cond, dev)
    return move - stay


def find_profitable_deviation(norm: SocialNorm, params: CommunityParams, limit: int = 2) -> Optional[Deviation]:
    """Search all alternative strategies for the largest strictly profitable
    deviation; ``None`` when the norm is sustainable."""
    _guard_enumeration(norm.scheme.L, limit)
    dist = stationary(params, norm.scheme)
    best = None
    for alt in all_strategy_bits(norm.scheme.L):
        gains = deviation_gains(norm, params, alt, dist)
        t, k = np.unravel_index(np.argmax(gains), gains.shape)
        g = float(gains[t, k])
        if g > CONSTRAINT_TOL and (best is None or g > best.gain):
            best = Deviation(SocialStrategy(alt), int(t), int(k), g)
    return best


def is_sustainable_bruteforce(norm: SocialNorm, params: CommunityParams) -> bool:
    """Exhaustive check over every alternative strategy (``L <= 2``)."""
    return find_profitable_deviation(norm, params) is None


def whitewash_check(norm: SocialNorm, params: CommunityParams) -> IncentiveReport:
    if params.c_w is None:
        raise MissingWhitewashCost("whitewash check needs params.c_w")
    return cooperation_constraints(norm, params)


def whitewash_sufficiency_bound(params: CommunityParams) -> float:
    """Whitewashing cost above which no norm can be profitably whitewashed."""
    return (params.b + params.c) / (1 - params.gamma)


def zero_welfare_test(params: CommunityParams) -> bool:
    """True when no norm can meet the service constraint at any reputation,
    so the optimal welfare is zero. Uses the undivided inequality, which is
    sign-safe."""
    max_spread = params.delta * (1 - 2 * params.eps) * (params.b + params.c) / (1 - params.gamma)
    return bool(max_spread < params.c)

"""Period payoffs, reputation transitions and long-term values.

Long-term values solve ``v_inf = v + delta * P @ v_inf`` directly; the closed
form for value differences under maximum punishment is kept separately so the
two can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, SingularSystem
from .model import (
    CommunityParams,
    ReputationDistribution,
    ReputationScheme,
    SocialNorm,
    SocialStrategy,
    require_maximum_punishment_drop,
    stationary,
)

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ValueProfile:
    period: np.ndarray
    longterm: np.ndarray

    def differences(self) -> np.ndarray:
        """``v_inf(theta) - v_inf(0)`` for ``theta = 1..L``."""
        return self.longterm[1:] - self.longterm[0]


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise DimensionMismatch("transition matrix must be square")
        if np.max(np.abs(rows.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("transition rows must sum to one")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def row(self, theta: int) -> dict:
        """Nonzero entries of one row as ``{next reputation: probability}``."""
        r = self.rows[theta]
        return {int(j): float(r[j]) for j in np.flatnonzero(r)}


def transition_matrix(scheme: ReputationScheme, params: CommunityParams) -> TransitionMatrix:
    n = scheme.size
    theta = np.arange(n)
    rows = np.zeros((n, n))
    np.add.at(rows, (theta, scheme.up(theta)), 1 - params.eps)
    np.add.at(rows, (theta, scheme.down(theta)), params.eps)
    return TransitionMatrix(rows)


def _serve_matrix(strategy) -> np.ndarray:
    return strategy.serve if isinstance(strategy, SocialStrategy) else np.asarray(strategy, dtype=bool)


def _payoffs_from(received_from: np.ndarray, paid_to: np.ndarray, eta: np.ndarray, params) -> np.ndarray:
    # received_from[s, t]: servers s serve client t; paid_to[t, s]: agent t serves s
    benefit = params.b * (eta @ received_from)
    cost = params.c * (paid_to @ eta)
    return benefit - cost


def period_payoffs(norm: SocialNorm, dist: ReputationDistribution, params: CommunityParams) -> np.ndarray:
    """Expected one-period payoff of each reputation before matching."""
    if dist.L != norm.scheme.L:
        raise DimensionMismatch("distribution and norm disagree on L")
    serve = norm.strategy.serve.astype(float)
    return _payoffs_from(serve, serve, dist.mass, params)


def _solve_values(period: np.ndarray, P: np.ndarray, delta: float) -> np.ndarray:
    n = period.size
    A = np.eye(n) - delta * P
    try:
        v = np.linalg.solve(A, period)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    residual = np.max(np.abs(v - period - delta * P @ v))
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise SingularSystem(f"value recursion residual {residual:.3e} exceeds tolerance")
    return v


def long_term_values(
    norm: SocialNorm, params: CommunityParams, dist: Optional[ReputationDistribution] = None
) -> ValueProfile:
    if dist is None:
        dist = stationary(params, norm.scheme)
    period = period_payoffs(norm, dist, params)
    P = transition_matrix(norm.scheme, params).rows
    return ValueProfile(period, _solve_values(period, P, params.delta))


def value_differences_closed_form(
    norm: SocialNorm, params: CommunityParams, dist: Optional[ReputationDistribution] = None
) -> np.ndarray:
    """``v_inf(theta) - v_inf(0)`` for ``theta = 1..L`` as the finite
    gamma-weighted sum of period-payoff gaps; only valid when ``M = L``."""
    require_maximum_punishment_drop(norm.scheme, "the closed-form value difference")
    if dist is None:
        dist = stationary(params, norm.scheme)
    v = period_payoffs(norm, dist, params)
    L = norm.scheme.L
    weights = params.gamma ** np.arange(L)
    out = np.empty(L)
    for theta in range(1, L + 1):
        ahead = np.minimum(theta + np.arange(L), L)
        out[theta - 1] = weights @ (v[ahead] - v[:L])
    return out


def social_welfare(
    norm: SocialNorm, params: CommunityParams, dist: Optional[ReputationDistribution] = None
) -> float:
    """Stationary average period payoff ``sum_theta eta(theta) v(theta)``."""
    if dist is None:
        dist = stationary(params, norm.scheme)
    return float(dist.mass @ period_payoffs(norm, dist, params))


def social_welfare_pairs(
    norm: SocialNorm, params: CommunityParams, dist: Optional[ReputationDistribution] = None
) -> float:
    """Welfare as ``(b - c)`` times the stationary mass of served matches."""
    if dist is None:
        dist = stationary(params, norm.scheme)
    eta = dist.mass
    served = float(eta @ norm.strategy.serve.astype(float) @ eta)
    return (params.b - params.c) * served


def deviation_transition(
    norm: SocialNorm, params: CommunityParams, alt_strategy: SocialStrategy, dist: ReputationDistribution
) -> np.ndarray:
    """Per-(theta, client) transition of a lone deviator, shape ``(n, n, n)``:
    ``[theta, client, next]``. Matching the prescription keeps the usual odds;
    a mismatch swaps them."""
    scheme = norm.scheme
    n = scheme.size
    theta = np.arange(n)
    match = norm.strategy.serve == _serve_matrix(alt_strategy)
    p_up = np.where(match, 1 - params.eps, params.eps)
    out = np.zeros((n, n, n))
    for t in theta:
        out[t, :, scheme.up(t)] += p_up[t]
        out[t, :, scheme.down(t)] += 1 - p_up[t]
    return out


def deviation_values(
    norm: SocialNorm,
    params: CommunityParams,
    alt_strategy: SocialStrategy,
    dist: Optional[ReputationDistribution] = None,
) -> ValueProfile:
    """Values of a single agent who plays ``alt_strategy`` while everyone else
    follows the norm. Benefits received come from the population's strategy,
    costs paid from the deviator's own."""
    alt = _serve_matrix(alt_strategy)
    if alt.shape != norm.strategy.serve.shape:
        raise DimensionMismatch(f"alternative strategy shape {alt.shape} != {norm.strategy.serve.shape}")
    if dist is None:
        dist = stationary(params, norm.scheme)
    eta = dist.mass
    period = _payoffs_from(norm.strategy.serve.astype(float), alt.astype(float), eta, params)
    P = np.einsum("c,tcn->tn", eta, deviation_transition(norm, params, alt, dist))
    return ValueProfile(period, _solve_values(period, P, params.delta))

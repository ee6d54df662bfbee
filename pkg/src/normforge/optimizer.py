"""Exact solution of the social-norm design problems.

All candidate strategies for a scheme share the same stationary distribution
and transition matrix, so a whole enumeration is evaluated as one batched
linear solve. Ties between equally good strategies go to the smallest
canonical index; across schemes, to the smaller ``M`` or the larger ``K``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import HypothesisViolated, OutOfRange
from .incentives import CONSTRAINT_TOL, IncentiveReport, cooperation_constraints, zero_welfare_test
from .model import (
    MAX_ENUMERATION_L,
    CommunityParams,
    ReputationScheme,
    SocialNorm,
    SocialStrategy,
    _guard_enumeration,
    all_strategy_bits,
    stationary,
)
from .payoff import social_welfare, transition_matrix
from .strategies import L1_CANDIDATES

TIE_TOL = 1e-12


@functools.lru_cache(maxsize=None)
def _cached_bits(L: int) -> np.ndarray:
    bits = all_strategy_bits(L)
    bits.setflags(write=False)
    return bits


@dataclass(frozen=True, eq=False)
class BatchEvaluation:
    """Per-strategy results for one scheme; row ``k`` belongs to ``indices[k]``."""

    scheme: ReputationScheme
    indices: np.ndarray
    eta: np.ndarray
    period: np.ndarray
    longterm: np.ndarray
    welfare: np.ndarray
    spread: np.ndarray
    margins: np.ndarray
    sustainable: np.ndarray
    whitewash_incentive: np.ndarray

    @property
    def cooperation_incentive(self) -> np.ndarray:
        return self.spread.min(axis=1)


def evaluate_strategies(
    params: CommunityParams, scheme: ReputationScheme, bits: Optional[np.ndarray] = None, indices=None
) -> BatchEvaluation:
    """Evaluate many strategies under one scheme. ``bits`` defaults to the full
    enumeration for ``scheme.L``."""
    if bits is None:
        bits = _cached_bits(scheme.L)
        if indices is None:
            indices = np.arange(bits.shape[0], dtype=np.int64)
    elif indices is None:
        n2 = bits.shape[1] * bits.shape[2]
        weights = (1 << np.arange(n2 - 1, -1, -1, dtype=np.int64))
        indices = bits.reshape(bits.shape[0], -1).astype(np.int64) @ weights
    eta = stationary(params, scheme).mass
    S = bits.astype(float)
    period = params.b * np.einsum("s,ksc->kc", eta, S) - params.c * np.einsum("ktc,c->kt", S, eta)
    P = transition_matrix(scheme, params).rows
    A = np.eye(scheme.size) - params.delta * P
    longterm = np.linalg.solve(A, period.T).T
    theta = np.arange(scheme.size)
    spread = params.delta * (1 - 2 * params.eps) * (longterm[:, scheme.up(theta)] - longterm[:, scheme.down(theta)])
    margins = spread - np.where(bits.any(axis=2), params.c, -params.c)
    return BatchEvaluation(
        scheme=scheme,
        indices=np.asarray(indices),
        eta=eta,
        period=period,
        longterm=longterm,
        welfare=period @ eta,
        spread=spread,
        margins=margins,
        sustainable=margins.min(axis=1) >= -CONSTRAINT_TOL,
        whitewash_incentive=np.maximum(longterm[:, scheme.K] - longterm.min(axis=1), 0.0),
    )


@dataclass(frozen=True)
class DesignSolution:
    norm: SocialNorm
    welfare: float
    report: IncentiveReport = field(compare=False)
    feasible_count: int = field(compare=False)

    @property
    def cooperative(self) -> bool:
        return self.welfare > 0

    @property
    def strategy(self) -> SocialStrategy:
        return self.norm.strategy


@dataclass(frozen=True)
class SchemeSearch:
    """Global optimum plus the optimum for each scheme variant tried."""

    best: DesignSolution
    table: dict

    @property
    def optimal_M(self) -> int:
        return self.best.norm.scheme.M

    @property
    def optimal_K(self) -> int:
        return self.best.norm.scheme.K


def _solve_scheme(
    params: CommunityParams,
    scheme: ReputationScheme,
    prune: bool = False,
    whitewash_cost: Optional[float] = None,
) -> DesignSolution:
    _guard_enumeration(scheme.L)
    bits = _cached_bits(scheme.L)
    indices = np.arange(bits.shape[0], dtype=np.int64)
    if prune:
        keep = prune_mask(params, scheme.L, bits)
        bits, indices = bits[keep], indices[keep]
    ev = evaluate_strategies(params, scheme, bits, indices)
    feasible = ev.sustainable.copy()
    if whitewash_cost is not None:
        feasible &= ev.whitewash_incentive <= whitewash_cost + CONSTRAINT_TOL
    # sigma^D is always feasible, so this never comes up empty
    best_w = ev.welfare[feasible].max()
    pick = int(np.flatnonzero(feasible & (ev.welfare >= best_w - TIE_TOL))[0])
    strategy = SocialStrategy(bits[pick])
    norm = SocialNorm(scheme, strategy)
    p = params if whitewash_cost is None else params.replace(c_w=whitewash_cost)
    report = cooperation_constraints(norm, p)
    return DesignSolution(
        norm=norm,
        welfare=float(social_welfare(norm, params)),
        report=report,
        feasible_count=int(feasible.sum()),
    )


def solve_dp_fixed_L(params: CommunityParams, L: int, prune: bool = False) -> DesignSolution:
    """Best sustainable strategy under the maximum punishment scheme of length ``L``."""
    return _solve_scheme(params, ReputationScheme(L, L, L), prune=prune)


def solve_dp_variable_M(params: CommunityParams, L: int, prune: bool = False) -> SchemeSearch:
    _guard_enumeration(L)
    table = {M: _solve_scheme(params, ReputationScheme(L, M, L), prune=prune) for M in range(1, L + 1)}
    best = None
    for M in range(1, L + 1):  # strict improvement only: ties keep the smaller M
        sol = table[M]
        if best is None or sol.welfare > best.welfare + TIE_TOL:
            best = sol
    return SchemeSearch(best, table)


def solve_dp_whitewash(
    params: CommunityParams, L: int, c_w: Optional[float] = None, prune: bool = False
) -> SchemeSearch:
    """Optimize over entry reputation ``K`` and strategy with ``M = L``,
    requiring both sustainability and whitewash-proofness."""
    _guard_enumeration(L)
    if c_w is None:
        c_w = params.c_w
    if c_w is None or not math.isfinite(c_w) or c_w < 0:
        raise OutOfRange("c_w", "c_w >= 0", c_w)
    p = params.replace(c_w=c_w)
    table = {K: _solve_scheme(p, ReputationScheme(L, L, K), prune=prune, whitewash_cost=c_w) for K in range(L + 1)}
    best = None
    for K in range(L, -1, -1):  # ties keep the larger K
        sol = table[K]
        if best is None or sol.welfare > best.welfare + TIE_TOL:
            best = sol
    return SchemeSearch(best, table)


def l1_thresholds(params: CommunityParams) -> tuple:
    """The three ``c/b`` cut points separating the four ``L = 1`` optima."""
    beta, a, e = params.beta, params.alpha, params.eps
    k1 = beta * (1 - a) ** 2 * (1 - 2 * e) * e
    k = beta * (1 - a) * (1 - 2 * e)
    t1 = k1 / (1 + k1)
    t2 = k * (1 - (1 - a) * e) / (1 - k1)
    return t1, t2, k


def analytic_optimal_L1(params: CommunityParams) -> SocialStrategy:
    """Closed-form optimum for two reputations, by ``c/b`` region."""
    share = (1 - params.alpha) * params.eps
    if not 0 < share < 0.5:
        raise HypothesisViolated(f"requires 0 < (1-alpha)*eps < 1/2, got {share!r}")
    t1, t2, t3 = l1_thresholds(params)
    ratio = params.c / params.b
    if ratio <= t1:
        return L1_CANDIDATES[1]
    if ratio <= t2:
        return L1_CANDIDATES[2]
    if ratio <= t3:
        return L1_CANDIDATES[3]
    return L1_CANDIDATES[4]


def _prune_thresholds(params: CommunityParams, L: int):
    if not (params.eps > 0 and params.alpha < 1):
        raise HypothesisViolated("pruning requires eps > 0 and alpha < 1")
    log_ratio = math.log(params.c / params.b)
    log_beta = math.log(params.beta) if params.beta > 0 else -math.inf
    row0 = min(log_ratio / log_beta, L) if log_beta != -math.inf else 0.0
    a, e = params.alpha, params.eps
    top = (1 - a) ** (L + 1) * (1 - e) ** L * e
    Y = (top - (1 - a) ** (L + 2) * (1 - e) ** (L + 1) * e) / (top + a)
    if log_beta == -math.inf:
        middle = math.inf
    else:
        middle = L - (log_ratio - math.log(Y)) / log_beta
    return row0, middle


def prune_mask(params: CommunityParams, L: int, bits: np.ndarray) -> np.ndarray:
    """Vectorized form of ``prune_candidates``: True where a strategy survives."""
    row0, middle = _prune_thresholds(params, L)
    theta = np.arange(L + 1)
    serves = bits.any(axis=2)
    keep = np.ones(bits.shape[0], dtype=bool)
    # row 0: once it serves anyone it must serve every client at or above the cut
    need = theta >= row0
    keep &= ~serves[:, 0] | bits[:, 0, need].all(axis=1)
    # middle rows at or above the cut must serve top-reputation clients
    for t in range(1, L):
        if t >= middle:
            keep &= ~serves[:, t] | bits[:, t, L]
    # top row: if it serves anyone it serves its peers
    keep &= ~serves[:, L] | bits[:, L, L]
    return keep


def prune_candidates(params: CommunityParams, L: int) -> Callable[[SocialStrategy], bool]:
    """Predicate that is False only for strategies that cannot be optimal under
    fixed ``L`` with maximum punishment. A search accelerator; never changes
    the optimum."""
    _prune_thresholds(params, L)

    def keep(strategy: SocialStrategy) -> bool:
        return bool(prune_mask(params, L, strategy.serve[None])[0])

    return keep


def lift_strategy(strategy: SocialStrategy) -> SocialStrategy:
    """Embed an ``L`` strategy into ``L + 1`` reputations by treating the new
    top reputation exactly like the old one."""
    L = strategy.L
    idx = np.minimum(np.arange(L + 2), L)
    return SocialStrategy(strategy.serve[np.ix_(idx, idx)])


@dataclass(frozen=True)
class WelfareBounds:
    zero_welfare: bool
    lower_bound: Optional[float]
    upper_bound: float
    optima: tuple
    monotone: bool
    within_bounds: bool


def welfare_bounds(params: CommunityParams, L_max: int = MAX_ENUMERATION_L) -> WelfareBounds:
    """Optimal welfare for ``L = 1..L_max`` alongside the analytic bounds."""
    if L_max < 1:
        raise OutOfRange("L_max", "L_max >= 1", L_max)
    _guard_enumeration(L_max)
    optima = tuple(solve_dp_fixed_L(params, L).welfare for L in range(1, L_max + 1))
    upper = params.b - params.c
    lower = None
    if params.c / params.b <= params.delta * (1 - 2 * params.eps):
        lower = (1 - (1 - params.alpha) * params.eps) * (params.b - params.c)
    zero = zero_welfare_test(params)
    monotone = all(optima[i] <= optima[i + 1] + CONSTRAINT_TOL for i in range(len(optima) - 1))
    within = all(-CONSTRAINT_TOL <= u <= upper + CONSTRAINT_TOL for u in optima)
    if lower is not None:
        within &= all(u >= lower - CONSTRAINT_TOL for u in optima)
    if zero:
        within &= all(u == 0 for u in optima)
    return WelfareBounds(zero, lower, upper, optima, monotone, within)


def max_min_difference_strategy(params: CommunityParams, L: int = 2) -> tuple:
    """Strategy maximizing ``min_theta v_inf(theta) - v_inf(0)`` over the full
    enumeration; returns ``(strategy, value, number of maximizers)``."""
    ev = evaluate_strategies(params, ReputationScheme(L, L, L))
    score = (ev.longterm[:, 1:] - ev.longterm[:, :1]).min(axis=1)
    best = score.max()
    ties = np.flatnonzero(score >= best - 1e-9)
    return SocialStrategy(_cached_bits(L)[ties[0]]), float(best), int(ties.size)



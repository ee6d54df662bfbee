"""Finite-population Monte-Carlo check of the analytic engine.

A population of ``N`` agents is matched by a uniformly random derangement each
period, servers act on the observed client reputation, reports flip with
probability ``eps``, and each agent independently leaves with probability
``alpha`` and is replaced at the entry reputation. Everything is driven by
numpy's PCG64 generator, so a seed reproduces a run bit for bit on one
platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import HorizonTooShort, OutOfRange
from .model import CommunityParams, ReputationDistribution, SocialNorm, stationary
from .payoff import period_payoffs

RNG_ALGORITHM = f"numpy.random.PCG64 (numpy {np.__version__})"


@dataclass(frozen=True)
class SimulationConfig:
    N: int = 2000
    T: int = 200
    seed: int = 0
    burn_in: int = 20
    rollouts: int = 100_000
    horizon: Optional[int] = None
    initial: str = "entry"

    def __post_init__(self):
        if self.N < 2:
            raise OutOfRange("N", "N >= 2", self.N)
        if self.burn_in < 0:
            raise OutOfRange("burn_in", "burn_in >= 0", self.burn_in)
        if self.T <= self.burn_in:
            raise OutOfRange("T", "T > burn_in", self.T)
        if self.rollouts < 2:
            raise OutOfRange("rollouts", "rollouts >= 2", self.rollouts)
        if not 0 <= self.seed < 2**64:
            raise OutOfRange("seed", "0 <= seed < 2^64", self.seed)
        if self.initial not in ("entry", "uniform"):
            raise OutOfRange("initial", "'entry' or 'uniform'", self.initial)


@dataclass(frozen=True, eq=False)
class ValueEstimate:
    mean: float
    se: float


@dataclass(frozen=True, eq=False)
class SimulationReport:
    empirical_distribution: ReputationDistribution
    empirical_welfare: float
    welfare_se: float
    value_estimates: np.ndarray
    value_se: np.ndarray
    final_distribution: ReputationDistribution
    rng_algorithm: str = RNG_ALGORITHM
    config: SimulationConfig = field(default=None)

    def same_as(self, other: "SimulationReport") -> bool:
        """Bit-for-bit comparison of all measured quantities."""
        return (
            self.empirical_distribution == other.empirical_distribution
            and self.final_distribution == other.final_distribution
            and self.empirical_welfare == other.empirical_welfare
            and self.welfare_se == other.welfare_se
            and np.array_equal(self.value_estimates, other.value_estimates)
            and np.array_equal(self.value_se, other.value_se)
        )


def match_agents(N: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random derangement: ``servers[i]`` serves client ``i``, nobody
    serves themselves. Rejection sampling keeps it uniform over derangements."""
    if N < 2:
        raise OutOfRange("N", "N >= 2", N)
    ids = np.arange(N)
    while True:
        perm = rng.permutation(N)
        if not (perm == ids).any():
            return perm


def simulate_population(norm: SocialNorm, params: CommunityParams, config: SimulationConfig) -> SimulationReport:
    scheme = norm.scheme
    serve = norm.strategy.serve
    pop_seq, value_seq = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.Generator(np.random.PCG64(pop_seq))
    N, n = config.N, scheme.size
    up = scheme.up(np.arange(n))
    down = scheme.down(np.arange(n))

    if config.initial == "uniform":
        rep = rng.integers(0, n, size=N)
    else:
        rep = np.full(N, scheme.K)

    counts = np.zeros(n, dtype=np.int64)
    welfare = []
    for t in range(config.T):
        measuring = t >= config.burn_in
        if measuring:
            counts += np.bincount(rep, minlength=n)
        servers = match_agents(N, rng)
        server_rep = rep[servers]
        acted = serve[server_rep, rep]  # action toward each client, F = True
        if measuring:
            welfare.append((params.b - params.c) * acted.mean())
        flipped = rng.random(N) < params.eps
        reported = acted ^ flipped
        prescribed = serve[server_rep, rep]
        new_server_rep = np.where(reported == prescribed, up[server_rep], down[server_rep])
        rep = np.empty_like(rep)
        rep[servers] = new_server_rep
        leaving = rng.random(N) < params.alpha
        rep[leaving] = scheme.K

    welfare = np.asarray(welfare)
    empirical = counts / counts.sum()
    means = np.empty(n)
    ses = np.empty(n)
    seeds = value_seq.spawn(n)
    for theta in range(n):
        est = simulate_value_function(
            norm, params, theta, config.rollouts, config.horizon, seed=seeds[theta]
        )
        means[theta], ses[theta] = est.mean, est.se
    return SimulationReport(
        empirical_distribution=ReputationDistribution(empirical),
        empirical_welfare=float(welfare.mean()),
        welfare_se=float(welfare.std(ddof=1) / math.sqrt(welfare.size)) if welfare.size > 1 else 0.0,
        value_estimates=means,
        value_se=ses,
        final_distribution=ReputationDistribution(np.bincount(rep, minlength=n) / N),
        config=config,
    )


def required_horizon(params: CommunityParams, truncation: float = 1e-6) -> int:
    """Smallest horizon whose discounted tail bound is below ``truncation``."""
    delta = params.delta
    scale = (params.b + params.c) / (1 - delta)
    if delta == 0:
        return 1
    h = math.ceil(math.log(truncation / scale) / math.log(delta))
    h = max(h, 1)
    while delta**h * scale >= truncation:
        h += 1
    return h


def simulate_value_function(
    norm: SocialNorm,
    params: CommunityParams,
    start_reputation: int,
    rollouts: int = 100_000,
    horizon: Optional[int] = None,
    seed=0,
    truncation: float = 1e-6,
) -> ValueEstimate:
    """Monte-Carlo estimate of the long-term value of one reputation by rolling
    the single-agent reputation chain forward and summing discounted period
    payoffs."""
    scheme = norm.scheme
    if not 0 <= start_reputation <= scheme.L:
        raise OutOfRange("start_reputation", f"0 <= start <= {scheme.L}", start_reputation)
    delta = params.delta
    if horizon is None:
        horizon = required_horizon(params, truncation)
    if delta > 0 and delta**horizon * (params.b + params.c) / (1 - delta) >= truncation:
        raise HorizonTooShort(
            f"horizon {horizon} leaves a tail bound above {truncation:g}; need {required_horizon(params, truncation)}"
        )
    v = period_payoffs(norm, stationary(params, scheme), params)
    rng = np.random.Generator(np.random.PCG64(seed))
    up = scheme.up(np.arange(scheme.size))
    down = scheme.down(np.arange(scheme.size))
    state = np.full(rollouts, start_reputation)
    total = np.zeros(rollouts)
    weight = 1.0
    for _ in range(horizon):
        total += weight * v[state]
        ok = rng.random(rollouts) >= params.eps
        state = np.where(ok, up[state], down[state])
        weight *= delta
    return ValueEstimate(float(total.mean()), float(total.std(ddof=1) / math.sqrt(rollouts)))

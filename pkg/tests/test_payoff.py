import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from normforge.errors import DimensionMismatch, UnsupportedScheme
from normforge.model import CommunityParams, ReputationScheme, SocialNorm, SocialStrategy, stationary
from normforge.payoff import (
    deviation_values,
    long_term_values,
    period_payoffs,
    social_welfare,
    social_welfare_pairs,
    transition_matrix,
    value_differences_closed_form,
)
from normforge.strategies import all_decline, decline_zero_clients, named, single_decline

params_st = st.builds(
    CommunityParams,
    b=st.floats(1.5, 20.0),
    c=st.just(1.0),
    beta=st.floats(0.0, 0.99),
    alpha=st.floats(0.0, 1.0),
    eps=st.floats(0.0, 0.5),
)


@st.composite
def max_punishment_norms(draw):
    L = draw(st.integers(1, 3))
    idx = draw(st.integers(0, 2 ** ((L + 1) ** 2) - 1))
    return SocialNorm.of(SocialStrategy.from_index(idx, L))


@st.composite
def any_norms(draw):
    L = draw(st.integers(1, 3))
    idx = draw(st.integers(0, 2 ** ((L + 1) ** 2) - 1))
    M = draw(st.integers(1, L))
    K = draw(st.integers(0, L))
    return SocialNorm(ReputationScheme(L, M, K), SocialStrategy.from_index(idx, L))


def test_period_payoffs_decline_zero(defaults):
    norm = SocialNorm.of(decline_zero_clients(1))
    v = period_payoffs(norm, stationary(defaults, norm.scheme), defaults)
    assert np.allclose(v, [-0.82, 9.18], atol=1e-14)


def test_period_payoffs_dimension_check(defaults):
    norm = SocialNorm.of(decline_zero_clients(1))
    with pytest.raises(DimensionMismatch):
        period_payoffs(norm, stationary(defaults, ReputationScheme(2)), defaults)


def test_transition_rows(defaults):
    P = transition_matrix(ReputationScheme(1), defaults)
    assert P.row(0) == pytest.approx({1: 0.8, 0: 0.2})
    assert P.row(1) == pytest.approx({1: 0.8, 0: 0.2})
    P3 = transition_matrix(ReputationScheme(3, 1), defaults)
    assert P3.row(2) == pytest.approx({3: 0.8, 1: 0.2})
    assert P3.row(0) == pytest.approx({1: 0.8, 0: 0.2})


def test_all_decline_is_worthless(defaults):
    for L in (1, 2, 3):
        assert not long_term_values(SocialNorm.of(all_decline(L)), defaults).longterm.any()


def test_decline_zero_values(defaults):
    prof = long_term_values(SocialNorm.of(decline_zero_clients(1)), defaults)
    assert np.allclose(prof.longterm, [17.642857142857142, 27.642857142857142], atol=1e-12)
    assert prof.differences() == pytest.approx([10.0], abs=1e-12)


def test_closed_form_differences_examples(defaults):
    d1 = value_differences_closed_form(SocialNorm.of(named("s1.1", 1)), defaults)
    assert d1 == pytest.approx([0.18 * 9], abs=1e-12)
    dB = value_differences_closed_form(SocialNorm.of(single_decline(2)), defaults)
    assert dB[1] == pytest.approx(0.1296 * 9.2, abs=1e-12)


def test_closed_form_needs_full_drop(defaults):
    with pytest.raises(UnsupportedScheme):
        value_differences_closed_form(SocialNorm.of(single_decline(2), M=1), defaults)


def test_welfare_examples(defaults):
    assert social_welfare(SocialNorm.of(decline_zero_clients(1)), defaults) == pytest.approx(7.38, abs=1e-12)
    expected = (1 - 0.9**3 * 0.8 * 0.04) * 9
    assert expected == pytest.approx(8.790048, abs=1e-12)
    assert social_welfare(SocialNorm.of(single_decline(2)), defaults) == pytest.approx(expected, abs=1e-12)


def test_deviator_geometric_series_oracle(defaults):
    """Lone agent who always declines under decline-zero-clients at L = 1:
    it never pays, is served only at reputation 1, and lands on reputation 1
    with probability q = eta(0)(1-eps) + eta(1) eps from either state."""
    p = defaults
    eta0, eta1 = 0.18, 0.82
    q = eta0 * (1 - p.eps) + eta1 * p.eps
    d = p.delta
    v0 = sum(d**t * q * p.b for t in range(1, 2000))
    v1 = p.b + v0
    assert (v0, v1) == pytest.approx((7.92, 17.92), abs=1e-12)
    dev = deviation_values(SocialNorm.of(decline_zero_clients(1)), p, all_decline(1))
    assert np.allclose(dev.longterm, [v0, v1], atol=1e-9)


def test_deviation_to_own_strategy_is_identity(defaults):
    for name in ("s1.1", "s1.2", "D0"):
        norm = SocialNorm.of(named(name, 1))
        assert np.allclose(
            deviation_values(norm, defaults, norm.strategy).longterm,
            long_term_values(norm, defaults).longterm,
            atol=1e-12,
        )


def test_deviation_shape_check(defaults):
    with pytest.raises(DimensionMismatch):
        deviation_values(SocialNorm.of(decline_zero_clients(1)), defaults, all_decline(2))


@given(params_st, max_punishment_norms())
def test_closed_form_matches_linear_solve(p, norm):
    prof = long_term_values(norm, p)
    assert np.allclose(value_differences_closed_form(norm, p), prof.differences(), atol=1e-9)


@given(params_st, any_norms())
def test_welfare_double_computation(p, norm):
    assert social_welfare(norm, p) == pytest.approx(social_welfare_pairs(norm, p), abs=1e-12)


@given(params_st, any_norms())
def test_payoff_bounds_and_residual(p, norm):
    dist = stationary(p, norm.scheme)
    prof = long_term_values(norm, p, dist)
    assert np.all(prof.period >= -p.c - 1e-12) and np.all(prof.period <= p.b + 1e-12)
    P = transition_matrix(norm.scheme, p).rows
    assert np.max(np.abs(prof.longterm - prof.period - p.delta * P @ prof.longterm)) < 1e-9


@given(params_st, max_punishment_norms())
def test_difference_bound(p, norm):
    assert np.all(long_term_values(norm, p).differences() <= (p.b + p.c) / (1 - p.gamma) + 1e-9)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normforge.errors import MissingWhitewashCost
from normforge.incentives import (
    cooperation_constraints,
    deviation_gains,
    find_profitable_deviation,
    is_sustainable,
    is_sustainable_bruteforce,
    whitewash_check,
    whitewash_sufficiency_bound,
    zero_welfare_test,
)
from normforge.model import CommunityParams, ReputationScheme, SocialNorm, SocialStrategy, enumerate_strategies
from normforge.strategies import all_decline, all_fulfill, decline_zero_clients, named

params_st = st.builds(
    CommunityParams,
    b=st.just(10.0),
    c=st.floats(0.05, 9.95),
    beta=st.floats(0.0, 0.99),
    alpha=st.floats(0.0, 1.0),
    eps=st.floats(0.0, 0.5),
)


def test_decline_zero_spread(defaults):
    rep = cooperation_constraints(SocialNorm.of(decline_zero_clients(1)), defaults)
    assert rep.cooperation_incentive == pytest.approx(4.32, abs=1e-12)
    assert rep.sustainable
    assert np.allclose(rep.cooperation_margins, [3.32, 3.32], atol=1e-12)


def test_first_candidate_not_sustainable(defaults):
    rep = cooperation_constraints(SocialNorm.of(named("s1.1", 1)), defaults)
    assert rep.cooperation_incentive == pytest.approx(0.69984, abs=1e-12)
    assert not rep.sustainable
    assert rep.binding_reputations == (0, 1)


def test_sustainability_examples(defaults):
    assert is_sustainable(SocialNorm.of(decline_zero_clients(1)), defaults)
    assert not is_sustainable(SocialNorm.of(decline_zero_clients(1)), defaults.replace(c=5))
    for L in (1, 2, 3):
        assert is_sustainable(SocialNorm.of(all_decline(L)), defaults)
    assert not is_sustainable(SocialNorm.of(all_fulfill(2)), defaults)


def test_bruteforce_agrees_on_every_l1_norm(defaults):
    for s in enumerate_strategies(1):
        norm = SocialNorm.of(s)
        assert is_sustainable(norm, defaults) == is_sustainable_bruteforce(norm, defaults), s


def test_bruteforce_reports_witness(defaults):
    norm = SocialNorm.of(named("s1.1", 1))
    dev = find_profitable_deviation(norm, defaults)
    assert dev is not None and dev.gain > 0
    assert dev.strategy != norm.strategy
    assert find_profitable_deviation(SocialNorm.of(decline_zero_clients(1)), defaults) is None


def test_no_gain_from_following(defaults):
    norm = SocialNorm.of(named("s1.2", 1))
    assert np.allclose(deviation_gains(norm, defaults, norm.strategy), 0, atol=1e-12)


@settings(max_examples=20)
@given(params_st, st.integers(0, 15))
def test_lemma2_random(p, idx):
    norm = SocialNorm.of(SocialStrategy.from_index(idx, 1))
    assert is_sustainable(norm, p) == is_sustainable_bruteforce(norm, p)


@given(params_st, st.integers(0, 511), st.integers(1, 2), st.integers(0, 2))
def test_service_constraint_implies_decline_constraint(p, idx, M, K):
    norm = SocialNorm(ReputationScheme(2, M, K), SocialStrategy.from_index(idx, 2))
    rep = cooperation_constraints(norm, p)
    s = norm.scheme
    theta = np.arange(s.size)
    spread = p.delta * (1 - 2 * p.eps) * (rep.longterm[s.up(theta)] - rep.longterm[s.down(theta)])
    f_margin, d_margin = spread - p.c, spread + p.c
    assert np.allclose(d_margin - f_margin, 2 * p.c)
    assert np.all((f_margin < 0) | (d_margin >= 0))
    expected = np.where(norm.strategy.serves_anyone(), f_margin, d_margin)
    assert np.allclose(rep.cooperation_margins, expected, atol=1e-12)


def test_whitewash_bound_value(defaults):
    assert whitewash_sufficiency_bound(defaults) == pytest.approx(11 / 0.424, abs=1e-12)
    assert whitewash_sufficiency_bound(defaults) == pytest.approx(25.943396226415, abs=1e-9)


def test_whitewash_requires_cost(defaults):
    with pytest.raises(MissingWhitewashCost):
        whitewash_check(SocialNorm.of(all_decline(1)), defaults)


def test_all_decline_whitewash_proof(defaults):
    for K in (0, 1, 2):
        rep = whitewash_check(SocialNorm.of(all_decline(2), K=K), defaults.replace(c_w=0.0))
        assert rep.whitewash_incentive == 0 and rep.whitewash_proof


def test_above_bound_every_norm_whitewash_proof(defaults):
    p = defaults.replace(c_w=whitewash_sufficiency_bound(defaults))
    for s in enumerate_strategies(1):
        for K in (0, 1):
            assert whitewash_check(SocialNorm.of(s, K=K), p).whitewash_proof


def test_zero_welfare_test_examples(defaults):
    assert not zero_welfare_test(defaults)
    assert zero_welfare_test(defaults.replace(eps=0.5))
    assert zero_welfare_test(defaults.replace(beta=0.0))
    assert zero_welfare_test(defaults.replace(alpha=1.0))

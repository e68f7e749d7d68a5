import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankpromo.core import (CommunityConfig, ConfigError, Page, RankingConfig, Rule,
                            awareness_threshold_count, make_quality_vector, popularity,
                            ranked_order)


def test_default_community_derived_values():
    cfg = CommunityConfig()
    assert (cfg.n, cfg.u, cfg.m) == (10_000, 1_000, 100)
    assert cfg.v == pytest.approx(100.0)
    assert cfg.lam == pytest.approx(1 / 547.5)


def test_scaled_keeps_ratios():
    cfg = CommunityConfig().scaled(0.1)
    assert (cfg.n, cfg.u, cfg.m, cfg.v_u) == (1000, 100, 10, 100.0)
    assert cfg.u / cfg.n == pytest.approx(0.1)
    assert cfg.m / cfg.u == pytest.approx(0.1)
    assert cfg.v_u / cfg.u == pytest.approx(1.0)
    assert cfg.v == pytest.approx(10.0)


@pytest.mark.parametrize("kwargs", [dict(n=0), dict(m=20, u=10), dict(l=0), dict(q_max=1.5),
                                    dict(v_u=-1), dict(n=2.5)])
def test_community_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        CommunityConfig(**kwargs)


def test_ranking_config_validation():
    with pytest.raises(ConfigError):
        RankingConfig(Rule.SELECTIVE, k=0)
    with pytest.raises(ConfigError):
        RankingConfig(Rule.UNIFORM, r=1.2)
    with pytest.raises(ConfigError):
        RankingConfig(Rule.SELECTIVE, k=11).check(CommunityConfig(n=10, u=10, m=10))
    assert RankingConfig("selective").rule is Rule.SELECTIVE
    assert not RankingConfig().promotes


def test_quality_vector_examples():
    q = make_quality_vector(CommunityConfig(n=10, u=10, m=1))
    assert q[0] == 0.4
    assert q[0] / q[1] == pytest.approx(2 ** 2.1)
    assert q[0] / q[1] == pytest.approx(4.287, abs=1e-3)
    assert np.all(np.diff(q) <= 0)
    flat = make_quality_vector(CommunityConfig(n=10, u=10, m=1, quality_exponent=0))
    assert np.all(flat == 0.4)


def test_popularity_examples():
    assert popularity(Page(0, 0.7), 100) == 0
    assert popularity(Page(0, 0.3, aware_monitored=set(range(10))), 10) == pytest.approx(0.3)
    assert popularity(Page(0, 0.4, aware_monitored=set(range(50))), 100) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        popularity(Page(0, 0.4, aware_monitored={1, 2, 3}), 2)


@given(st.integers(1, 50), st.data())
def test_popularity_bounded_by_quality(m, data):
    q = data.draw(st.floats(0, 1))
    aware = data.draw(st.sets(st.integers(0, m - 1)))
    p = popularity(Page(0, q, aware_monitored=aware), m)
    assert 0 <= p <= q


def test_ranked_order_examples():
    assert list(ranked_order(np.array([0.3, 0.1, 0.2]), np.zeros(3))) == [0, 2, 1]
    # equal popularity: the page born earlier wins
    assert list(ranked_order(np.array([0.2, 0.2]), np.array([9, 5]))) == [1, 0]
    assert list(ranked_order(np.array([0.5]), np.array([0]))) == [0]


def test_awareness_threshold_count():
    assert awareness_threshold_count(100, 0.99) == 99
    assert awareness_threshold_count(10, 0.99) == 10
    assert awareness_threshold_count(1, 0.99) == 1
    assert awareness_threshold_count(2, 0.5) == 1
    assert awareness_threshold_count(7, 0.0) == 1
    assert awareness_threshold_count(3, 1.0) == math.ceil(3 * 1.0)

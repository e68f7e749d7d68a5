import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankpromo.ranking import RankedList
from rankpromo.visits import (RankSampler, allocate_mixed_visits, allocate_search_visits,
                              draw_visit_count, f2, rank_visit_rates, surf_probabilities, theta)


def plain_list(n):
    return RankedList(np.arange(n), np.zeros(n, dtype=bool))


def test_f2_examples():
    assert f2(1, 1, 100) == pytest.approx(100)
    assert f2(1, 50, 7) / f2(4, 50, 7) == pytest.approx(8)
    hand = sum(i ** -1.5 for i in range(1, 10_001))
    assert theta(10_000, 100) == pytest.approx(100 / hand)
    assert theta(10_000, 100) == pytest.approx(38.57, abs=0.01)


def test_f2_rates_sum_to_v_and_reject_bad_ranks():
    assert rank_visit_rates(300, 12.5).sum() == pytest.approx(12.5)
    with pytest.raises(ValueError):
        f2(0, 10, 1)
    with pytest.raises(ValueError):
        f2(11, 10, 1)
    assert np.allclose(f2(np.array([1.0, 2.5]), 10, 1), theta(10, 1) * np.array([1, 2.5 ** -1.5]))


def test_search_allocation_examples():
    rng = np.random.default_rng(0)
    assert allocate_search_visits(plain_list(5), 0, 3, rng).total == 0
    one = allocate_search_visits(plain_list(1), 50, 3, rng)
    assert one.counts.tolist() == [50]


def test_two_page_rank_share():
    rng = np.random.default_rng(11)
    v = 10 ** 6
    share = allocate_search_visits(plain_list(2), v, 1, rng).counts[0] / v
    p = 1 / (1 + 2 ** -1.5)
    assert p == pytest.approx(0.7388, abs=1e-4)
    assert abs(share - p) < 3 * np.sqrt(p * (1 - p) / v)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 200), st.integers(0, 500), st.floats(0, 1), st.floats(0, 1),
       st.integers(0, 10 ** 6))
def test_mixed_allocation_conserves_visits(n, v, x, c, seed):
    rng = np.random.default_rng(seed)
    pop = rng.random(n) * (rng.random() < 0.7)
    alloc = allocate_mixed_visits(pop, plain_list(n), x, c, v, 4, rng)
    assert alloc.total == v
    assert alloc.counts.sum() == v
    assert np.all((alloc.users >= 0) & (alloc.users < 4))


def test_surf_probability_examples():
    assert np.allclose(surf_probabilities(np.array([0.3, 0.1]), 0.15), [0.7125, 0.2875])
    assert np.allclose(surf_probabilities(np.array([0.3, 0.1, 0.0]), 1.0), [1 / 3] * 3)
    # all-zero popularity falls back to uniform
    assert np.allclose(surf_probabilities(np.zeros(4), 0.15), [0.25] * 4)


def test_mixed_x0_equals_search_with_same_stream():
    pop = np.linspace(0, 1, 30)
    a = allocate_mixed_visits(pop, plain_list(30), 0.0, 0.15, 400, 5, np.random.default_rng(2))
    b = allocate_search_visits(plain_list(30), 400, 5, np.random.default_rng(2))
    assert np.array_equal(a.pages, b.pages) and np.array_equal(a.users, b.users)


def test_pure_teleportation_is_uniform():
    n, v = 8, 80_000
    alloc = allocate_mixed_visits(np.arange(n) / n, plain_list(n), 1.0, 1.0, v, 2,
                                  np.random.default_rng(4))
    expected = v / n
    assert np.all(np.abs(alloc.counts - expected) < 5 * np.sqrt(expected))


def test_draw_visit_count_has_right_mean():
    rng = np.random.default_rng(0)
    draws = [draw_visit_count(2.3, rng) for _ in range(20_000)]
    assert set(draws) == {2, 3}
    assert np.mean(draws) == pytest.approx(2.3, abs=0.02)
    assert draw_visit_count(5.0, rng) == 5
    with pytest.raises(ValueError):
        draw_visit_count(-1, rng)


def test_rank_sampler_bounds():
    s = RankSampler(5)
    pos = s(10_000, np.random.default_rng(0))
    assert pos.min() >= 0 and pos.max() <= 4

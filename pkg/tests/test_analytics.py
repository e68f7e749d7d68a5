import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankpromo import analytics as A
from rankpromo.core import CommunityConfig, RankingConfig, Rule, make_quality_vector
from rankpromo.visits import f2, rank_visit_rates

DESK = CommunityConfig().scaled(0.1)


def linear_solve_stationary(q, F, lam, m):
    """Stationary law of the one-page daily chain by a direct linear solve."""
    P = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        a = i / m
        up = F(q * a) * (1 - a)
        P[i, 0] += lam
        if i < m:
            P[i, i + 1] += up
        P[i, i] += 1 - lam - up
    M = np.vstack([P.T - np.eye(m + 1), np.ones(m + 1)])
    b = np.zeros(m + 2)
    b[-1] = 1
    return np.linalg.lstsq(M, b, rcond=None)[0]


def test_markov_matches_three_state_linear_solve():
    got = A.awareness_markov(0.5, 0.1, 0.05, 2).probs
    want = linear_solve_stationary(0.5, lambda x: 0.1, 0.05, 2)
    # by hand: p = [0.1, 0.05, 0]; f0 = 1/3, f1 = f0*0.1/0.1, f2 = f1*0.05/0.05
    assert np.allclose(want, [1 / 3, 1 / 3, 1 / 3])
    assert np.allclose(got, want, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.floats(0.01, 1), st.floats(1e-4, 0.3), st.floats(0, 0.6),
       st.floats(-0.5, 0.5))
def test_markov_matches_linear_solve_for_varying_F(m, q, lam, f0, slope):
    def F(x):
        return np.maximum(f0 + slope * np.asarray(x), 0.0)
    if np.any(F(q * np.arange(m + 1) / m) * (1 - np.arange(m + 1) / m) + lam > 1):
        return
    got = A.awareness_markov(q, F, lam, m).probs
    want = linear_solve_stationary(q, lambda x: float(F(x)), lam, m)
    assert abs(got.sum() - 1) < 1e-9
    assert np.all(got >= 0)
    assert np.allclose(got, want, atol=1e-9)


def test_markov_trivial_cases():
    assert np.allclose(A.awareness_markov(0.3, 0.0, 0.01, 4).probs, [1, 0, 0, 0, 0])
    heavy = A.awareness_markov(0.3, 1e-6, 10.0, 4).probs
    assert heavy[0] > 0.999


def test_closed_form_examples():
    lam = 0.01
    rising = lambda x: lam + 5 * np.asarray(x)  # noqa: E731
    assert A.awareness_closed_form(0.4, rising, lam, 5).probs[0] == pytest.approx(0.5)
    assert np.allclose(A.awareness_closed_form(0.4, 0.0, lam, 3).probs, [1, 0, 0, 0])
    cf = A.awareness_closed_form(0.4, 1.0, lam, 3).probs
    mk = A.awareness_markov(0.4, 1.0, lam, 3).probs
    assert cf.sum() == pytest.approx(1.0)
    assert np.all(np.abs(cf - mk) <= np.maximum(0.1 * mk, 1e-3))


def test_closed_form_rejects_negative_mass():
    with pytest.raises(A.AnalyticError):
        A.awareness_closed_form(0.4, 0.01, 0.01, 5)


def test_awareness_matrix_rows_agree_with_single_calls():
    q = np.array([0.4, 0.1, 0.02])
    F = lambda x: 0.05 + np.asarray(x)  # noqa: E731
    mat = A.awareness_matrix(q, F, 0.01, 6)
    for row, qq in zip(mat, q):
        assert np.allclose(row, A.awareness_markov(qq, F, 0.01, 6).probs)
    with pytest.raises(ValueError):
        A.awareness_matrix(q, F, 0.01, 6, method="bogus")


def test_f1_nonrandomized_examples():
    q = np.array([0.4, 0.2])
    dist = np.array([[0.5, 0.25, 0.25], [0.2, 0.3, 0.5]])
    assert A.f1_nonrandomized(0.4, q, dist) == 1.0
    assert A.f1_nonrandomized(0.0, q, dist) == pytest.approx(1 + 0.5 + 0.8)
    # x = 0.15: page 0 beats it at a >= 1/2 (pop 0.2, 0.4); page 1 only at a = 1 (pop 0.2)
    assert A.f1_nonrandomized(0.15, q, dist) == pytest.approx(1 + 0.5 + 0.5)
    # x = 0.2 exactly ties page 1 at a = 1 and page 0 at a = 1/2: ties do not count
    assert A.f1_nonrandomized(0.2, q, dist) == pytest.approx(1 + 0.25)


def test_f1_selective_examples():
    assert A.f1_selective(3.0, 5, 0.1, 100) == 3.0
    assert A.f1_selective(10.0, 1, 0.1, 1e9) == pytest.approx(10 + 0.1 * 10 / 0.9)
    assert A.f1_selective(10.0, 1, 0.1, 1e9) == pytest.approx(11.11, abs=0.01)
    assert A.f1_selective(10.0, 1, 0.5, 2) == pytest.approx(12)


def test_estimate_z_examples():
    lam = 0.002
    assert A.estimate_z(1000, 0.0, lam) == pytest.approx(1000)
    assert A.estimate_z(1000, lam, lam) == pytest.approx(500)
    assert A.estimate_z(np.ones(10), lam, lam) == pytest.approx(5)


def test_f_zero_selective_examples():
    n, v = 10_000, 100.0
    assert A.f_zero_selective(1, 1.0, n, n, v) == pytest.approx(v / n)
    assert A.f_zero_selective(1, 0.0, 10, n, v) == 0.0
    hand = 0.1 * sum(f2(i, n, v) for i in range(1, 101)) / 10
    assert A.f_zero_selective(1, 0.1, 10, n, v) == pytest.approx(hand, rel=1e-12)
    with pytest.raises(ValueError):
        A.f_zero_selective(1, 0.1, 0, n, v)


def test_f_zero_selective_when_deterministic_list_runs_out_first():
    n, v, k, r, z = 100, 10.0, 1, 0.5, 90.0
    rates = rank_visit_rates(n, v)
    # the 10 deterministic pages are used up after about 20 slots
    det_end = round((n - z) / (1 - r))
    hand = (r * rates[:det_end].sum() + rates[det_end:].sum()) / z
    assert A.f_zero_selective(k, r, z, n, v) == pytest.approx(hand)


def test_tbp_analytic_examples():
    f0 = 0.2
    assert A.tbp_analytic(0.4, f0, 0.01, 1, 0.99) == pytest.approx(1 / f0)
    assert A.tbp_analytic(0.4, f0, 0.01, 1, 0.5) == pytest.approx(1 / f0)
    assert A.tbp_analytic(0.4, f0, 0.01, 2, 0.99) == pytest.approx(3 / f0)
    assert A.tbp_analytic(0.4, 0.0, 0.01, 2) == math.inf
    with pytest.raises(ValueError):
        A.tbp_analytic(0.0, f0, 0.01, 2)


def test_qpc_analytic_examples():
    flat = CommunityConfig(n=20, u=10, m=5, v_u=10, quality_exponent=0.0, q_max=0.3)
    assert A.qpc_analytic(flat, lambda x: 0.1 + np.asarray(x)) == pytest.approx(0.3)

    cfg = CommunityConfig(n=2, u=2, m=2, v_u=2, l=100)
    q = np.array([0.4, 0.1])
    F = lambda x: 0.05 + np.asarray(x)  # noqa: E731
    dist = A.awareness_matrix(q, F, cfg.lam, 2)
    levels = np.array([0, 0.5, 1.0])
    visits = [(dist[p] * F(q[p] * levels)).sum() for p in range(2)]
    want = (visits[0] * 0.4 + visits[1] * 0.1) / sum(visits)
    assert A.qpc_analytic(cfg, F, qualities=q) == pytest.approx(want)
    with pytest.raises(A.AnalyticError):
        A.qpc_analytic(cfg, 0.0, qualities=q)


def test_awareness_histogram_sums_to_one():
    h = A.awareness_histogram(0.4, 0.05, 0.002, 10)
    assert len(h) == 10 and h.sum() == pytest.approx(1.0)


def test_fit_recovers_exact_quadratic():
    x = np.logspace(-4, 0, 30)
    y = np.exp(0.1 * np.log(x) ** 2 + 0.8 * np.log(x) - 1.0)
    assert np.allclose(A.fit_loglog_quadratic(x, y), (0.1, 0.8, -1.0))


def test_random_mode_is_uniform():
    F = A.solve_visit_function(DESK, mode="random")
    assert np.all(F.table == DESK.v / DESK.n)
    assert np.allclose(F(F.grid), DESK.v / DESK.n, rtol=1e-12)
    assert F(0.0) == DESK.v / DESK.n


def test_proportional_mode_matches_its_closed_form():
    w = 0.5
    F = A.solve_visit_function(DESK, mode="proportional", proportional_weight=w)
    assert F.converged
    want = DESK.v * (w * F.grid / F.phi + (1 - w) / DESK.n)
    assert np.array_equal(F.table, want)
    # phi is the total popularity implied by F itself
    q = make_quality_vector(DESK)
    exact = lambda x: DESK.v * (w * np.asarray(x) / F.phi + (1 - w) / DESK.n)  # noqa: E731
    dist = A.awareness_matrix(q, exact, DESK.lam, DESK.m)
    levels = np.arange(DESK.m + 1) / DESK.m
    assert (dist * levels * q[:, None]).sum() == pytest.approx(F.phi, rel=1e-3)
    with pytest.raises(ValueError):
        A.solve_visit_function(DESK, mode="proportional", proportional_weight=1.0)


@pytest.mark.parametrize("ranking", [RankingConfig(), RankingConfig(Rule.SELECTIVE, 1, 0.1),
                                     RankingConfig(Rule.SELECTIVE, 2, 0.05)])
def test_solver_converges_to_its_fixed_point(ranking):
    F = A.solve_visit_function(DESK, ranking)
    assert F.converged
    assert A.fixed_point_residual(F, DESK, ranking) < 1e-3
    assert F.f_zero > 0


def test_solver_rejects_uniform_and_unknown_mode():
    with pytest.raises(ValueError):
        A.solve_visit_function(DESK, RankingConfig(Rule.UNIFORM, 1, 0.1))
    with pytest.raises(ValueError):
        A.solve_visit_function(DESK, mode="bogus")


def test_solver_warns_when_not_converged():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        F = A.solve_visit_function(DESK, max_iter=2)
    assert not F.converged
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_selective_beats_deterministic_analytically():
    qpc_none = A.qpc_analytic(DESK, A.solve_visit_function(DESK))
    sel = RankingConfig(Rule.SELECTIVE, 1, 0.1)
    qpc_sel = A.qpc_analytic(DESK, A.solve_visit_function(DESK, sel))
    assert qpc_sel > qpc_none


def test_visit_function_csv(tmp_path):
    F = A.solve_visit_function(DESK, mode="random")
    path = tmp_path / "f.csv"
    F.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,F_table,F_fit"
    assert len(lines) == 2 + len(F.grid)


def test_closed_form_is_the_printed_product_formula():
    q, lam, m = 0.3, 0.004, 4
    F = lambda x: 0.02 + 0.5 * np.asarray(x)  # noqa: E731
    got = A.awareness_closed_form(q, F, lam, m).probs
    a = np.arange(m + 1) / m
    for i in range(m):
        prod = np.prod([F(a[j - 1] * q) / (lam + F(a[j] * q)) for j in range(1, i + 1)])
        assert got[i] == pytest.approx(lam / ((lam + F(0.0)) * (1 - a[i])) * prod)
    assert got[m] == pytest.approx(1 - got[:m].sum())


monotone_F = st.tuples(st.floats(1e-4, 1), st.floats(0, 5), st.floats(0, 3))


@settings(max_examples=40, deadline=None)
@given(monotone_F, st.integers(1, 12), st.floats(1e-4, 0.1))
def test_rank_map_properties(coeffs, m, lam):
    c0, c1, c2 = coeffs
    F = lambda x: c0 + c1 * np.asarray(x) + c2 * np.asarray(x) ** 2  # noqa: E731
    q = np.array([0.4, 0.2, 0.05, 0.01])
    dist = A.awareness_matrix(q, F, lam, m)
    x = np.linspace(1e-4, 0.4, 60)
    f1 = A.f1_nonrandomized(x, q, dist)
    assert np.all(np.diff(f1) <= 1e-12)
    sel = A.f1_selective(f1, 2, 0.2, 3.0)
    assert np.all(sel >= f1)
    assert np.all(sel[f1 < 2] == f1[f1 < 2])


@settings(max_examples=40, deadline=None)
@given(monotone_F, st.integers(1, 12), st.floats(1e-4, 0.1), st.floats(0.01, 2))
def test_qpc_and_tbp_properties(coeffs, m, lam, bump):
    c0, c1, c2 = coeffs
    F = lambda x: c0 + c1 * np.asarray(x) + c2 * np.asarray(x) ** 2  # noqa: E731
    G = lambda x: F(x) + bump  # noqa: E731
    cfg = CommunityConfig(n=30, u=max(10, m), m=m, v_u=10, l=1 / lam)
    q = make_quality_vector(cfg)
    assert q.min() - 1e-12 <= A.qpc_analytic(cfg, F) <= q.max() + 1e-12
    assert A.tbp_analytic(0.4, G, lam, m) <= A.tbp_analytic(0.4, F, lam, m)

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tensorrank.methods import (
    avg,
    bayes,
    bayes_evaluate,
    g_pass_at_k_tau,
    inverse_difficulty,
    mg_pass_at_k,
    pass_at_k,
    pass_family,
    pass_hat_k,
)
from tensorrank.ranking import rank_scores
from tensorrank.tensor import OutcomeMatrix, ResponseTensor

LISTING_E = np.array([[0, 1, 2, 2, 1], [1, 1, 0, 2, 2]])


def subset_oracle(N, c, k, variant, tau=0.5):
    """Average a per-subset statistic over every size-k subset of N trials."""
    trials = [1] * c + [0] * (N - c)
    vals = []
    for sub in itertools.combinations(range(N), k):
        hits = sum(trials[i] for i in sub)
        if variant == "pass_at_k":
            vals.append(hits >= 1)
        elif variant == "pass_hat_k":
            vals.append(hits == k)
        elif variant == "g_pass_at_k_tau":
            vals.append(hits >= math.ceil(tau * k))
        else:
            # share of the thresholds ceil(k/2)+1 .. k that are reached
            levels = range(math.ceil(k / 2) + 1, k + 1)
            vals.append(np.mean([hits >= i for i in levels]) if levels else 0.0)
    return float(np.mean(vals))


def one_task(N, c):
    return ResponseTensor(np.array([[[1] * c + [0] * (N - c)]]))


# -- avg / bayes -------------------------------------------------------------


def test_avg_half_solved():
    R = ResponseTensor(np.array([[[1, 0], [0, 1]], [[1, 1], [1, 1]]]))
    np.testing.assert_allclose(avg(R).scores, [0.5, 1.0])


def test_avg_listing_matrix_with_rubric():
    R = ResponseTensor(LISTING_E[None], C=2)
    assert avg(R, [0.0, 0.5, 1.0]).scores[0] == pytest.approx(0.6, abs=1e-12)


def test_avg_identical_systems_tie_first():
    R = ResponseTensor(np.array([[[1, 0]], [[1, 0]], [[0, 0]]]))
    assert avg(R).ranks.competition.tolist() == [1, 1, 3]


def test_bayes_evaluate_closed_forms():
    mu, _ = bayes_evaluate(OutcomeMatrix(np.array([[1, 1]]), 1))
    assert mu == pytest.approx(3 / 4)
    mu, _ = bayes_evaluate(np.zeros((3, 2), dtype=int), [0, 1])
    assert mu == pytest.approx(1 / 8)
    mu, sigma = bayes_evaluate(OutcomeMatrix(LISTING_E, 2), [1, 1, 1])
    assert mu == pytest.approx(1.0) and sigma == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        bayes_evaluate(LISTING_E, [0, 0.5, 1], prior_strength=0)


def test_bayes_evaluate_matches_dirichlet_monte_carlo():
    w = np.array([0.0, 0.5, 1.0])
    mu, sigma = bayes_evaluate(OutcomeMatrix(LISTING_E, 2), w)
    counts = np.bincount(LISTING_E.ravel(), minlength=3)
    draws = np.random.default_rng(0).dirichlet(counts + 1.0, size=400_000) @ w
    assert mu == pytest.approx(draws.mean(), abs=2e-3)
    assert sigma == pytest.approx(draws.std(), rel=1e-2)


def test_bayes_beta_mean_and_consistency():
    rng = np.random.default_rng(1)
    data = rng.integers(0, 2, size=(3, 5, 4))
    res = bayes(data)
    k = data.reshape(3, -1).sum(axis=1)
    np.testing.assert_allclose(res.scores, (k + 1) / (20 + 2))
    assert res.diagnostics["sigma"].shape == (3,)
    big = (rng.random((1, 100, 100)) < 0.3).astype(int)
    assert abs(bayes(big).scores[0] - 0.3) < 0.01


def test_bayes_and_avg_agree_on_binary_order():
    rng = np.random.default_rng(2)
    for _ in range(20):
        data = rng.integers(0, 2, size=(5, 7, 3))
        np.testing.assert_array_equal(
            avg(data).ranks.competition, bayes(data).ranks.competition
        )


# -- pass family -----------------------------------------------------------------


def test_pass_at_k_example():
    assert pass_at_k(one_task(4, 2), k=2).scores[0] == pytest.approx(5 / 6)


@pytest.mark.parametrize("variant", ["pass_at_k", "pass_hat_k", "g_pass_at_k_tau", "mg_pass_at_k"])
def test_pass_family_matches_subset_enumeration(variant):
    for N in range(1, 7):
        for c in range(N + 1):
            for k in range(1, N + 1):
                for tau in (0.25, 0.5, 1.0):
                    got = pass_family(one_task(N, c), variant, k=k, tau=tau).scores[0]
                    want = subset_oracle(N, c, k, variant, tau)
                    assert got == pytest.approx(want, abs=1e-12), (variant, N, c, k, tau)


def test_pass_family_saturation_and_zero():
    for fn in (pass_at_k, pass_hat_k, g_pass_at_k_tau, mg_pass_at_k):
        assert fn(one_task(5, 5), k=3).scores[0] == pytest.approx(1.0)
    assert pass_at_k(one_task(5, 0), k=3).scores[0] == 0.0
    assert g_pass_at_k_tau(one_task(5, 0), k=3).scores[0] == 0.0


def test_pass_at_full_budget_is_an_indicator():
    rng = np.random.default_rng(3)
    data = rng.integers(0, 2, size=(4, 6, 5))
    c = data.sum(axis=2)
    np.testing.assert_allclose(pass_at_k(data, k=5).scores, (c >= 1).mean(axis=1))
    np.testing.assert_allclose(pass_hat_k(data, k=5).scores, (c == 5).mean(axis=1))


@given(st.integers(1, 12).flatmap(lambda N: st.tuples(st.just(N), st.integers(0, N))))
def test_pass_at_k_monotone_in_k(nc):
    N, c = nc
    vals = [pass_at_k(one_task(N, c), k=k).scores[0] for k in range(1, N + 1)]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    assert all(0.0 <= v <= 1.0 for v in vals)


def test_mg_pass_single_trial_is_a_total_tie():
    data = np.random.default_rng(4).integers(0, 2, size=(5, 10, 1))
    res = mg_pass_at_k(data, k=1)
    assert not res.scores.any()
    assert res.ranks.competition.tolist() == [1] * 5


def test_pass_family_binarizes_graded_outcomes():
    R = ResponseTensor(np.array([[[2, 1, 0]]]), C=2)
    assert pass_at_k(R, k=1).scores[0] == pytest.approx(1 / 3)


def test_pass_family_argument_checks():
    with pytest.raises(ValueError):
        pass_at_k(one_task(3, 1), k=4)
    with pytest.raises(ValueError):
        g_pass_at_k_tau(one_task(3, 1), k=2, tau=0.0)
    with pytest.raises(ValueError):
        pass_family(one_task(3, 1), "pass_at_two")


def test_pass_family_single_system_matrix():
    res = pass_at_k(np.array([[1, 0, 0], [0, 0, 0]]), k=1, mode="single_system")
    assert res.scores.tolist() == [pytest.approx(1 / 6)]


# -- inverse difficulty ---------------------------------------------------------


def test_inverse_difficulty_equal_tasks_follow_avg():
    rng = np.random.default_rng(5)
    base = rng.integers(0, 2, size=(4, 1, 6))
    data = np.repeat(base, 5, axis=1)  # every task has the same solve rate
    np.testing.assert_array_equal(
        inverse_difficulty(data).ranks.ordinal, avg(data).ranks.ordinal
    )


def test_inverse_difficulty_hard_task_dominates():
    # task 0 solved by everyone; task 1 only by system 2
    data = np.array([[[1], [0]], [[1], [0]], [[1], [1]]])
    res = inverse_difficulty(data)
    assert res.ranks.competition.tolist() == [2, 2, 1]
    np.testing.assert_allclose(res.diagnostics["task_weights"], [0.0, 1.0])


def test_inverse_difficulty_all_solved_falls_back_to_uniform():
    res = inverse_difficulty(np.ones((3, 4, 2), dtype=int))
    np.testing.assert_allclose(res.diagnostics["task_weights"], 0.25)
    assert res.ranks.competition.tolist() == [1, 1, 1]


def test_results_rank_their_own_scores():
    data = np.random.default_rng(6).integers(0, 3, size=(5, 4, 3))
    for res in (avg(data), bayes(data), pass_at_k(data, k=2), inverse_difficulty(data)):
        ref = rank_scores(res.scores, res.tie_tolerance)
        np.testing.assert_array_equal(res.ranks.fractional, ref.fractional)

import warnings

import numpy as np
import pytest

from conftest import dominance_tensor, random_tensor
from tensorrank.methods.graph import (
    alpharank,
    fictitious_play,
    hodge_rank,
    nash_rank,
    pagerank,
    rank_centrality,
    serial_rank,
)
from tensorrank.tensor import ComparisonSummary

MASS_METHODS = [pagerank, rank_centrality, alpharank]


def summary(wins, ties=None):
    wins = np.asarray(wins)
    return ComparisonSummary(wins, np.zeros_like(wins) if ties is None else np.asarray(ties))


def rps():
    # rock-paper-scissors: 0 beats 1, 1 beats 2, 2 beats 0, every time
    return summary([[0, 10, 0], [0, 0, 10], [10, 0, 0]])


# -- normalization -------------------------------------------------------------


@pytest.mark.parametrize("method", MASS_METHODS)
def test_masses_sum_to_one(method, rng):
    for _ in range(20):
        data = random_tensor(rng, L=int(rng.integers(2, 8)), M=6, N=2, C=2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = method(data)
        assert abs(res.scores.sum() - 1) <= 1e-10
        assert np.all(res.scores >= 0)


def test_nash_mass_sums_to_one(rng):
    for _ in range(5):
        data = random_tensor(rng, L=5, M=6, N=2, C=2)
        mass = nash_rank(data, iterations=5000).diagnostics["mass"]
        assert abs(mass.sum() - 1) <= 1e-10


# -- PageRank --------------------------------------------------------------------


def test_pagerank_symmetric_and_dominant():
    np.testing.assert_allclose(pagerank(summary([[0, 4], [4, 0]])).scores, [0.5, 0.5], atol=1e-12)
    res = pagerank(summary([[0, 5], [0, 0]]))
    assert res.scores[0] > res.scores[1]
    np.testing.assert_allclose(pagerank(np.ones((3, 2, 2), dtype=int)).scores, 1 / 3)


# -- Rank Centrality -------------------------------------------------------------


@pytest.mark.parametrize("w", [(3, 1), (1, 1), (9, 2)])
def test_rank_centrality_two_state_ratio(w):
    res = rank_centrality(summary([[0, w[0]], [w[1], 0]]))
    pi = res.scores
    assert abs(pi[0] / pi[1] - w[0] / w[1]) <= 1e-10


def test_rank_centrality_disconnected_warns():
    with pytest.warns(RuntimeWarning, match="components"):
        res = rank_centrality(summary([[0, 3, 0, 0], [1, 0, 0, 0], [0, 0, 0, 2], [0, 0, 1, 0]]))
    assert abs(res.scores.sum() - 1) < 1e-12
    assert res.scores[0] > res.scores[1] and res.scores[2] > res.scores[3]


# -- AlphaRank ---------------------------------------------------------------------


def test_alpharank_dominance_chain():
    res = alpharank(summary([[0, 5, 5], [0, 0, 5], [0, 0, 0]]), mutation=1e-3)
    assert res.scores[0] >= 0.9


def test_alpharank_symmetry_and_cycle():
    np.testing.assert_allclose(alpharank(np.ones((3, 2, 1), dtype=int)).scores, 1 / 3, atol=1e-12)
    np.testing.assert_allclose(alpharank(rps()).scores, 1 / 3, atol=1e-12)


def test_alpharank_rejects_bad_mutation():
    with pytest.raises(ValueError):
        alpharank(rps(), mutation=0)


# -- Nash --------------------------------------------------------------------------


def test_nash_transitive_is_pure():
    res = nash_rank(summary([[0, 5, 5], [0, 0, 5], [0, 0, 0]]), iterations=20000)
    mass = res.diagnostics["mass"]
    assert mass[0] > 0.99
    np.testing.assert_array_equal(res.ranks["competition"], [1, 2, 3])


def test_nash_rock_paper_scissors():
    mass = nash_rank(rps()).diagnostics["mass"]
    np.testing.assert_allclose(mass, 1 / 3, atol=0.02)


def test_nash_identical_systems():
    mass = nash_rank(np.ones((2, 3, 1), dtype=int), iterations=1000).diagnostics["mass"]
    np.testing.assert_allclose(mass, 0.5, atol=1e-12)


def test_fictitious_play_matching_pennies_scale():
    A = np.array([[0.0, 0.2, -0.4], [-0.2, 0.0, 0.2], [0.4, -0.2, 0.0]])
    x = fictitious_play(A, 50000)
    # at equilibrium no pure strategy does better than zero against x
    assert np.max(A @ x) < 0.01


# -- SerialRank --------------------------------------------------------------------


def test_serial_rank_transitive_tournament():
    res = serial_rank(dominance_tensor(L=5, M=10, N=1))
    np.testing.assert_array_equal(res.ranks["competition"], [1, 2, 3, 4, 5])


def test_serial_rank_two_systems():
    res = serial_rank(np.array([[[1], [1]], [[0], [1]]]))
    assert res.ranks["competition"].tolist() == [1, 2]


def test_serial_rank_is_permutation_equivariant(rng):
    base = dominance_tensor(L=5, M=10, N=1)
    perm = rng.permutation(5)
    a = serial_rank(base).ranks["competition"]
    b = serial_rank(base[perm]).ranks["competition"]
    np.testing.assert_array_equal(b, a[perm])


# -- HodgeRank ---------------------------------------------------------------------


@pytest.mark.parametrize("w", [(3, 1), (5, 0), (2, 2)])
def test_hodge_two_systems(w):
    res = hodge_rank(summary([[0, w[0]], [w[1], 0]]))
    Y = res.diagnostics["flow"][0, 1]
    np.testing.assert_allclose(res.scores, [Y / 2, -Y / 2], atol=1e-12)


def test_hodge_symmetric_and_mean_zero(rng):
    with pytest.warns(RuntimeWarning):
        np.testing.assert_allclose(hodge_rank(np.ones((3, 2, 2), dtype=int)).scores, 0, atol=1e-12)
    res = hodge_rank(random_tensor(rng, L=6, M=8, N=2, C=2))
    assert abs(res.scores.mean()) <= 1e-12


def test_hodge_residual_is_orthogonal_to_gradients(rng):
    for _ in range(10):
        res = hodge_rank(random_tensor(rng, L=5, M=10, N=2, C=2))
        s = res.scores
        Y, w = res.diagnostics["flow"], res.diagnostics["weights"]
        other = rng.normal(size=s.size)
        grad = other[:, None] - other[None, :]
        inner = np.sum(w * (s[:, None] - s[None, :] - Y) * grad)
        assert abs(inner) <= 1e-10


# -- equivariance across the module ------------------------------------------------


@pytest.mark.parametrize("method", [pagerank, rank_centrality, alpharank, hodge_rank])
def test_permutation_equivariance(method, rng):
    data = random_tensor(rng, L=5, M=12, N=2, C=3)
    perm = rng.permutation(5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        a = method(data).scores
        b = method(data[perm]).scores
    np.testing.assert_allclose(b, a[perm], atol=1e-9)

import warnings

import numpy as np
import pytest

from tensorrank.harness.generator import GeneratorConfig, generate
from tensorrank.methods.irt import (
    CLAMP,
    GUESS_MAX,
    gauss_hermite_normal,
    irt_fit,
    jml_gradient,
    jml_loglik,
    rasch_jml,
)
from tensorrank.ranking import kendall_tau_b


def central_gradient(f, z, h=1e-5):
    g = np.zeros_like(z)
    for i in range(z.size):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2 * h)
    return g


@pytest.mark.parametrize("seed", range(5))
def test_jml_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    N = 3
    s = rng.integers(0, N + 1, size=(4, 6)).astype(float)
    z = rng.normal(size=10)

    def f(v):
        return jml_loglik(v[:4], v[4:], s, N)

    g_theta, g_b = jml_gradient(z[:4], z[4:], s, N)
    num = central_gradient(f, z)
    assert np.max(np.abs(np.concatenate([g_theta, g_b]) - num)) <= 1e-6


def test_jml_loglik_never_decreases(rng):
    for _ in range(5):
        s = rng.integers(0, 3, size=(5, 8)).astype(float)
        trace = []
        rasch_jml(s, 2, trace=trace)
        assert len(trace) > 1
        assert np.all(np.diff(trace) >= -1e-10)


def test_jml_gauge_and_bounds(rng):
    s = rng.integers(0, 2, size=(4, 6)).astype(float)
    theta, b, _, ok = rasch_jml(s, 1)
    assert ok
    assert abs(b.mean()) < 1e-12
    assert np.all(np.abs(theta) <= 2 * CLAMP)


def test_identical_systems_get_identical_abilities(rng):
    data = rng.integers(0, 2, size=(3, 6, 2))
    data[1] = data[0]
    for model in ("rasch", "rasch_mml"):
        res = irt_fit(data, model="rasch_jml" if model == "rasch" else model)
        assert abs(res.scores[0] - res.scores[1]) < 1e-6


def test_more_solved_tasks_means_higher_ability():
    base = np.array([[1, 0, 1, 0, 1, 0], [1, 0, 1, 0, 0, 0], [0, 1, 0, 1, 0, 1]])
    data = base[:, :, None]
    for model in ("rasch_jml", "rasch_mml"):
        res = irt_fit(data, model=model)
        assert res.scores[0] > res.scores[1]


def test_perfect_system_is_clamped_above_the_other():
    data = np.array([[[1], [1]], [[1], [0]]])
    with pytest.warns(RuntimeWarning):
        res = irt_fit(data, model="rasch_jml")
    assert res.scores[0] > res.scores[1]


def test_irt_rejects_graded_and_tiny_input():
    with pytest.raises(ValueError, match="binary"):
        irt_fit(np.full((2, 2, 1), 2))
    with pytest.raises(ValueError):
        irt_fit(np.zeros((2, 1, 3), dtype=int))
    with pytest.raises(ValueError):
        irt_fit(np.zeros((2, 2, 1), dtype=int), model="cml")


def test_gauss_hermite_integrates_normal_moments():
    x, w = gauss_hermite_normal(41)
    assert abs(w.sum() - 1) < 1e-12
    assert abs(w @ x) < 1e-12
    assert abs(w @ x**2 - 1) < 1e-10
    assert abs(w @ x**4 - 3) < 1e-9


def test_mml_is_permutation_equivariant(rng):
    data = rng.integers(0, 2, size=(5, 10, 2))
    perm = rng.permutation(5)
    a = irt_fit(data, model="rasch_mml").scores
    b = irt_fit(data[perm], model="rasch_mml").scores
    np.testing.assert_allclose(b, a[perm], atol=1e-9)


def test_2pl_and_3pl_parameters_are_bounded():
    R = generate(GeneratorConfig(L=8, M=80, N_max=4), 1).tensor
    two = irt_fit(R, model="rasch_2pl", max_iter=200)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # 3PL EM is slow to settle
        three = irt_fit(R, model="rasch_3pl", max_iter=200)
    assert np.all(two.diagnostics["a"] > 0)
    c = three.diagnostics["c"]
    assert np.all((c >= 0) & (c <= GUESS_MAX))
    truth = generate(GeneratorConfig(L=8, M=80, N_max=4), 1).truth
    for res in (two, three):
        assert kendall_tau_b(res.ranks["fractional"], truth) > 0.8


def test_dynamic_irt_scores_last_trial_ability():
    data = np.zeros((2, 6, 4), dtype=int)
    data[0, :4, :] = 1
    data[1, :2, :2] = 1
    data[1, :, 2:] = 1  # system 1 improves in later trials
    with pytest.warns(RuntimeWarning, match="clamped"):
        res = irt_fit(data, model="dynamic", kappa=0.5)
    path = res.diagnostics["theta_path"]
    assert path.shape == (2, 4)
    np.testing.assert_array_equal(res.scores, path[:, -1])
    assert path[1, -1] > path[1, 0]
    # a stiffer drift penalty keeps the path flatter
    with pytest.warns(RuntimeWarning, match="clamped"):
        stiff = irt_fit(data, model="dynamic", kappa=50.0).diagnostics["theta_path"]
    assert np.ptp(stiff[1]) < np.ptp(path[1])


@pytest.mark.slow
def test_rasch_recovers_generator_order_at_32_trials():
    config = GeneratorConfig(N_max=32)
    for seed in range(2):
        data = generate(config, seed)
        res = irt_fit(data.tensor, model="rasch_jml")
        assert kendall_tau_b(res.ranks["fractional"], data.truth) >= 0.95

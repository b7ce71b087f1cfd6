"""
Sequential rating systems and paired-comparison models.

Sequential raters (Elo, Glicko, TrueSkill) replay the tensor as a stream of
induced matches: for every task ``m``, trial ``n`` and pair ``a < b`` the
two systems play one game, decided by their outcomes on that cell (equal
outcomes are a draw). The stream order is fixed, so results are
deterministic, but they do depend on that order.

Paired-comparison models (Bradley-Terry and its tie extensions, Thompson
sampling, Metropolis MCMC) only use the aggregated win / tie counts.
"""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np
from numba import njit
from scipy import optimize
from scipy.special import expit, log_expit
from scipy.stats import norm

from ..priors import Prior, default_prior, resolve_prior
from ..result import MethodResult, make_result
from ..tensor import (
    ComparisonSummary,
    as_tensor,
    comparison_summary,
    connected_components,
)


class DisconnectedComparisonError(ValueError):
    """Raised when the comparison graph splits into several components."""

    def __init__(self, components: list[list[int]]):
        self.components = components
        super().__init__(
            "comparison graph is disconnected; components: "
            + "; ".join("{" + ", ".join(map(str, c)) + "}" for c in components)
        )


class MatchStream(NamedTuple):
    """Induced matches in stream order; ``result`` is a's score (1, 0.5 or 0)."""

    a: np.ndarray
    b: np.ndarray
    result: np.ndarray
    trial: np.ndarray

    def __len__(self) -> int:
        return self.a.size


def match_stream(R) -> MatchStream:
    R = as_tensor(R)
    L = R.L
    if L < 2:
        raise ValueError("need at least two systems")
    ia, ib = np.triu_indices(L, k=1)
    # cells in (task, trial) order, pairs innermost
    X = R.data.reshape(L, -1).T
    xa, xb = X[:, ia], X[:, ib]
    result = np.where(xa > xb, 1.0, np.where(xa < xb, 0.0, 0.5)).ravel()
    n_cells = X.shape[0]
    trial = np.repeat(np.tile(np.arange(R.N), R.M), ia.size)
    return MatchStream(
        np.tile(ia, n_cells), np.tile(ib, n_cells), result, trial
    )


# -- Elo ------------------------------------------------------------------


def elo(
    R,
    k_factor: float = 32.0,
    initial: float = 1500.0,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Classic Elo replayed over the induced match stream; draws score 0.5."""
    if k_factor <= 0:
        raise ValueError("k_factor must be positive")
    stream = match_stream(R)
    ratings = _elo_replay(stream, as_tensor(R).L, float(k_factor), float(initial))
    return make_result(
        "elo",
        ratings,
        exact=False,
        diagnostics={"k_factor": k_factor, "matches": len(stream)},
        tie_tolerance=tie_tolerance,
    )


@njit
def _elo_kernel(a, b, result, L, K, initial):
    r = np.full(L, initial)
    for i in range(a.size):
        expected = 1.0 / (1.0 + 10.0 ** ((r[b[i]] - r[a[i]]) / 400.0))
        delta = K * (result[i] - expected)
        r[a[i]] += delta
        r[b[i]] -= delta
    return r


def _elo_replay(stream: MatchStream, L: int, K: float, initial: float) -> np.ndarray:
    # the replay is inherently sequential, so it is compiled rather than vectorized
    return _elo_kernel(
        stream.a.astype(np.int64), stream.b.astype(np.int64),
        stream.result.astype(np.float64), L, K, initial,
    )


# -- Glicko ---------------------------------------------------------------

_Q = math.log(10.0) / 400.0


def _glicko_g(rd):
    return 1.0 / np.sqrt(1.0 + 3.0 * _Q**2 * rd**2 / math.pi**2)


def glicko(
    R,
    initial_rating: float = 1500.0,
    initial_rd: float = 350.0,
    rd_growth: float = 34.6,
    rd_floor: float = 30.0,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Glicko-1 with one rating period per trial index.

    Every match from trial ``n`` (across all tasks) is batched into period
    ``n``. Ratings deviations inflate by ``rd_growth`` at the start of each
    period, capped at ``initial_rd``, and never drop below ``rd_floor``.
    """
    if initial_rd <= 0:
        raise ValueError("initial_rd must be positive")
    R = as_tensor(R)
    L = R.L
    r = np.full(L, float(initial_rating))
    rd = np.full(L, float(initial_rd))
    for n in range(R.N):
        summary = comparison_summary(R.data[:, :, n : n + 1])
        games = summary.totals.astype(float)
        points = summary.wins + 0.5 * summary.ties
        rd = np.minimum(np.sqrt(rd**2 + rd_growth**2), initial_rd)
        played = games.sum(axis=1) > 0
        g = _glicko_g(rd)[None, :]
        E = 1.0 / (1.0 + 10.0 ** (-g * (r[:, None] - r[None, :]) / 400.0))
        d2_inv = _Q**2 * np.sum(games * g**2 * E * (1.0 - E), axis=1)
        precision = 1.0 / rd**2 + d2_inv
        step = _Q / precision * np.sum(g * (points - games * E), axis=1)
        r = np.where(played, r + step, r)
        rd = np.where(played, np.maximum(np.sqrt(1.0 / precision), rd_floor), rd)
    return make_result(
        "glicko",
        r,
        exact=False,
        diagnostics={"rd": rd, "periods": R.N},
        tie_tolerance=tie_tolerance,
    )


# -- TrueSkill ------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _v_win(t: float, eps: float) -> float:
    x = t - eps
    denom = _cdf(x)
    if denom < 1e-300:
        return -x
    return _pdf(x) / denom


def _w_win(t: float, eps: float) -> float:
    v = _v_win(t, eps)
    return v * (v + t - eps)


def _v_draw(t: float, eps: float) -> float:
    a, b = -eps - t, eps - t
    denom = _cdf(b) - _cdf(a)
    if denom < 1e-300:
        return -t
    return (_pdf(a) - _pdf(b)) / denom


def _w_draw(t: float, eps: float) -> float:
    a, b = -eps - t, eps - t
    denom = _cdf(b) - _cdf(a)
    if denom < 1e-300:
        return 1.0
    v = _v_draw(t, eps)
    return v * v + (b * _pdf(b) - a * _pdf(a)) / denom


def trueskill(
    R,
    mu0: float = 25.0,
    sigma0: float = 25.0 / 3.0,
    beta: float | None = None,
    tau_dyn: float | None = None,
    draw_prob: float = 0.1,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Two-player TrueSkill over the match stream; score is ``mu - 3 sigma``."""
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    if not 0 <= draw_prob < 1:
        raise ValueError("draw_prob must lie in [0, 1)")
    beta = sigma0 / 2.0 if beta is None else float(beta)
    tau_dyn = sigma0 / 100.0 if tau_dyn is None else float(tau_dyn)

    draw_margin = _SQRT2 * beta * float(norm.ppf((draw_prob + 1.0) / 2.0))
    stream = match_stream(R)
    L = as_tensor(R).L
    mu = [float(mu0)] * L
    var = [float(sigma0) ** 2] * L
    tau2, beta2 = tau_dyn**2, beta**2
    for a, b, s in zip(stream.a.tolist(), stream.b.tolist(), stream.result.tolist()):
        va, vb = var[a] + tau2, var[b] + tau2
        c2 = 2.0 * beta2 + va + vb
        c = math.sqrt(c2)
        eps = draw_margin / c
        if s == 0.5:
            t = (mu[a] - mu[b]) / c
            v, w = _v_draw(t, eps), _w_draw(t, eps)
            mu[a] += va / c * v
            mu[b] -= vb / c * v
        else:
            win, lose = (a, b) if s == 1.0 else (b, a)
            vw, vl = (va, vb) if s == 1.0 else (vb, va)
            t = (mu[win] - mu[lose]) / c
            v, w = _v_win(t, eps), _w_win(t, eps)
            mu[win] += vw / c * v
            mu[lose] -= vl / c * v
        var[a] = va * max(1.0 - va / c2 * w, 1e-12)
        var[b] = vb * max(1.0 - vb / c2 * w, 1e-12)
    mu_arr, sigma = np.array(mu), np.sqrt(np.array(var))
    return make_result(
        "trueskill",
        mu_arr - 3.0 * sigma,
        exact=False,
        diagnostics={"mu": mu_arr, "sigma": sigma},
        tie_tolerance=tie_tolerance,
    )


# -- Bradley-Terry family ---------------------------------------------------


def _require_connected(counts: np.ndarray) -> None:
    comps = connected_components(counts)
    if len(comps) > 1:
        raise DisconnectedComparisonError(comps)


def bt_loglik(log_strength: np.ndarray, wins: np.ndarray) -> float:
    """Bradley-Terry log-likelihood of a decisive-win matrix."""
    lam = np.asarray(log_strength, dtype=float)
    diff = lam[:, None] - lam[None, :]
    mask = wins > 0
    return float(np.sum(wins[mask] * log_expit(diff[mask])))


def bt_mm(
    wins: np.ndarray,
    max_iter: int = 1000,
    tol: float = 1e-10,
    trace: list | None = None,
) -> tuple[np.ndarray, int, bool]:
    """Hunter's MM iterations for the Bradley-Terry MLE.

    Returns the gauge-fixed log-strengths (sum zero), the iteration count
    and a convergence flag. If ``trace`` is a list the log-likelihood after
    every iteration is appended to it.
    """
    wins = np.asarray(wins, dtype=float)
    L = wins.shape[0]
    n = wins + wins.T
    w = wins.sum(axis=1)
    pi = np.ones(L)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        denom = np.sum(n / (pi[:, None] + pi[None, :]), axis=1)
        new = np.where(denom > 0, w / np.where(denom > 0, denom, 1.0), pi)
        # items with no wins collapse to zero; keep them strictly positive
        new = np.maximum(new, 1e-300)
        new /= np.exp(np.mean(np.log(new)))
        delta = np.max(np.abs(np.log(new) - np.log(pi)))
        pi = new
        if trace is not None:
            trace.append(bt_loglik(np.log(pi), wins))
        if delta < tol:
            converged = True
            break
    lam = np.log(pi)
    return lam - lam.mean(), it, converged


def _bt_map(wins: np.ndarray, prior: Prior, max_iter: int, tol: float):
    wins = np.asarray(wins, dtype=float)
    L = wins.shape[0]

    def negpost(lam):
        diff = lam[:, None] - lam[None, :]
        ll = np.sum(wins * log_expit(diff))
        p = expit(diff)
        grad = np.sum(wins * (1.0 - p), axis=1) - np.sum(wins.T * p, axis=1)
        lp = np.sum(prior.log_density(lam))
        if not np.isfinite(lp):
            return np.inf, np.zeros(L)
        return -(ll + lp), -(grad + prior.grad_log_density(lam))

    res = optimize.minimize(
        negpost,
        np.zeros(L),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol},
    )
    return res.x, int(res.nit), bool(res.success)


def _davidson_fit(wins, ties, max_iter, tol):
    """Fixed-point iterations for the Davidson tie model."""
    wins = np.asarray(wins, dtype=float)
    ties = np.asarray(ties, dtype=float)
    L = wins.shape[0]
    n = wins + wins.T + ties
    score = wins.sum(axis=1) + 0.5 * ties.sum(axis=1)
    total_ties = ties[np.triu_indices(L, 1)].sum()
    pi = np.ones(L)
    nu = 0.5 if total_ties > 0 else 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        root = np.sqrt(pi[:, None] * pi[None, :])
        D = pi[:, None] + pi[None, :] + nu * root
        ratio = np.sqrt(pi[None, :] / pi[:, None])
        denom = np.sum(n * (1.0 + 0.5 * nu * ratio) / D, axis=1)
        new = np.maximum(score / denom, 1e-300)
        new /= np.exp(np.mean(np.log(new)))
        if total_ties > 0:
            root = np.sqrt(new[:, None] * new[None, :])
            D = new[:, None] + new[None, :] + nu * root
            iu = np.triu_indices(L, 1)
            new_nu = total_ties / np.sum((n * root / D)[iu])
        else:
            new_nu = 0.0
        delta = max(np.max(np.abs(np.log(new) - np.log(pi))), abs(new_nu - nu))
        pi, nu = new, new_nu
        if delta < tol:
            converged = True
            break
    lam = np.log(pi)
    return lam - lam.mean(), {"nu": float(nu)}, it, converged


def _rao_kupper_fit(wins, ties, max_iter, tol):
    wins = np.asarray(wins, dtype=float)
    ties = np.asarray(ties, dtype=float)
    L = wins.shape[0]
    iu = np.triu_indices(L, 1)
    t_up = ties[iu]

    def nll(x):
        lam, eta = x[:L], x[L]
        theta = 1.0 + math.exp(eta)
        # log(theta^2 - 1) without cancellation near theta = 1
        log_gap = eta + math.log(2.0 + math.exp(eta))
        e = np.exp(lam - lam.max())
        # P(a beats b) = e_a / (e_a + theta e_b)
        den = e[:, None] + theta * e[None, :]
        log_win = np.log(e[:, None]) - np.log(den)
        ll = np.sum(wins * log_win)
        log_tie = (
            log_gap
            + np.log(e[:, None] * e[None, :])
            - np.log(den)
            - np.log(den.T)
        )
        ll += np.sum(t_up * log_tie[iu])
        return -ll

    x0 = np.zeros(L + 1)
    res = optimize.minimize(
        nll, x0, method="L-BFGS-B", options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-15}
    )
    lam = res.x[:L]
    return (
        lam - lam.mean(),
        {"theta": float(1.0 + math.exp(res.x[L]))},
        int(res.nit),
        bool(res.success),
    )


BT_VARIANTS = ("plain", "davidson", "rao_kupper")


def bradley_terry(
    R,
    variant: str = "plain",
    prior=None,
    max_iter: int = 1000,
    tol: float = 1e-10,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Bradley-Terry strengths from decisive wins (and ties for the tie models).

    ``plain`` discards ties and runs MM iterations (or MAP optimization
    when a prior is given). ``davidson`` adds a tie term
    ``nu * sqrt(pi_a pi_b)``; ``rao_kupper`` uses a threshold ``theta >= 1``.
    Scores are log-strengths centred to sum zero.
    """
    if variant not in BT_VARIANTS:
        raise ValueError(f"unknown Bradley-Terry variant {variant!r}")
    summary = R if isinstance(R, ComparisonSummary) else comparison_summary(R)
    prior = resolve_prior(prior)
    wins, ties = summary.wins, summary.ties
    counts = summary.decisive if variant == "plain" else summary.totals
    _require_connected(counts)
    extra = {}
    if variant != "plain" and not wins.any():
        # ties only: the tie parameter runs off to infinity, strengths stay equal
        lam, it, ok = np.zeros(summary.L), 0, True
        extra = {"nu": math.inf} if variant == "davidson" else {"theta": math.inf}
    elif variant == "plain" and prior is None:
        lam, it, ok = bt_mm(wins, max_iter, tol)
    elif variant == "plain":
        lam, it, ok = _bt_map(wins, prior, max_iter, tol)
        lam = lam - lam.mean()
    elif variant == "davidson":
        lam, extra, it, ok = _davidson_fit(wins, ties, max_iter, tol)
    else:
        lam, extra, it, ok = _rao_kupper_fit(wins, ties, max_iter, tol)
    if not ok:
        warnings.warn(
            f"bradley_terry ({variant}) did not converge in {max_iter} iterations",
            RuntimeWarning,
            stacklevel=2,
        )
    name = {"plain": "bradley_terry", "davidson": "bradley_terry_davidson"}.get(
        variant, variant
    )
    return make_result(
        name,
        lam,
        exact=False,
        diagnostics={"iterations": it, "converged": ok, **extra},
        tie_tolerance=tie_tolerance,
    )


# -- Thompson sampling ------------------------------------------------------


def thompson(
    R,
    samples: int = 1000,
    rng_seed: int = 0,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Mean Copeland score under Beta posteriors on pairwise win probabilities.

    Each pair ``a < b`` gets ``p_ab ~ Beta(1 + wins[a, b], 1 + wins[b, a])``
    and ``p_ba = 1 - p_ab``. A system's sample score counts the opponents it
    beats with probability above one half.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    summary = comparison_summary(R)
    L = summary.L
    ia, ib = np.triu_indices(L, 1)
    rng = np.random.default_rng(rng_seed)
    p = rng.beta(
        1.0 + summary.wins[ia, ib], 1.0 + summary.wins[ib, ia], size=(samples, ia.size)
    )
    a_wins = (p > 0.5).astype(float)
    b_wins = (p < 0.5).astype(float)
    scores = np.zeros((samples, L))
    np.add.at(scores.T, ia, a_wins.T)
    np.add.at(scores.T, ib, b_wins.T)
    mean = scores.mean(axis=0)
    se = scores.std(axis=0, ddof=1) / math.sqrt(samples) if samples > 1 else np.zeros(L)
    return make_result(
        "thompson",
        mean,
        exact=False,
        diagnostics={"standard_error": se, "samples": samples, "seed": rng_seed},
        tie_tolerance=tie_tolerance,
    )


# -- Metropolis MCMC --------------------------------------------------------


def bayesian_mcmc(
    R,
    prior=None,
    iterations: int = 5000,
    burn_in: int = 1000,
    proposal_scale: float = 0.1,
    rng_seed: int = 0,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Posterior-mean Bradley-Terry log-strengths by random-walk Metropolis.

    ``lambda_0`` is pinned at 0; every iteration sweeps the remaining
    coordinates with one Gaussian proposal each. The independent prior
    applies to every free coordinate. Scores are the posterior means
    re-centred to sum zero.
    """
    if proposal_scale <= 0:
        raise ValueError("proposal_scale must be positive")
    if iterations <= burn_in:
        raise ValueError("iterations must exceed burn_in")
    prior = default_prior() if prior is None else resolve_prior(prior)
    summary = R if isinstance(R, ComparisonSummary) else comparison_summary(R)
    W = summary.wins.astype(float)
    L = W.shape[0]
    rng = np.random.default_rng(rng_seed)
    steps = rng.normal(0.0, proposal_scale, size=(iterations, L - 1))
    log_u = np.log(rng.random(size=(iterations, L - 1)))

    def local_loglik(i, lam):
        # terms of the likelihood that involve coordinate i
        d = lam[i] - lam
        return float(np.dot(W[i], log_expit(d)) + np.dot(W[:, i], log_expit(-d)))

    lam = np.zeros(L)
    lp = prior.log_density(lam)
    total = np.zeros(L)
    accepted = 0
    for t in range(iterations):
        for j in range(L - 1):
            i = j + 1
            old = lam[i]
            cur = local_loglik(i, lam) + lp[i]
            lam[i] = old + steps[t, j]
            new_lp = float(prior.log_density(lam[i]))
            prop = local_loglik(i, lam) + new_lp if np.isfinite(new_lp) else -np.inf
            if log_u[t, j] < prop - cur:
                lp[i] = new_lp
                accepted += 1
            else:
                lam[i] = old
        if t >= burn_in:
            total += lam
    mean = total / (iterations - burn_in)
    return make_result(
        "bayesian_mcmc",
        mean - mean.mean(),
        exact=False,
        diagnostics={
            "acceptance_rate": accepted / (iterations * (L - 1)),
            "posterior_mean_pinned": mean,
            "seed": rng_seed,
        },
        tie_tolerance=tie_tolerance,
    )

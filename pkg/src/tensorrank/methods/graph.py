"""
Graph, spectral and game-theoretic rankers built on the comparison graph.

Most of these operate on the decisive win-rate matrix
``winrate[a, b] = wins[a, b] / (wins[a, b] + wins[b, a])`` (0.5 when a pair
never differs).
"""

from __future__ import annotations

import warnings

import numpy as np

from ..result import MethodResult, make_result
from ..tensor import (
    ComparisonSummary,
    as_tensor,
    comparison_summary,
    connected_components,
    trial_means,
    win_rates,
)


def _summary(R) -> ComparisonSummary:
    return R if isinstance(R, ComparisonSummary) else comparison_summary(R)


# -- PageRank -----------------------------------------------------------------


def pagerank(
    R,
    damping: float = 0.85,
    max_iter: int = 1000,
    tol: float = 1e-12,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """PageRank on the graph where each loss sends an edge to the winner.

    Column ``b`` of the transition matrix spreads b's losses over the systems
    that beat it; a system that never lost jumps uniformly.
    """
    W = _summary(R).wins.astype(float)
    L = W.shape[0]
    out = W.sum(axis=0)
    T = np.where(out > 0, W / np.where(out > 0, out, 1.0), 1.0 / L)
    x = np.full(L, 1.0 / L)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = damping * (T @ x) + (1.0 - damping) / L
        new /= new.sum()
        if np.abs(new - x).sum() < tol:
            x, converged = new, True
            break
        x = new
    return make_result(
        "pagerank",
        x,
        exact=False,
        diagnostics={"iterations": it, "converged": converged, "damping": damping},
        tie_tolerance=tie_tolerance,
    )


# -- Rank Centrality ----------------------------------------------------------


def _rank_centrality_chain(summary: ComparisonSummary, nodes: np.ndarray) -> np.ndarray:
    W = summary.wins[np.ix_(nodes, nodes)].astype(float)
    dec = W + W.T
    has = dec > 0
    # a -> b with the empirical probability that b beats a
    lose = np.where(has, W.T / np.where(has, dec, 1.0), 0.0)
    d_max = max(int(has.sum(axis=1).max()), 1)
    P = lose / d_max
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    return P


def rank_centrality(R, tie_tolerance: float | None = None) -> MethodResult:
    """Stationary distribution of the Rank Centrality random walk.

    Disconnected comparison graphs are solved per component; each
    component's mass is scaled by its share of systems.
    """
    summary = _summary(R)
    L = summary.L
    comps = connected_components(summary.decisive)
    if len(comps) > 1:
        warnings.warn(
            f"comparison graph has {len(comps)} components; ranking each separately",
            RuntimeWarning,
            stacklevel=2,
        )
    pi = np.zeros(L)
    for comp in comps:
        nodes = np.array(comp)
        if nodes.size == 1:
            pi[nodes] = 1.0 / L
            continue
        P = _rank_centrality_chain(summary, nodes)
        sub = _solve_stationary(P)
        pi[nodes] = sub * nodes.size / L
    return make_result(
        "rank_centrality",
        pi,
        exact=False,
        diagnostics={"components": comps},
        tie_tolerance=tie_tolerance,
    )


def _solve_stationary(P: np.ndarray) -> np.ndarray:
    """Stationary vector of an irreducible chain via a linear solve."""
    L = P.shape[0]
    A = P.T - np.eye(L)
    A[-1, :] = 1.0
    rhs = np.zeros(L)
    rhs[-1] = 1.0
    pi = np.linalg.lstsq(A, rhs, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


# -- AlphaRank ------------------------------------------------------------------


def alpharank(
    R,
    mutation: float = 1e-3,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Single-population AlphaRank in the infinite-alpha limit.

    From system ``s`` a mutant ``t`` fixes with certainty when it wins more
    than half of their decisive comparisons and never otherwise. Mutants are
    proposed uniformly; a further ``mutation`` mass is spread over every
    move so the chain stays irreducible.
    """
    if not 0 < mutation < 1:
        raise ValueError("mutation must lie in (0, 1)")
    rates = win_rates(_summary(R))
    L = rates.shape[0]
    fix = (rates.T > 0.5).astype(float)  # fix[s, t]: t beats s
    np.fill_diagonal(fix, 0.0)
    P = ((1.0 - mutation) * fix + mutation) / (L - 1)
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    pi = _solve_stationary(P)
    return make_result(
        "alpharank",
        pi,
        exact=False,
        diagnostics={"mutation": mutation, "transition": P},
        tie_tolerance=tie_tolerance,
    )


# -- Nash -----------------------------------------------------------------------


def fictitious_play(A: np.ndarray, iterations: int = 100000, atol: float = 1e-12):
    """Average strategy of symmetric fictitious play on payoff matrix ``A``.

    Best-response ties are split evenly so symmetric games stay symmetric.
    """
    L = A.shape[0]
    counts = np.zeros(L)
    payoff = np.zeros(L)  # A @ counts
    for _ in range(iterations):
        best = payoff >= payoff.max() - atol
        br = best / best.sum()
        counts += br
        payoff += A @ br
    return counts / counts.sum()


def nash_rank(
    R,
    iterations: int = 100000,
    support_tol: float = 1e-3,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Equilibrium of the zero-sum meta-game with payoff ``winrate - 1/2``.

    Systems in the equilibrium support score their mass. Systems outside it
    score their (non-positive) expected payoff against the equilibrium, so
    they rank below the support and among themselves by that payoff.
    """
    rates = win_rates(_summary(R))
    A = rates - 0.5
    np.fill_diagonal(A, 0.0)
    mass = fictitious_play(A, iterations)
    payoff = A @ mass
    support = mass > support_tol
    scores = np.where(support, mass, np.minimum(payoff, 0.0) - support_tol)
    return make_result(
        "nash",
        scores,
        exact=False,
        diagnostics={"mass": mass, "payoff_vs_equilibrium": payoff},
        tie_tolerance=tie_tolerance,
    )


# -- SerialRank -------------------------------------------------------------------


def serial_rank(R, tie_tolerance: float | None = None) -> MethodResult:
    """Spectral seriation of the pairwise-majority similarity matrix.

    ``Sc[a, b]`` is the sign of the decisive majority between a and b (with
    ``Sc[a, a] = 1``); the similarity ``S = (L J + Sc Sc^T) / 2`` counts
    agreeing comparisons. Scores are the Laplacian's Fiedler vector,
    oriented to correlate positively with mean outcomes.
    """
    R_t = as_tensor(R) if not isinstance(R, ComparisonSummary) else None
    summary = _summary(R)
    W = summary.wins
    L = W.shape[0]
    Sc = np.sign(W - W.T).astype(float)
    np.fill_diagonal(Sc, 1.0)
    net = Sc.sum(axis=1) - 1.0
    if L == 2:
        scores = np.array([net[0], net[1]])
    else:
        S = 0.5 * (L * np.ones((L, L)) + Sc @ Sc.T)
        lap = np.diag(S.sum(axis=1)) - S
        try:
            vals, vecs = np.linalg.eigh(lap)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise RuntimeError(f"serial_rank eigen-solver failed: {exc}") from exc
        scores = vecs[:, 1].copy()
        ref = trial_means(R_t).mean(axis=1) if R_t is not None else net
        sign = np.sign(np.dot(scores - scores.mean(), ref - ref.mean()))
        if sign == 0:
            sign = np.sign(np.dot(scores - scores.mean(), net - net.mean())) or 1.0
        scores *= sign
    return make_result(
        "serial_rank",
        scores,
        exact=L == 2,
        tie_tolerance=tie_tolerance,
    )


# -- HodgeRank ----------------------------------------------------------------------


def hodge_rank(R, tie_tolerance: float | None = None) -> MethodResult:
    """Least-squares potential for the pairwise win-rate flow.

    Edge flow ``Y[a, b] = winrate[a, b] - winrate[b, a]`` is weighted by the
    number of decisive comparisons; the potential solves the weighted graph
    Laplacian system with the pseudo-inverse and is centred to mean zero.
    """
    summary = _summary(R)
    w = summary.decisive.astype(float)
    rates = win_rates(summary)
    Y = rates - rates.T
    lap = np.diag(w.sum(axis=1)) - w
    div = np.sum(w * Y, axis=1)
    comps = connected_components(w)
    if len(comps) > 1:
        warnings.warn(
            f"comparison graph has {len(comps)} components; potentials are per component",
            RuntimeWarning,
            stacklevel=2,
        )
    s = np.linalg.pinv(lap) @ div
    s -= s.mean()
    resid = w * (s[:, None] - s[None, :] - Y)
    return make_result(
        "hodge_rank",
        s,
        exact=False,
        diagnostics={"flow": Y, "weights": w, "residual": resid, "components": comps},
        tie_tolerance=tie_tolerance,
    )

"""
Listwise choice models fitted to per-(task, trial) ballots.

Each ballot is a weak ordering of the systems. Plackett-Luce needs strict
orderings, so by default every ballot is expanded into ``tie_draws``
strict orders whose tied groups are shuffled with a seeded RNG. The
alternative ``ties="breslow"`` keeps the groups and lets each member of a
tied group be chosen from the same remaining set. Ballots that tie every
system carry no preference and are dropped. Davidson-Luce keeps the ties and models a tied
group ``S`` of size ``k`` with weight ``delta_k * (prod_{i in S} pi_i)^(1/k)``.
"""

from __future__ import annotations

import warnings
from collections import Counter

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from ..result import MethodResult, make_result
from ..tensor import as_tensor, ballot_matrix, comparison_summary, connected_components
from .pairwise import DisconnectedComparisonError, bt_mm

LISTWISE_MODELS = ("plackett_luce", "davidson_luce", "bradley_terry_luce")


def _informative(X: np.ndarray) -> np.ndarray:
    """Ballots (rows of outcome values) that are not a total tie."""
    return X[X.max(axis=1) != X.min(axis=1)]


def strict_orders(X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Best-first strict orders, ties inside each group broken uniformly at random."""
    jitter = rng.random(X.shape)
    # sort by value descending, then by the random key
    return np.lexsort((jitter, -X), axis=1)


def pl_loglik(log_worth: np.ndarray, orders: np.ndarray) -> float:
    lw = np.asarray(log_worth)[orders]
    # log sum over the remaining suffix at each stage
    suffix = np.logaddexp.accumulate(lw[:, ::-1], axis=1)[:, ::-1]
    return float(np.sum(lw[:, :-1] - suffix[:, :-1]))


def pl_mm(orders: np.ndarray, L: int, max_iter=1000, tol=1e-10, trace=None):
    """Hunter's MM algorithm for Plackett-Luce on strict orders.

    ``orders[b]`` lists system indices best first. Returns log-worths
    normalized so the worths sum to one.
    """
    B, K = orders.shape
    wins = np.bincount(orders[:, :-1].ravel(), minlength=L).astype(float)
    pi = np.full(L, 1.0 / L)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = pi[orders]
        suffix = np.cumsum(w[:, ::-1], axis=1)[:, ::-1]
        inv = 1.0 / suffix[:, :-1]
        # position t takes part in every stage j <= t
        cum = np.cumsum(inv, axis=1)
        share = np.concatenate([cum, cum[:, -1:]], axis=1)
        denom = np.bincount(orders.ravel(), weights=share.ravel(), minlength=L)
        new = np.where(denom > 0, wins / np.where(denom > 0, denom, 1.0), pi)
        new = np.maximum(new, 1e-300)
        new /= new.sum()
        delta = np.max(np.abs(np.log(new) - np.log(pi)))
        pi = new
        if trace is not None:
            trace.append(pl_loglik(np.log(pi), orders))
        if delta < tol:
            converged = True
            break
    return np.log(pi), it, converged


def _check_hypergraph(X: np.ndarray, L: int) -> None:
    adj = np.zeros((L, L), dtype=bool)
    for row in np.unique(X, axis=0):
        hi = row > row.min()
        # every system above the bottom group beats every bottom system
        adj |= np.outer(hi, ~hi)
    comps = connected_components(adj)
    if len(comps) > 1:
        raise DisconnectedComparisonError(comps)


def pl_breslow_mm(counts, chosen, remaining, max_iter=1000, tol=1e-10):
    """MM for Plackett-Luce with Breslow ties.

    The stage ``(chosen G, remaining S)`` contributes
    ``sum_{i in G} log pi_i - |G| log sum_{j in S} pi_j``.
    """
    L = chosen.shape[1]
    wins = counts @ chosen
    size = chosen.sum(axis=1)
    pi = np.full(L, 1.0 / L)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        D = remaining @ pi
        denom = (counts * size / D) @ remaining
        new = np.where(denom > 0, wins / np.where(denom > 0, denom, 1.0), pi)
        new = np.maximum(new, 1e-300)
        new /= new.sum()
        delta = np.max(np.abs(np.log(new) - np.log(pi)))
        pi = new
        if delta < tol:
            converged = True
            break
    return np.log(pi), it, converged


# -- Davidson-Luce ------------------------------------------------------------


def _elementary_symmetric(values: np.ndarray, mask: np.ndarray, k: int) -> np.ndarray:
    """``e_k`` of ``values`` restricted to ``mask`` rows, computed by recursion."""
    U = mask.shape[0]
    E = np.zeros((U, k + 1))
    E[:, 0] = 1.0
    for i in range(mask.shape[1]):
        xi = np.where(mask[:, i], values[i], 0.0)
        E[:, 1:] = E[:, 1:] + xi[:, None] * E[:, :-1]
    return E[:, k]


def _dl_structure(X: np.ndarray):
    """Unique ballot patterns and their stage structure."""
    patterns = Counter(map(tuple, X.tolist()))
    stages = []  # (count, chosen mask, remaining mask)
    for row, count in patterns.items():
        row = np.asarray(row)
        remaining = np.ones(row.size, dtype=bool)
        for v in np.unique(row)[::-1]:
            chosen = row == v
            if chosen.sum() == remaining.sum():
                break
            stages.append((count, chosen.copy(), remaining.copy()))
            remaining &= ~chosen
    counts = np.array([s[0] for s in stages], dtype=float)
    chosen = np.array([s[1] for s in stages])
    remaining = np.array([s[2] for s in stages])
    return counts, chosen, remaining


def davidson_luce_loglik(params, counts, chosen, remaining, D):
    L = chosen.shape[1]
    lam = params[:L]
    log_delta = np.concatenate([[0.0], params[L:]])
    sizes = chosen.sum(axis=1)
    num = log_delta[sizes - 1] + (chosen @ lam) / sizes
    terms = []
    for k in range(1, D + 1):
        ek = _elementary_symmetric(np.exp(lam / k), remaining, k)
        with np.errstate(divide="ignore"):
            terms.append(log_delta[k - 1] + np.log(ek))
    den = logsumexp(np.stack(terms, axis=1), axis=1)
    return float(np.sum(counts * (num - den)))


def _davidson_luce_fit(X: np.ndarray, max_iter: int, tol: float):
    counts, chosen, remaining = _dl_structure(X)
    L = X.shape[1]
    D = int(chosen.sum(axis=1).max())

    def nll(p):
        return -davidson_luce_loglik(p, counts, chosen, remaining, D)

    res = optimize.minimize(
        nll,
        np.zeros(L + D - 1),
        method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol},
    )
    lam = res.x[:L]
    delta = np.exp(np.concatenate([[0.0], res.x[L:]]))
    return lam, {"delta": delta}, int(res.nit), bool(res.success)


# -- public entry point -------------------------------------------------------


def listwise_fit(
    R,
    model: str = "plackett_luce",
    max_iter: int = 1000,
    tol: float = 1e-9,
    rng_seed: int = 0,
    ties: str = "random",
    tie_draws: int = 4,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Fit a listwise choice model; scores are log-worths (worths sum to one).

    Args:
        R: Response tensor ``(L, M, N)``.
        model: ``plackett_luce``, ``davidson_luce`` or ``bradley_terry_luce``.
        rng_seed: Seed for Plackett-Luce tie-breaking.
        ties: Plackett-Luce tie handling, ``random`` or ``breslow``.
        tie_draws: Shuffled strict orders per ballot when ``ties="random"``.
    """
    if model not in LISTWISE_MODELS:
        raise ValueError(f"unknown listwise model {model!r}")
    if ties not in ("random", "breslow"):
        raise ValueError(f"unknown tie handling {ties!r}")
    if tie_draws < 1:
        raise ValueError("tie_draws must be >= 1")
    R = as_tensor(R)
    L = R.L
    X = _informative(ballot_matrix(R))
    if X.shape[0] == 0:
        return make_result(
            model,
            np.full(L, -np.log(L)),
            exact=False,
            diagnostics={"ballots": 0, "converged": True, "iterations": 0},
            tie_tolerance=tie_tolerance,
        )
    _check_hypergraph(X, L)
    extra: dict = {"ballots": int(X.shape[0])}
    if model == "plackett_luce":
        if ties == "breslow":
            lam, it, ok = pl_breslow_mm(*_dl_structure(X), max_iter, tol)
        else:
            rng = np.random.default_rng(rng_seed)
            orders = strict_orders(np.tile(X, (tie_draws, 1)), rng)
            lam, it, ok = pl_mm(orders, L, max_iter, tol)
            extra.update(seed=rng_seed, tie_draws=tie_draws)
        extra["ties"] = ties
    elif model == "bradley_terry_luce":
        lam, it, ok = bt_mm(comparison_summary(R).wins, max_iter, tol)
    else:
        lam, dl, it, ok = _davidson_luce_fit(X, max_iter, tol)
        extra.update(dl)
    if not ok:
        warnings.warn(
            f"{model} did not converge in {max_iter} iterations",
            RuntimeWarning,
            stacklevel=2,
        )
    lam = lam - np.log(np.sum(np.exp(lam - lam.max()))) - lam.max()
    return make_result(
        model,
        lam,
        exact=False,
        diagnostics={**extra, "iterations": it, "converged": ok, "worths": np.exp(lam)},
        tie_tolerance=tie_tolerance,
    )

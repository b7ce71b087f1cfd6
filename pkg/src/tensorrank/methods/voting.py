"""
Voting rules over per-(task, trial) ballots.

Every (task, trial) cell is a voter whose ballot is the weak ordering of
systems by outcome. Pairwise tallies come from ``pref[a, b]``, the number of
ballots that put ``a`` strictly above ``b``; equal outcomes count for
neither side.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..result import MethodResult, make_result
from ..tensor import ComparisonSummary, as_tensor, comparison_summary

KEMENY_MAX_L = 8
VOTING_RULES = (
    "borda",
    "copeland",
    "schulze",
    "ranked_pairs",
    "kemeny_young",
    "nanson",
    "baldwin",
)


class CapabilityError(RuntimeError):
    """A method refuses an input it cannot handle (e.g. Kemeny-Young beyond L = 8)."""


def preference_matrix(R) -> np.ndarray:
    return comparison_summary(R).wins


def _summary(R) -> ComparisonSummary:
    return R if isinstance(R, ComparisonSummary) else comparison_summary(R)


def borda_points(summary: ComparisonSummary, keep=None) -> np.ndarray:
    """Borda totals, optionally restricted to the systems flagged in ``keep``.

    A system earns one point per rival it beats on a ballot and half a
    point per rival it ties with, which equals ``L - averaged position``.
    """
    L = summary.L
    keep = np.ones(L, dtype=bool) if keep is None else np.asarray(keep, dtype=bool)
    half = summary.wins + 0.5 * summary.ties
    return (half * keep[None, :]).sum(axis=1)


def ballot_borda(data: np.ndarray) -> np.ndarray:
    """Borda totals straight from the ballots, without pairwise counts.

    On every ballot a system scores the rivals strictly below it plus half
    the rivals sharing its outcome. Agrees with ``borda_points``.
    """
    L = data.shape[0]
    X = data.reshape(L, -1)
    B = X.shape[1]
    levels = int(X.max()) + 1
    # counts[v, b]: systems with outcome v on ballot b
    flat = (X * B + np.arange(B)).ravel()
    counts = np.bincount(flat, minlength=levels * B).reshape(levels, B)
    below = np.cumsum(counts, axis=0) - counts
    points = below.ravel()[flat] + 0.5 * (counts.ravel()[flat] - 1)
    return points.reshape(L, B).sum(axis=1)


def borda(R) -> np.ndarray:
    if isinstance(R, ComparisonSummary):
        return borda_points(R)
    return ballot_borda(as_tensor(R).data)


def copeland(R) -> np.ndarray:
    pref = _summary(R).wins
    return np.sign(pref - pref.T).sum(axis=1).astype(float)


def schulze(R) -> np.ndarray:
    """Number of rivals each system beats under widest-path strengths."""
    pref = _summary(R).wins.astype(float)
    L = pref.shape[0]
    p = np.where(pref > pref.T, pref, 0.0)
    for k in range(L):
        p = np.maximum(p, np.minimum(p[:, k : k + 1], p[k : k + 1, :]))
    np.fill_diagonal(p, 0.0)
    return (p > p.T).sum(axis=1).astype(float)


def _creates_cycle(adj: np.ndarray, winner: int, loser: int) -> bool:
    # adding winner -> loser closes a cycle iff loser already reaches winner
    stack, seen = [loser], {loser}
    while stack:
        u = stack.pop()
        if u == winner:
            return True
        for v in np.flatnonzero(adj[u]):
            if v not in seen:
                seen.add(int(v))
                stack.append(int(v))
    return False


def _level_scores(adj: np.ndarray) -> np.ndarray:
    """``L - depth`` where depth is the longest path from a source of the DAG."""
    L = adj.shape[0]
    depth = np.zeros(L, dtype=int)
    indeg = adj.sum(axis=0)
    frontier = list(np.flatnonzero(indeg == 0))
    indeg = indeg.copy()
    while frontier:
        u = frontier.pop()
        for v in np.flatnonzero(adj[u]):
            depth[v] = max(depth[v], depth[u] + 1)
            indeg[v] -= 1
            if indeg[v] == 0:
                frontier.append(int(v))
    return (L - depth).astype(float)


def ranked_pairs(R) -> np.ndarray:
    """Tideman's ranked pairs with index-based margin tie-breaking."""
    pref = _summary(R).wins
    L = pref.shape[0]
    majorities = [
        (int(pref[a, b] - pref[b, a]), a, b)
        for a in range(L)
        for b in range(L)
        if pref[a, b] > pref[b, a]
    ]
    majorities.sort(key=lambda t: (-t[0], t[1], t[2]))
    adj = np.zeros((L, L), dtype=bool)
    for _, a, b in majorities:
        if not _creates_cycle(adj, a, b):
            adj[a, b] = True
    return _level_scores(adj)


def kemeny_order(pref: np.ndarray) -> tuple[tuple[int, ...], float]:
    """Exhaustive Kemeny-Young search.

    Minimizes pairwise disagreements over all ``L!`` orders; among optimal
    orders the lexicographically smallest (as an index tuple) wins, which is
    the first optimum in ``itertools.permutations`` order.
    """
    pref = np.asarray(pref, dtype=float)
    L = pref.shape[0]
    if L > KEMENY_MAX_L:
        raise CapabilityError(
            f"kemeny_young is limited to L <= {KEMENY_MAX_L} systems (got L={L})"
        )
    perms = np.array(list(itertools.permutations(range(L))), dtype=np.int64)
    cost = np.zeros(perms.shape[0])
    for i, j in itertools.combinations(range(L), 2):
        # perms[:, i] is placed above perms[:, j]
        cost += pref[perms[:, j], perms[:, i]]
    best = int(np.argmin(cost))
    return tuple(perms[best].tolist()), float(cost[best])


def kemeny_young(R) -> np.ndarray:
    order, _ = kemeny_order(_summary(R).wins)
    L = len(order)
    scores = np.empty(L)
    scores[list(order)] = L - np.arange(L)
    return scores


def _elimination(summary: ComparisonSummary, rule: str) -> np.ndarray:
    """Iterated Borda elimination; score is the round a system drops out.

    Systems dropped in the same round are ordered by their Borda points in
    that round (the fractional part of the score), so Nanson, which can drop
    several at once, still respects unanimous ballots.
    """
    L = summary.L
    alive = np.ones(L, dtype=bool)
    scores = np.zeros(L)
    cap = float(summary.totals.sum())
    rnd = 0
    while alive.sum() > 1:
        rnd += 1
        pts = borda_points(summary, alive)
        live = pts[alive]
        if np.all(live == live[0]):
            break
        if rule == "nanson":
            out = alive & (pts < live.mean())
        else:
            out = alive & (pts == live.min())
        # points over alive rivals stay below the number of ballots times L
        scores[out] = rnd + pts[out] / (cap + 1.0)
        alive &= ~out
    scores[alive] = rnd + 1
    return scores


def nanson(R) -> np.ndarray:
    return _elimination(_summary(R), "nanson")


def baldwin(R) -> np.ndarray:
    return _elimination(_summary(R), "baldwin")


_RULES = {
    "borda": borda,
    "copeland": copeland,
    "schulze": schulze,
    "ranked_pairs": ranked_pairs,
    "kemeny_young": kemeny_young,
    "nanson": nanson,
    "baldwin": baldwin,
}


def vote(R, rule: str = "borda", tie_tolerance: float | None = None) -> MethodResult:
    """Apply a voting rule to the ballots of ``R`` (a tensor or a ComparisonSummary).

    Raises:
        CapabilityError: ``kemeny_young`` with more than 8 systems.
    """
    if rule not in _RULES:
        raise ValueError(f"unknown voting rule {rule!r}")
    if rule == "borda" and not isinstance(R, ComparisonSummary):
        R = as_tensor(R)
        if R.L < 2:
            raise ValueError(f"need at least two systems, got L={R.L}")
        return make_result(
            rule, ballot_borda(R.data), exact=True, tie_tolerance=tie_tolerance
        )
    summary = R if isinstance(R, ComparisonSummary) else comparison_summary(R)
    if rule == "kemeny_young" and summary.L > KEMENY_MAX_L:
        raise CapabilityError(
            f"kemeny_young is limited to L <= {KEMENY_MAX_L} systems (got L={summary.L})"
        )
    return make_result(
        rule, _RULES[rule](summary), exact=True, tie_tolerance=tie_tolerance
    )


# -- majority judgment ---------------------------------------------------------


def majority_value(grades) -> list[int]:
    """Sequence of lower medians obtained by repeatedly removing the median grade."""
    g = sorted(int(v) for v in np.asarray(grades).ravel())
    t = len(g)
    mid = (t - 1) // 2
    left = g[:mid]  # top of stack = element just below the median
    right = g[mid:][::-1]  # top of stack = current median
    out = []
    while right:
        out.append(right.pop())
        t -= 1
        if t and len(left) > (t - 1) // 2:
            right.append(left.pop())
    return out


def majority_judgment(R, tie_tolerance: float | None = None) -> MethodResult:
    """Balinski-Laraki majority judgment on each system's pooled grades.

    Systems are ordered lexicographically by their majority-value sequences;
    the score of a system is the number of systems it strictly beats in that
    order, so equal grade profiles tie.
    """
    R = as_tensor(R)
    values = [tuple(majority_value(R.data[l])) for l in range(R.L)]
    scores = np.array(
        [sum(other < mine for other in values) for mine in values], dtype=float
    )
    return make_result(
        "majority_judgment",
        scores,
        exact=True,
        diagnostics={"medians": [v[0] for v in values]},
        tie_tolerance=tie_tolerance,
    )

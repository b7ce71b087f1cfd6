"""
Tie-aware rank assignment and rank-agreement metrics.

Scores are "higher is better"; rank 1 is best. Scores whose sorted
neighbours differ by at most ``tie_tolerance`` are chained into one tie
group, so a tolerance of 0 only ties exactly equal values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

RankScheme = Literal["competition", "dense", "ordinal", "fractional"]
SCHEMES: tuple[str, ...] = ("competition", "dense", "ordinal", "fractional")

#: Relative tolerance applied to scores that come out of an optimizer.
OPTIMIZER_RTOL = 1e-9


@dataclass(frozen=True)
class RankViews:
    competition: np.ndarray
    dense: np.ndarray
    ordinal: np.ndarray
    fractional: np.ndarray

    def __getitem__(self, scheme: str) -> np.ndarray:
        if scheme not in SCHEMES:
            raise KeyError(f"unknown rank scheme {scheme!r}")
        return getattr(self, scheme)

    def as_dict(self) -> dict[str, list]:
        return {
            "competition": self.competition.astype(int).tolist(),
            "dense": self.dense.astype(int).tolist(),
            "ordinal": self.ordinal.astype(int).tolist(),
            "fractional": self.fractional.astype(float).tolist(),
        }


def tie_groups(scores, tie_tolerance: float = 0.0) -> list[np.ndarray]:
    """Tie groups ordered best first; members listed by ascending index."""
    s = np.asarray(scores, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("empty score vector")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if tie_tolerance < 0:
        raise ValueError("tie_tolerance must be non-negative")
    order = np.argsort(-s, kind="stable")
    gaps = -np.diff(s[order])
    breaks = np.flatnonzero(gaps > tie_tolerance) + 1
    return [np.sort(g) for g in np.split(order, breaks)]


def rank_scores(scores, tie_tolerance: float = 0.0) -> RankViews:
    """Convert a score vector into all four tie-aware rank views.

    Ordinal ranks break ties by ascending system index. Fractional ranks give
    each member of a tie group the mean of the positions the group occupies.

    Examples:
        >>> rank_scores([3.0, 1.0, 3.0, 2.0]).competition.tolist()
        [1, 4, 1, 3]
        >>> rank_scores([3.0, 1.0, 3.0, 2.0]).fractional.tolist()
        [1.5, 4.0, 1.5, 3.0]
    """
    groups = tie_groups(scores, tie_tolerance)
    L = sum(g.size for g in groups)
    competition = np.empty(L, dtype=np.int64)
    dense = np.empty(L, dtype=np.int64)
    ordinal = np.empty(L, dtype=np.int64)
    fractional = np.empty(L, dtype=float)
    start = 0
    for level, g in enumerate(groups, start=1):
        k = g.size
        competition[g] = start + 1
        dense[g] = level
        ordinal[g] = np.arange(start + 1, start + k + 1)
        fractional[g] = start + (k + 1) / 2.0
        start += k
    return RankViews(competition, dense, ordinal, fractional)


def default_tolerance(scores, exact: bool) -> float:
    """0 for exact-count scores, otherwise 1e-9 relative to the score magnitude."""
    if exact:
        return 0.0
    s = np.asarray(scores, dtype=float)
    return OPTIMIZER_RTOL * max(1.0, float(np.max(np.abs(s))))


def normalize_scores(scores) -> np.ndarray:
    """Min-max rescale to [0, 1]; constant vectors map to zeros."""
    s = np.asarray(scores, dtype=float)
    span = s.max() - s.min()
    if span == 0:
        return np.zeros_like(s)
    return (s - s.min()) / span


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def is_total_tie(ranks) -> bool:
    r = np.asarray(ranks, dtype=float)
    return bool(np.all(r == r.flat[0]))


def kendall_tau_b(a, b) -> float | None:
    """Kendall's tau-b between two rank (or score) vectors.

    Returns ``None`` when either input is a total tie, where tau-b is
    undefined.
    """
    a, b = _check_pair(a, b)
    if a.size < 2:
        raise ValueError("kendall_tau_b needs at least two entries")
    if is_total_tie(a) or is_total_tie(b):
        return None
    iu = np.triu_indices(a.size, k=1)
    sa = np.sign(a[:, None] - a[None, :])[iu]
    sb = np.sign(b[:, None] - b[None, :])[iu]
    num = float(np.sum(sa * sb))
    den = np.sqrt(float(np.count_nonzero(sa)) * float(np.count_nonzero(sb)))
    return num / den


def mean_abs_rank_error(a, b) -> float:
    a, b = _check_pair(a, b)
    return float(np.mean(np.abs(a - b)))


def top1_agreement(a, b) -> float:
    """Jaccard overlap of the rank-1 sets of two rank vectors.

    A total tie carries no top-1 information, so it scores 0 against any
    ranking that is not itself a total tie.
    """
    a, b = _check_pair(a, b)
    tie_a, tie_b = is_total_tie(a), is_total_tie(b)
    if a.size > 1 and tie_a != tie_b:
        return 0.0
    top_a = set(np.flatnonzero(a == a.min()).tolist())
    top_b = set(np.flatnonzero(b == b.min()).tolist())
    return len(top_a & top_b) / len(top_a | top_b)

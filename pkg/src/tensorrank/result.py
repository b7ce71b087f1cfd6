from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ranking import RankViews, default_tolerance, rank_scores


@dataclass(frozen=True)
class MethodResult:
    """Scores, their rank views, and method-specific diagnostics."""

    method: str
    scores: np.ndarray
    ranks: RankViews
    tie_tolerance: float
    diagnostics: dict = field(default_factory=dict)

    def ranking(self, scheme: str = "competition") -> np.ndarray:
        return self.ranks[scheme]

    def rerank(self, tie_tolerance: float) -> RankViews:
        return rank_scores(self.scores, tie_tolerance)


def make_result(
    method: str,
    scores,
    *,
    exact: bool,
    diagnostics: dict | None = None,
    tie_tolerance: float | None = None,
) -> MethodResult:
    s = np.asarray(scores, dtype=float).copy()
    tol = default_tolerance(s, exact) if tie_tolerance is None else float(tie_tolerance)
    return MethodResult(method, s, rank_scores(s, tol), tol, diagnostics or {})

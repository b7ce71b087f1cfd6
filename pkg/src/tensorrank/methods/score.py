"""
Evaluation-based and pointwise rankers.

These methods score each system from its own outcomes: a rubric-weighted
mean, a Dirichlet-posterior mean, a Pass@k-style estimator, or a
difficulty-weighted solve rate.

Pass@k variants binarize graded outcomes: a trial succeeds only when it
lands in the top category ``C``. For a task with ``c`` successes among
``N`` trials, let ``X`` be the number of successes in ``k`` trials drawn
without replacement, ``X ~ Hypergeometric(N, c, k)``. Then

- ``pass_at_k   = P(X >= 1)``
- ``pass_hat_k  = P(X == k)``
- ``g_pass_at_k_tau = P(X >= ceil(tau * k))``
- ``mg_pass_at_k = mean_{i = ceil(k/2)+1}^{k} P(X >= i)``

``mg_pass_at_k`` averages the generalized estimator over thresholds above
one half; for even ``k`` this is the usual ``(2 / k) * sum`` form. For
``k = 1`` that range is empty and every system scores 0.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import hypergeom

from ..result import MethodResult, make_result
from ..tensor import (
    OutcomeMatrix,
    ResponseTensor,
    Rubric,
    as_tensor,
    resolve_rubric,
)

PASS_VARIANTS = ("pass_at_k", "pass_hat_k", "g_pass_at_k_tau", "mg_pass_at_k")


def avg(R, w=None, tie_tolerance: float | None = None) -> MethodResult:
    """Mean rubric credit over every task and trial."""
    R = as_tensor(R)
    rubric = resolve_rubric(w, R.C)
    # from category counts, so equal counts give bit-identical scores
    counts = np.stack([np.bincount(R.data[l].ravel(), minlength=R.C + 1) for l in range(R.L)])
    scores = counts @ rubric.weights / (R.M * R.N)
    return make_result("avg", scores, exact=True, tie_tolerance=tie_tolerance)


def bayes_evaluate(E, w=None, prior_strength: float = 1.0) -> tuple[float, float]:
    """Posterior mean and std of expected rubric credit for one system.

    Category counts pooled over all tasks and trials update a symmetric
    Dirichlet(``prior_strength``) prior on the category probabilities.

    Args:
        E: Outcome matrix ``(M, N)`` or a single-system tensor ``(1, M, N)``.
        w: Rubric weights, one per category. Defaults to the identity rubric.
        prior_strength: Dirichlet concentration per category.

    Returns:
        ``(mu, sigma)`` of ``sum_c w_c p_c`` under the posterior.
    """
    if prior_strength <= 0:
        raise ValueError("prior_strength must be positive")
    if isinstance(E, OutcomeMatrix):
        data, C = E.data, E.C
    else:
        if w is not None and not isinstance(E, ResponseTensor):
            C = len(w.weights if isinstance(w, Rubric) else w) - 1
        else:
            C = None
        R = as_tensor(E, C=C, mode="single_system")
        if R.L != 1:
            raise ValueError("bayes_evaluate takes a single system's outcomes")
        data, C = R.data[0], R.C
    rubric = resolve_rubric(w, C)
    counts = np.bincount(np.asarray(data).ravel(), minlength=rubric.C + 1)
    return _dirichlet_functional(counts, rubric.weights, prior_strength)


def _dirichlet_functional(counts, weights, alpha) -> tuple[float, float]:
    a = np.asarray(counts, dtype=float) + alpha
    total = a.sum()
    p = a / total
    mu = float(weights @ p)
    var = float((weights**2) @ p - mu**2) / (total + 1.0)
    return mu, math.sqrt(max(var, 0.0))


def bayes(
    R, w=None, prior_strength: float = 1.0, tie_tolerance: float | None = None
) -> MethodResult:
    """Rank by the Dirichlet posterior mean of rubric credit (see ``bayes_evaluate``)."""
    if prior_strength <= 0:
        raise ValueError("prior_strength must be positive")
    R = as_tensor(R)
    rubric = resolve_rubric(w, R.C)
    mus = np.empty(R.L)
    sigmas = np.empty(R.L)
    for l in range(R.L):
        counts = np.bincount(R.data[l].ravel(), minlength=R.C + 1)
        mus[l], sigmas[l] = _dirichlet_functional(counts, rubric.weights, prior_strength)
    return make_result(
        "bayes",
        mus,
        exact=True,
        diagnostics={"sigma": sigmas, "prior_strength": prior_strength},
        tie_tolerance=tie_tolerance,
    )


def _pass_scores(c: np.ndarray, N: int, k: int, variant: str, tau: float) -> np.ndarray:
    """Per-task Pass@k-family estimate given success counts ``c``."""
    c = np.asarray(c, dtype=np.int64)
    if variant == "pass_at_k":
        # C(N-c, k) / C(N, k) as a running product avoids huge binomials
        i = np.arange(k)
        ratio = np.prod(np.clip(N - c[..., None] - i, 0, None) / (N - i), axis=-1)
        return 1.0 - ratio
    if variant == "pass_hat_k":
        i = np.arange(k)
        return np.prod(np.clip(c[..., None] - i, 0, None) / (N - i), axis=-1)
    if variant == "g_pass_at_k_tau":
        j = math.ceil(tau * k - 1e-12)
        return hypergeom.sf(j - 1, N, c, k)
    if variant == "mg_pass_at_k":
        # mean G-Pass over the strict-majority thresholds ceil(k/2)+1 .. k;
        # k = 1 has no such threshold and scores 0
        lo = math.ceil(k / 2) + 1
        if lo > k:
            return np.zeros(c.shape)
        thresholds = np.arange(lo, k + 1)
        tails = hypergeom.sf(thresholds[:, None] - 1, N, c.ravel()[None, :], k)
        return tails.mean(axis=0).reshape(c.shape)
    raise ValueError(f"unknown pass variant {variant!r}")


def pass_family(
    R,
    variant: str = "pass_at_k",
    k: int = 1,
    tau: float = 0.5,
    tie_tolerance: float | None = None,
    mode: str = "single_trial",
) -> MethodResult:
    """Pass@k-family score averaged over tasks.

    ``mode`` only matters for 2-D input: ``"single_system"`` reads it as one
    system's ``(M, N)`` outcomes.
    """
    if variant not in PASS_VARIANTS:
        raise ValueError(f"unknown pass variant {variant!r}")
    R = as_tensor(R, mode=mode)
    k = int(k)
    if not 1 <= k <= R.N:
        raise ValueError(f"k must be in [1, N={R.N}], got {k}")
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    c = R.binarized().sum(axis=2)
    per_task = _pass_scores(c, R.N, k, variant, tau)
    return make_result(
        variant,
        per_task.mean(axis=1),
        exact=True,
        diagnostics={"k": k, "tau": tau},
        tie_tolerance=tie_tolerance,
    )


def pass_at_k(R, k: int = 1, **kw) -> MethodResult:
    return pass_family(R, "pass_at_k", k=k, **kw)


def pass_hat_k(R, k: int = 1, **kw) -> MethodResult:
    return pass_family(R, "pass_hat_k", k=k, **kw)


def g_pass_at_k_tau(R, k: int = 1, tau: float = 0.5, **kw) -> MethodResult:
    return pass_family(R, "g_pass_at_k_tau", k=k, tau=tau, **kw)


def mg_pass_at_k(R, k: int = 1, **kw) -> MethodResult:
    return pass_family(R, "mg_pass_at_k", k=k, **kw)


def inverse_difficulty(R, tie_tolerance: float | None = None) -> MethodResult:
    """Solve rate with tasks weighted by how rarely they are solved.

    Task weight is ``1 - overall solve rate``, normalized to sum to one.
    Tasks every system always solves get zero weight; if that holds for all
    tasks the weights fall back to uniform.
    """
    R = as_tensor(R)
    solved = R.binarized().mean(axis=2)
    difficulty = 1.0 - solved.mean(axis=0)
    total = difficulty.sum()
    if total > 0:
        weights = difficulty / total
    else:
        weights = np.full(R.M, 1.0 / R.M)
    return make_result(
        "inverse_difficulty",
        solved @ weights,
        exact=False,
        diagnostics={"task_weights": weights},
        tie_tolerance=tie_tolerance,
    )

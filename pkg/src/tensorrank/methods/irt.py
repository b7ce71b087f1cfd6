"""
Item-response-theory rankers for binary outcomes.

Systems play the role of examinees and tasks the role of items. The
probability that system ``l`` solves task ``m`` on any trial is

    P = c_m + (1 - c_m) * sigmoid(a_m * theta_l - d_m)

with ``a = 1, c = 0`` for the Rasch model, ``c = 0`` for 2PL. Since trials
are i.i.d. given the parameters, every estimator works with the success
counts ``s[l, m]`` out of ``N``.

Estimators:
    rasch_jml   joint maximum likelihood by bounded L-BFGS, with abilities
                and difficulties boxed to +/- 6 logits so perfect and zero
                scores stay finite.
    rasch_mml   Bock-Aitkin EM with Gauss-Hermite quadrature over a standard
                normal ability distribution; abilities are EAP means.
    rasch_2pl / rasch_3pl
                the same EM with per-task discrimination (and guessing,
                bounded to [0, 0.35]) fitted by Fisher scoring.
    dynamic     per-trial abilities tied together by a random-walk penalty.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import optimize
from scipy.special import expit, log_expit, logsumexp

from ..result import MethodResult, make_result
from ..tensor import as_tensor

CLAMP = 6.0
GUESS_MAX = 0.35
IRT_MODELS = ("rasch_jml", "rasch_mml", "rasch_2pl", "rasch_3pl", "dynamic")


def _success_counts(R) -> tuple[np.ndarray, int]:
    R = as_tensor(R)
    if R.C != 1:
        raise ValueError("IRT models need binary outcomes (C = 1)")
    if R.L < 2 or R.M < 2:
        raise ValueError("IRT models need at least two systems and two tasks")
    return R.data.sum(axis=2).astype(float), R.N


# -- joint maximum likelihood ---------------------------------------------


def jml_loglik(theta, b, s, N) -> float:
    """Rasch joint log-likelihood of success counts ``s`` out of ``N``."""
    eta = np.asarray(theta)[:, None] - np.asarray(b)[None, :]
    return float(np.sum(s * log_expit(eta) + (N - s) * log_expit(-eta)))


def jml_gradient(theta, b, s, N) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of ``jml_loglik`` with respect to (theta, b)."""
    eta = np.asarray(theta)[:, None] - np.asarray(b)[None, :]
    resid = s - N * expit(eta)
    return resid.sum(axis=1), -resid.sum(axis=0)


def rasch_jml(s, N, max_iter=500, tol=1e-8, trace: list | None = None):
    """Joint maximum likelihood for the Rasch model by bounded L-BFGS.

    Abilities and difficulties live in ``[-6, 6]``. Returns
    ``(theta, b, iterations, converged)``; ``trace`` collects the
    log-likelihood after each iteration.
    """
    L, M = s.shape
    p_sys = s.sum(axis=1) / (M * N)
    p_task = s.sum(axis=0) / (L * N)
    theta0 = np.log((p_sys + 0.5 / M) / (1 - p_sys + 0.5 / M))
    b0 = -np.log((p_task + 0.5 / L) / (1 - p_task + 0.5 / L))
    z0 = np.clip(np.concatenate([theta0, b0]), -CLAMP, CLAMP)

    def negobj(z):
        theta, b = z[:L], z[L:]
        g_theta, g_b = jml_gradient(theta, b, s, N)
        return -jml_loglik(theta, b, s, N), -np.concatenate([g_theta, g_b])

    def record(z):
        trace.append(jml_loglik(z[:L], z[L:], s, N))

    res = optimize.minimize(
        negobj,
        z0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(-CLAMP, CLAMP)] * (L + M),
        callback=record if trace is not None else None,
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-15},
    )
    theta, b = res.x[:L], res.x[L:]
    # the likelihood only sees theta - b, so centring b is free
    shift = b.mean()
    return theta - shift, b - shift, int(res.nit), bool(res.success)


# -- marginal maximum likelihood (EM) -------------------------------------


def gauss_hermite_normal(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights for a standard normal density."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    return x, w / w.sum()


def _item_probs(x, a, d, c):
    star = expit(a[:, None] * x[None, :] - d[:, None])
    return c[:, None] + (1 - c[:, None]) * star, star


def _posterior_weights(s, N, x, logw, a, d, c):
    P, _ = _item_probs(x, a, d, c)
    P = np.clip(P, 1e-12, 1 - 1e-12)
    loglik = s @ np.log(P) + (N - s) @ np.log1p(-P)
    joint = loglik + logw[None, :]
    marginal = logsumexp(joint, axis=1)
    return np.exp(joint - marginal[:, None]), float(marginal.sum())


def _mstep(r, n, x, a, d, c, free: tuple[bool, bool, bool], steps: int = 5):
    """Fisher scoring on the expected complete-data log-likelihood per task.

    ``r[m, q]`` expected successes and ``n[q]`` expected attempts at node q.
    ``free`` flags which of (a, d, c) are estimated.
    """
    idx = [i for i, f in enumerate(free) if f]
    for _ in range(steps):
        P, star = _item_probs(x, a, d, c)
        P = np.clip(P, 1e-10, 1 - 1e-10)
        dstar = star * (1 - star)
        derivs = [
            (1 - c[:, None]) * dstar * x[None, :],
            -(1 - c[:, None]) * dstar,
            1 - star,
        ]
        J = np.stack([derivs[i] for i in idx], axis=-1)  # (M, Q, k)
        resid = (r - n[None, :] * P) / (P * (1 - P))
        grad = np.einsum("mq,mqk->mk", resid, J)
        fisher = np.einsum("q,mq,mqk,mql->mkl", n, 1 / (P * (1 - P)), J, J)
        fisher += 1e-8 * np.eye(len(idx))
        delta = np.linalg.solve(fisher, grad[..., None])[..., 0]
        delta = np.clip(delta, -1.0, 1.0)
        params = [a, d, c]
        for j, i in enumerate(idx):
            params[i] = params[i] + delta[:, j]
        a = np.clip(params[0], 0.05, 5.0)
        d = np.clip(params[1], -4 * CLAMP, 4 * CLAMP)
        c = np.clip(params[2], 0.0, GUESS_MAX)
    return a, d, c


def irt_mml(
    s,
    N,
    model: str = "rasch_mml",
    quadrature_nodes: int = 41,
    max_iter: int = 500,
    tol: float = 1e-6,
):
    L, M = s.shape
    x, w = gauss_hermite_normal(quadrature_nodes)
    logw = np.log(w)
    p_task = (s.sum(axis=0) + 0.5) / (L * N + 1.0)
    a = np.ones(M)
    d = -np.log(p_task / (1 - p_task))
    c = np.zeros(M) if model != "rasch_3pl" else np.full(M, 0.1)
    free = {
        "rasch_mml": (False, True, False),
        "rasch_2pl": (True, True, False),
        "rasch_3pl": (True, True, True),
    }[model]
    prev = -np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        post, ll = _posterior_weights(s, N, x, logw, a, d, c)
        r = s.T @ post  # (M, Q) expected successes
        n = N * post.sum(axis=0)  # (Q,) expected attempts per task
        a, d, c = _mstep(r, n, x, a, d, c, free)
        if abs(ll - prev) < tol * (1 + abs(ll)):
            converged = True
            break
        prev = ll
    post, ll = _posterior_weights(s, N, x, logw, a, d, c)
    theta = post @ x
    return theta, {"a": a, "b": d / a, "c": c, "loglik": ll}, it, converged


# -- dynamic ----------------------------------------------------------------


def dynamic_irt(data: np.ndarray, kappa: float = 1.0, max_iter: int = 500, tol=1e-8):
    """Penalized JML with per-trial abilities ``theta[l, n]`` and static ``b``.

    Maximizes the Rasch log-likelihood of every (system, task, trial) outcome
    minus ``kappa * sum_n (theta[l, n] - theta[l, n-1])^2``.
    """
    L, M, N = data.shape
    y = data.astype(float)

    def negobj(z):
        theta = z[: L * N].reshape(L, N)
        b = z[L * N :]
        eta = theta[:, None, :] - b[None, :, None]
        ll = np.sum(y * log_expit(eta) + (1 - y) * log_expit(-eta))
        drift = np.diff(theta, axis=1)
        pen = kappa * np.sum(drift**2)
        resid = y - expit(eta)
        g_theta = resid.sum(axis=1)
        g_theta[:, 1:] -= 2 * kappa * drift
        g_theta[:, :-1] += 2 * kappa * drift
        g_b = -resid.sum(axis=(0, 2))
        return -(ll - pen), -np.concatenate([g_theta.ravel(), g_b])

    res = optimize.minimize(
        negobj,
        np.zeros(L * N + M),
        jac=True,
        method="L-BFGS-B",
        bounds=[(-CLAMP, CLAMP)] * (L * N + M),
        options={"maxiter": max_iter, "gtol": tol},
    )
    theta = res.x[: L * N].reshape(L, N)
    b = res.x[L * N :]
    shift = b.mean()
    return theta - shift, b - shift, int(res.nit), bool(res.success)


# -- public entry point -----------------------------------------------------


def irt_fit(
    R,
    model: str = "rasch_jml",
    quadrature_nodes: int = 41,
    max_iter: int = 500,
    tol: float | None = None,
    kappa: float = 1.0,
    tie_tolerance: float | None = None,
) -> MethodResult:
    """Fit an IRT model and rank systems by estimated ability.

    Args:
        R: Binary response tensor ``(L, M, N)``.
        model: One of ``rasch_jml``, ``rasch_mml``, ``rasch_2pl``,
            ``rasch_3pl``, ``dynamic``.
        quadrature_nodes: Gauss-Hermite nodes for the EM-based models.
        max_iter: Iteration cap; hitting it emits a RuntimeWarning.
        tol: Convergence tolerance (model-specific default when None).
        kappa: Drift penalty for the dynamic model.

    Returns:
        MethodResult with abilities as scores. Diagnostics carry the task
        parameters and convergence information.
    """
    if model not in IRT_MODELS:
        raise ValueError(f"unknown IRT model {model!r}")
    R = as_tensor(R)
    s, N = _success_counts(R)
    L, M = s.shape
    degenerate = np.flatnonzero((s.sum(axis=0) == 0) | (s.sum(axis=0) == L * N))
    if degenerate.size:
        warnings.warn(
            f"{degenerate.size} task(s) are solved by all or by no system; "
            f"their difficulty is clamped to +/-{CLAMP:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    if model == "rasch_jml":
        theta, b, it, ok = rasch_jml(s, N, max_iter, 1e-8 if tol is None else tol)
        diag = {"b": b}
    elif model == "dynamic":
        path, b, it, ok = dynamic_irt(
            R.data, kappa, max_iter, 1e-8 if tol is None else tol
        )
        theta = path[:, -1]
        diag = {"b": b, "theta_path": path, "kappa": kappa}
    else:
        theta, diag, it, ok = irt_mml(
            s, N, model, quadrature_nodes, max_iter, 1e-6 if tol is None else tol
        )
        diag["quadrature_nodes"] = quadrature_nodes
    if not ok:
        warnings.warn(
            f"{model} stopped at the iteration cap ({max_iter})",
            RuntimeWarning,
            stacklevel=2,
        )
    name = {"rasch_jml": "rasch", "dynamic": "dynamic_irt"}.get(model, model)
    return make_result(
        name,
        theta,
        exact=False,
        diagnostics={**diag, "iterations": it, "converged": ok},
        tie_tolerance=tie_tolerance,
    )

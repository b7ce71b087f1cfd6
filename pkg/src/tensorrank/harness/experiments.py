"""
Rank-recovery, stability and runtime experiments.

Every experiment returns an :class:`ExperimentReport` whose records are the
individual cells (method x budget x seed, or method x grid point x
replicate). All rank metrics use fractional ranks; a Kendall tau-b that is
undefined (one side a total tie) is kept as ``None``.
"""

from __future__ import annotations

import gc
import time
import warnings
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Sequence

import numpy as np

from .. import __version__
from ..methods import PASS_METHODS, get_method, run_method
from ..methods.voting import KEMENY_MAX_L
from ..ranking import kendall_tau_b, mean_abs_rank_error, top1_agreement
from ..result import MethodResult
from .generator import GeneratorConfig, generate

RECOVERY_METHODS = (
    "avg",
    "bayes",
    "bradley_terry_davidson",
    "rasch",
    "pagerank",
    "plackett_luce",
    "elo",
)
RECOVERY_BUDGETS = (1, 2, 4, 8, 16, 32)

STABILITY_METHODS = (
    "avg",
    "bayes",
    "pass_at_k",
    "g_pass_at_k_tau",
    "mg_pass_at_k",
    "rasch",
    "pagerank",
    "elo",
)
STABILITY_BUDGETS = (1, 2, 4, 8, 16, 32)
STABILITY_CONFIG = GeneratorConfig(N_max=64, seeds=tuple(range(10)))

RUNTIME_METHODS = (
    "avg",
    "bayes",
    "borda",
    "pagerank",
    "alpharank",
    "plackett_luce",
    "elo",
    "bradley_terry",
    "kemeny_young",
    "rasch_mml",
)
RUNTIME_GRID = {"L": (4, 8, 16), "M": (100, 500, 1000), "N": (1, 4)}

RANK_SCHEME = "fractional"


@dataclass(frozen=True)
class Record:
    """One experiment cell. Fields that do not apply are ``None``."""

    experiment: str
    method: str
    L: int
    M: int
    N: int
    n: int | None = None
    seed: int | None = None
    tau_b: float | None = None
    mae: float | None = None
    top1: float | None = None
    seconds: float | None = None
    replicate: int | None = None
    status: str = "ok"

    @property
    def budget(self) -> int:
        return self.n if self.n is not None else self.N


FIELDS = tuple(f.name for f in fields(Record))


@dataclass
class ExperimentReport:
    experiment: str
    records: list[Record]
    config: dict
    metadata: dict = field(default_factory=dict)

    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.records))

    def select(self, **match) -> list[Record]:
        return [
            r for r in self.records if all(getattr(r, k) == v for k, v in match.items())
        ]

    def summary(self) -> list[dict]:
        """Means over seeds per (method, budget), or median seconds per runtime cell.

        A mean tau-b only averages the defined cells; it is ``None`` when no
        cell is defined.
        """
        if self.experiment == "runtime":
            return _runtime_summary(self.records)
        groups: dict[tuple, list[Record]] = {}
        for r in self.records:
            groups.setdefault((r.method, r.budget), []).append(r)
        out = []
        for (method, budget), recs in groups.items():
            ok = [r for r in recs if r.status == "ok"]
            taus = [r.tau_b for r in ok if r.tau_b is not None]
            out.append(
                {
                    "method": method,
                    "budget": budget,
                    "tau_b": float(np.mean(taus)) if taus else None,
                    "tau_b_defined": len(taus),
                    "mae": _mean(r.mae for r in ok),
                    "top1": _mean(r.top1 for r in ok),
                    "cells": len(recs),
                }
            )
        return out

    def mean(self, method: str, budget: int, metric: str = "tau_b") -> float | None:
        for row in self.summary():
            if row["method"] == method and row["budget"] == budget:
                return row[metric]
        raise KeyError((method, budget))


def _mean(values: Iterable[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def _runtime_summary(records: Sequence[Record]) -> list[dict]:
    groups: dict[tuple, list[Record]] = {}
    for r in records:
        groups.setdefault((r.method, r.L, r.M, r.N), []).append(r)
    out = []
    for (method, L, M, N), recs in groups.items():
        secs = [r.seconds for r in recs if r.seconds is not None]
        out.append(
            {
                "method": method,
                "L": L,
                "M": M,
                "N": N,
                "median_seconds": float(np.median(secs)) if secs else None,
                "status": recs[0].status,
            }
        )
    return out


def _metadata(**extra) -> dict:
    return {
        "version": __version__,
        "rank_scheme": RANK_SCHEME,
        "tau_b_undefined": "--",
        **extra,
    }


def _validate(methods: Sequence[str]) -> list[str]:
    methods = list(methods)
    for m in methods:
        get_method(m)  # raises UnknownMethodError
    return methods


def _run_cell(method: str, R, seed: int, params: dict) -> tuple[MethodResult | None, str]:
    """Run one method; a failure becomes the cell's status instead of an exception.

    Convergence and degenerate-task warnings are expected at tiny budgets
    and are silenced here.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            return run_method(method, R, seed=seed, **params), "ok"
        except Exception as exc:  # one bad cell should not abort the grid
            return None, f"error: {type(exc).__name__}: {exc}"


def _metrics(res: MethodResult, reference: np.ndarray) -> dict:
    pred = res.ranks[RANK_SCHEME]
    tau = kendall_tau_b(pred, reference)
    return {
        "tau_b": None if tau is None else float(tau),
        "mae": float(mean_abs_rank_error(pred, reference)),
        "top1": float(top1_agreement(pred, reference)),
    }


def run_recovery(
    methods: Sequence[str] = RECOVERY_METHODS,
    config: GeneratorConfig | None = None,
    budgets: Sequence[int] = RECOVERY_BUDGETS,
    params: dict[str, dict] | None = None,
) -> ExperimentReport:
    """Rank recovery against the generator's true ability order.

    For every seed one tensor with ``N_max`` trials is drawn; each budget
    ``N`` truncates it to its first ``N`` trials.

    Args:
        methods: Registered method names.
        config: Generator settings (defaults to ``GeneratorConfig()``).
        budgets: Trial counts to evaluate; each must be ``<= N_max``.
        params: Optional per-method keyword overrides.
    """
    config = config or GeneratorConfig()
    methods = _validate(methods)
    budgets = [int(b) for b in budgets]
    if any(b < 1 or b > config.N_max for b in budgets):
        raise ValueError(f"budgets must lie in [1, N_max={config.N_max}]")
    params = params or {}
    records = []
    for seed in config.seeds:
        data = generate(config, seed)
        for N in budgets:
            R = data.tensor.first_trials(N)
            for method in methods:
                res, status = _run_cell(method, R, seed, dict(params.get(method, {})))
                metrics = _metrics(res, data.truth) if res is not None else {}
                records.append(
                    Record("recovery", method, config.L, config.M, N, seed=seed,
                           status=status, **metrics)
                )
    return ExperimentReport(
        "recovery",
        records,
        {"generator": config.to_dict(), "budgets": budgets, "methods": methods},
        _metadata(reference="truth"),
    )


def run_stability(
    methods: Sequence[str] = STABILITY_METHODS,
    config: GeneratorConfig | None = None,
    budgets: Sequence[int] = STABILITY_BUDGETS,
    k: int = 4,
    tau: float = 0.5,
    params: dict[str, dict] | None = None,
) -> ExperimentReport:
    """Agreement of small-budget rankings with the full-data ``bayes`` ranking.

    Pass@k-family methods use ``k' = min(k, n)`` at budget ``n``, so the
    smallest budgets degrade to single-trial estimators.
    """
    config = config or STABILITY_CONFIG
    methods = _validate(methods)
    budgets = [int(b) for b in budgets]
    if any(b > config.N_max for b in budgets):
        raise ValueError(f"budget {max(budgets)} exceeds N_max={config.N_max}")
    if any(b < 1 for b in budgets):
        raise ValueError("budgets must be >= 1")
    params = params or {}
    records = []
    for seed in config.seeds:
        data = generate(config, seed)
        reference = run_method("bayes", data.tensor).ranks[RANK_SCHEME]
        for n in budgets:
            R = data.tensor.first_trials(n)
            for method in methods:
                p = dict(params.get(method, {}))
                if method in PASS_METHODS:
                    p["k"] = min(int(p.get("k", k)), n)
                    if method == "g_pass_at_k_tau":
                        p.setdefault("tau", tau)
                res, status = _run_cell(method, R, seed, p)
                metrics = _metrics(res, reference) if res is not None else {}
                records.append(
                    Record("stability", method, config.L, config.M, config.N_max,
                           n=n, seed=seed, status=status, **metrics)
                )
    return ExperimentReport(
        "stability",
        records,
        {
            "generator": config.to_dict(),
            "budgets": budgets,
            "methods": methods,
            "k": k,
            "tau": tau,
        },
        _metadata(reference="bayes at N_max"),
    )


def run_runtime(
    methods: Sequence[str] = RUNTIME_METHODS,
    Ls: Sequence[int] = RUNTIME_GRID["L"],
    Ms: Sequence[int] = RUNTIME_GRID["M"],
    Ns: Sequence[int] = RUNTIME_GRID["N"],
    replicates: int = 2,
    seed: int = 0,
    params: dict[str, dict] | None = None,
) -> ExperimentReport:
    """Wall-clock time per call after one warm-up, each replicate kept raw.

    The garbage collector is paused during each timed call. Cells run serially. ``kemeny_young`` is skipped (with the reason in
    ``status``) when ``L`` exceeds its limit.
    """
    methods = _validate(methods)
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    params = params or {}
    records = []
    for L in Ls:
        for M in Ms:
            for N in Ns:
                config = GeneratorConfig(L=L, M=M, N_max=N, seeds=(seed,), tie_pair=None)
                R = generate(config, seed).tensor
                for method in methods:
                    records.extend(
                        _time_method(method, R, seed, params.get(method, {}), replicates)
                    )
    return ExperimentReport(
        "runtime",
        records,
        {
            "grid": {"L": list(Ls), "M": list(Ms), "N": list(Ns)},
            "replicates": replicates,
            "seed": seed,
            "methods": methods,
            "generator": GeneratorConfig(tie_pair=None).to_dict() | {"seeds": [seed]},
        },
        _metadata(clock="time.perf_counter", warmup_calls=1, gc="disabled while timing"),
    )


def _time_method(method, R, seed, params, replicates) -> list[Record]:
    L, M, N = R.data.shape
    base = Record("runtime", method, L, M, N, seed=seed)
    if method == "kemeny_young" and L > KEMENY_MAX_L:
        reason = f"skipped: kemeny_young limited to L <= {KEMENY_MAX_L}"
        return [replace(base, replicate=i + 1, status=reason) for i in range(replicates)]
    _, status = _run_cell(method, R, seed, dict(params))  # warm-up
    if status.startswith("error"):
        return [replace(base, replicate=i + 1, status=status) for i in range(replicates)]
    out = []
    gc.collect()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i in range(replicates):
            # as in timeit: no collector pauses inside the timed call
            gc.disable()
            try:
                t0 = time.perf_counter()
                run_method(method, R, seed=seed, **params)
                elapsed = time.perf_counter() - t0
            finally:
                gc.enable()
            out.append(replace(base, replicate=i + 1, seconds=elapsed))
    return out

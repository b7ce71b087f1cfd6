"""Ranking methods and the name -> method registry used by the CLI and harness."""

from __future__ import annotations

from functools import partial
from typing import Callable

from ..result import MethodResult
from ..tensor import ResponseTensor, as_tensor
from .graph import alpharank, hodge_rank, nash_rank, pagerank, rank_centrality, serial_rank
from .irt import irt_fit
from .listwise import listwise_fit
from .pairwise import (
    DisconnectedComparisonError,
    bayesian_mcmc,
    bradley_terry,
    elo,
    glicko,
    match_stream,
    thompson,
    trueskill,
)
from .score import (
    avg,
    bayes,
    bayes_evaluate,
    g_pass_at_k_tau,
    inverse_difficulty,
    mg_pass_at_k,
    pass_at_k,
    pass_family,
    pass_hat_k,
)
from .voting import CapabilityError, majority_judgment, vote

METHODS: dict[str, Callable[..., MethodResult]] = {
    "avg": avg,
    "bayes": bayes,
    "pass_at_k": pass_at_k,
    "pass_hat_k": pass_hat_k,
    "g_pass_at_k_tau": g_pass_at_k_tau,
    "mg_pass_at_k": mg_pass_at_k,
    "inverse_difficulty": inverse_difficulty,
    "elo": elo,
    "glicko": glicko,
    "trueskill": trueskill,
    "bradley_terry": partial(bradley_terry, variant="plain"),
    "bradley_terry_davidson": partial(bradley_terry, variant="davidson"),
    "rao_kupper": partial(bradley_terry, variant="rao_kupper"),
    "thompson": thompson,
    "bayesian_mcmc": bayesian_mcmc,
    "rasch": partial(irt_fit, model="rasch_jml"),
    "rasch_mml": partial(irt_fit, model="rasch_mml"),
    "rasch_2pl": partial(irt_fit, model="rasch_2pl"),
    "rasch_3pl": partial(irt_fit, model="rasch_3pl"),
    "dynamic_irt": partial(irt_fit, model="dynamic"),
    "plackett_luce": partial(listwise_fit, model="plackett_luce"),
    "davidson_luce": partial(listwise_fit, model="davidson_luce"),
    "bradley_terry_luce": partial(listwise_fit, model="bradley_terry_luce"),
    "borda": partial(vote, rule="borda"),
    "copeland": partial(vote, rule="copeland"),
    "schulze": partial(vote, rule="schulze"),
    "ranked_pairs": partial(vote, rule="ranked_pairs"),
    "kemeny_young": partial(vote, rule="kemeny_young"),
    "nanson": partial(vote, rule="nanson"),
    "baldwin": partial(vote, rule="baldwin"),
    "majority_judgment": majority_judgment,
    "pagerank": pagerank,
    "rank_centrality": rank_centrality,
    "alpharank": alpharank,
    "nash": nash_rank,
    "serial_rank": serial_rank,
    "hodge_rank": hodge_rank,
}

#: Methods that take a rubric ``w``.
RUBRIC_METHODS = frozenset({"avg", "bayes"})
#: Methods that accept an ``rng_seed``.
SEEDED_METHODS = frozenset({"thompson", "bayesian_mcmc", "plackett_luce"})
#: Methods that take a Pass@k budget ``k``.
PASS_METHODS = frozenset({"pass_at_k", "pass_hat_k", "g_pass_at_k_tau", "mg_pass_at_k"})


class UnknownMethodError(KeyError):
    pass


def get_method(name: str) -> Callable[..., MethodResult]:
    try:
        return METHODS[name]
    except KeyError:
        raise UnknownMethodError(
            f"unknown method {name!r}; choose from {', '.join(sorted(METHODS))}"
        ) from None


def run_method(
    name: str, R, w=None, seed: int | None = None, **params
) -> MethodResult:
    """Run a registered method by name.

    ``w`` is forwarded only to rubric-aware methods and ``seed`` only to
    seeded ones, so callers can pass both uniformly.
    """
    fn = get_method(name)
    R = R if isinstance(R, ResponseTensor) else as_tensor(R)
    if name in RUBRIC_METHODS and w is not None:
        params["w"] = w
    if name in SEEDED_METHODS and seed is not None:
        params.setdefault("rng_seed", seed)
    return fn(R, **params)


__all__ = [
    "METHODS",
    "RUBRIC_METHODS",
    "SEEDED_METHODS",
    "PASS_METHODS",
    "CapabilityError",
    "DisconnectedComparisonError",
    "UnknownMethodError",
    "get_method",
    "run_method",
    "alpharank",
    "avg",
    "bayes",
    "bayes_evaluate",
    "bayesian_mcmc",
    "bradley_terry",
    "elo",
    "g_pass_at_k_tau",
    "glicko",
    "hodge_rank",
    "inverse_difficulty",
    "irt_fit",
    "listwise_fit",
    "majority_judgment",
    "match_stream",
    "mg_pass_at_k",
    "nash_rank",
    "pagerank",
    "pass_at_k",
    "pass_family",
    "pass_hat_k",
    "rank_centrality",
    "serial_rank",
    "thompson",
    "trueskill",
    "vote",
]

"""tensorrank: rank systems from repeated stochastic evaluations.

The canonical input is an integer response tensor of shape ``(L, M, N)``
(systems x tasks x trials). Every method in :mod:`tensorrank.methods` takes
that tensor and returns a :class:`MethodResult` holding scores and tie-aware
rank views.
"""

from .methods import METHODS, CapabilityError, get_method, run_method
from .priors import Prior, default_prior, log_density
from .ranking import (
    RankViews,
    kendall_tau_b,
    mean_abs_rank_error,
    rank_scores,
    top1_agreement,
)
from .result import MethodResult
from .tensor import (
    Ballot,
    ComparisonGraph,
    ComparisonSummary,
    OutcomeMatrix,
    ResponseTensor,
    Rubric,
    as_tensor,
    ballots,
    comparison_graph,
    comparison_summary,
    promote,
    read_tensor,
    trial_means,
    winner_loser_sets,
    write_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "METHODS",
    "Ballot",
    "CapabilityError",
    "ComparisonGraph",
    "ComparisonSummary",
    "MethodResult",
    "OutcomeMatrix",
    "Prior",
    "RankViews",
    "ResponseTensor",
    "Rubric",
    "as_tensor",
    "ballots",
    "comparison_graph",
    "comparison_summary",
    "default_prior",
    "get_method",
    "kendall_tau_b",
    "log_density",
    "mean_abs_rank_error",
    "promote",
    "rank_scores",
    "read_tensor",
    "run_method",
    "top1_agreement",
    "trial_means",
    "winner_loser_sets",
    "write_tensor",
]

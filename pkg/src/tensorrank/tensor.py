"""
Response tensors and the data views derived from them.

A response tensor ``R`` has shape ``(L, M, N)``: ``L`` systems answer ``M``
tasks over ``N`` repeated trials, each outcome an integer category in
``0..C``. Every ranking method consumes one of the views built here:

- trial means (pointwise methods),
- decisive win / tie counts between system pairs (paired comparison),
- per-(task, trial) ballots, i.e. weak orderings of the systems (voting,
  listwise models),
- a weighted comparison graph (graph and spectral methods).

Indices are 0-based throughout the Python API; only the CSV file format uses
1-based labels.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

PromoteMode = Literal["single_trial", "single_system"]


def _as_int_array(data, ndim: int | tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(data)
    if arr.dtype == bool:
        arr = arr.astype(np.int64)
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.issubdtype(arr.dtype, np.floating) or not np.all(
            np.isfinite(arr)
        ):
            raise ValueError("outcomes must be integers")
        if np.any(arr != np.round(arr)):
            raise ValueError("outcomes must be integers")
        arr = arr.astype(np.int64)
    ndims = (ndim,) if isinstance(ndim, int) else ndim
    if arr.ndim not in ndims:
        raise ValueError(f"expected a {ndims}-D array, got shape {arr.shape}")
    if 0 in arr.shape:
        raise ValueError(f"every axis must be non-empty, got shape {arr.shape}")
    return arr.astype(np.int64, copy=False)


def _check_range(arr: np.ndarray, C: int) -> None:
    if C < 1:
        raise ValueError(f"C must be >= 1, got {C}")
    lo, hi = int(arr.min()), int(arr.max())
    if lo < 0 or hi > C:
        raise ValueError(f"outcomes must lie in [0, {C}], found range [{lo}, {hi}]")


@dataclass(frozen=True)
class ResponseTensor:
    """Integer outcomes indexed by (system, task, trial)."""

    data: np.ndarray
    C: int = 1

    def __post_init__(self):
        arr = _as_int_array(self.data, 3)
        _check_range(arr, int(self.C))
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "C", int(self.C))

    @property
    def L(self) -> int:
        return self.data.shape[0]

    @property
    def M(self) -> int:
        return self.data.shape[1]

    @property
    def N(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def is_binary(self) -> bool:
        return self.C == 1

    def first_trials(self, n: int) -> "ResponseTensor":
        """Keep only the first ``n`` trials."""
        if not 1 <= n <= self.N:
            raise ValueError(f"n must be in [1, {self.N}], got {n}")
        return ResponseTensor(self.data[:, :, :n], self.C)

    def permute_systems(self, order) -> "ResponseTensor":
        return ResponseTensor(self.data[np.asarray(order)], self.C)

    def binarized(self) -> np.ndarray:
        """Success indicator: outcome equals the top category ``C``."""
        return (self.data == self.C).astype(np.int64)


@dataclass(frozen=True)
class OutcomeMatrix:
    """Outcomes of one system, indexed by (task, trial)."""

    data: np.ndarray
    C: int = 1

    def __post_init__(self):
        arr = _as_int_array(self.data, 2)
        _check_range(arr, int(self.C))
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "C", int(self.C))


@dataclass(frozen=True)
class Rubric:
    """Credit assigned to each outcome category ``0..C``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size < 2:
            raise ValueError("a rubric needs at least two categories")
        if not np.all(np.isfinite(w)):
            raise ValueError("rubric weights must be finite")
        if np.any(np.diff(w) < 0):
            warnings.warn(
                "rubric weights are not non-decreasing in the category index",
                stacklevel=3,
            )
        object.__setattr__(self, "weights", w)

    @property
    def C(self) -> int:
        return self.weights.size - 1

    @classmethod
    def identity(cls, C: int) -> "Rubric":
        return cls(np.arange(C + 1, dtype=float))

    @classmethod
    def normalized(cls, C: int) -> "Rubric":
        return cls(np.arange(C + 1, dtype=float) / C)

    def apply(self, outcomes: np.ndarray) -> np.ndarray:
        return self.weights[outcomes]


def as_tensor(
    R, C: int | None = None, mode: PromoteMode = "single_trial"
) -> ResponseTensor:
    """Coerce arrays, outcome matrices and tensors to a ResponseTensor.

    ``C`` defaults to ``max(1, max outcome)`` for raw arrays.
    """
    if isinstance(R, ResponseTensor):
        if C is not None and C != R.C:
            return ResponseTensor(R.data, C)
        return R
    if isinstance(R, OutcomeMatrix):
        return promote(R, mode=mode)
    arr = _as_int_array(R, (2, 3))
    if C is None:
        C = max(1, int(arr.max()))
    if arr.ndim == 3:
        return ResponseTensor(arr, C)
    return promote(OutcomeMatrix(arr, C), mode=mode)


def promote(E, mode: PromoteMode = "single_trial") -> ResponseTensor:
    """Promote a 2-D outcome array to a 3-D response tensor.

    ``mode="single_trial"`` reads the matrix as ``(L, M)`` and appends a
    trial axis; ``mode="single_system"`` reads it as one system's ``(M, N)``
    outcomes. 3-D input passes through unchanged.
    """
    if isinstance(E, ResponseTensor):
        return E
    if isinstance(E, OutcomeMatrix):
        arr, C = E.data, E.C
    else:
        arr = _as_int_array(E, (2, 3))
        C = max(1, int(arr.max()))
        if arr.ndim == 3:
            return ResponseTensor(arr, C)
    if mode == "single_trial":
        return ResponseTensor(arr[:, :, None], C)
    if mode == "single_system":
        return ResponseTensor(arr[None, :, :], C)
    raise ValueError(f"unknown promote mode {mode!r}")


def resolve_rubric(w, C: int) -> Rubric:
    """Default is the identity rubric ``w[c] = c``."""
    if w is None:
        return Rubric.identity(C)
    rubric = w if isinstance(w, Rubric) else Rubric(w)
    if rubric.C != C:
        raise ValueError(
            f"rubric has {rubric.C + 1} weights but the data has {C + 1} categories"
        )
    return rubric


def trial_means(R, w=None) -> np.ndarray:
    """Rubric-weighted mean over trials, shape ``(L, M)``."""
    R = as_tensor(R)
    rubric = resolve_rubric(w, R.C)
    return rubric.apply(R.data).mean(axis=2)


@dataclass(frozen=True)
class ComparisonSummary:
    """``wins[a, b]`` counts cells where a's outcome beats b's; ``ties`` the rest."""

    wins: np.ndarray
    ties: np.ndarray

    @property
    def L(self) -> int:
        return self.wins.shape[0]

    @property
    def decisive(self) -> np.ndarray:
        return self.wins + self.wins.T

    @property
    def totals(self) -> np.ndarray:
        return self.wins + self.wins.T + self.ties


def _require_pair(R: ResponseTensor) -> None:
    if R.L < 2:
        raise ValueError(f"need at least two systems, got L={R.L}")


def comparison_summary(R) -> ComparisonSummary:
    R = as_tensor(R)
    _require_pair(R)
    X = R.data.reshape(R.L, -1)
    L = R.L
    wins = np.zeros((L, L), dtype=np.int64)
    ties = np.zeros((L, L), dtype=np.int64)
    for a in range(L):
        wins[a] = (X[a] > X).sum(axis=1)
        ties[a] = (X[a] == X).sum(axis=1)
    np.fill_diagonal(ties, 0)
    return ComparisonSummary(wins, ties)


def win_rates(summary: ComparisonSummary, empty: float = 0.5) -> np.ndarray:
    """Fraction of decisive comparisons won; ``empty`` where a pair never differs."""
    dec = summary.decisive.astype(float)
    rates = np.full(dec.shape, empty)
    mask = dec > 0
    rates[mask] = summary.wins[mask] / dec[mask]
    np.fill_diagonal(rates, 0.5)
    return rates


@dataclass(frozen=True)
class Ballot:
    """Weak ordering of all systems on one (task, trial) cell, best group first."""

    groups: tuple[tuple[int, ...], ...]
    origin: tuple[int, int]

    @property
    def winners(self) -> tuple[int, ...]:
        return self.groups[0]

    @property
    def losers(self) -> tuple[tuple[int, ...], ...]:
        return self.groups[1:]


def _ballot_from_column(col: np.ndarray, origin: tuple[int, int]) -> Ballot:
    values = np.unique(col)[::-1]
    groups = tuple(tuple(np.flatnonzero(col == v).tolist()) for v in values)
    return Ballot(groups, origin)


def ballots(R) -> list[Ballot]:
    """One ballot per (task, trial), task-major then trial."""
    R = as_tensor(R)
    _require_pair(R)
    out = []
    for m in range(R.M):
        for n in range(R.N):
            out.append(_ballot_from_column(R.data[:, m, n], (m, n)))
    return out


def ballot_matrix(R) -> np.ndarray:
    """Outcome columns of every ballot, shape ``(M*N, L)``, in ballot order."""
    R = as_tensor(R)
    return R.data.reshape(R.L, -1).T


def winner_loser_sets(R) -> list[tuple[frozenset[int], list[tuple[int, ...]]]]:
    return [(frozenset(b.winners), list(b.losers)) for b in ballots(R)]


@dataclass(frozen=True)
class ComparisonGraph:
    edge_weight: np.ndarray

    @property
    def nodes(self) -> range:
        return range(self.edge_weight.shape[0])


def comparison_graph(R) -> ComparisonGraph:
    R = as_tensor(R)
    summary = comparison_summary(R)
    return ComparisonGraph(summary.wins / float(R.M * R.N))


def connected_components(adjacency: np.ndarray) -> list[list[int]]:
    """Components of the undirected graph with an edge wherever ``adjacency`` is non-zero."""
    adj = np.asarray(adjacency) != 0
    adj = adj | adj.T
    L = adj.shape[0]
    seen = np.zeros(L, dtype=bool)
    comps = []
    for start in range(L):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in np.flatnonzero(adj[u] & ~seen):
                seen[v] = True
                stack.append(int(v))
        comps.append(sorted(comp))
    return comps


# -- file formats -----------------------------------------------------------

CSV_HEADER = ("system", "task", "trial", "outcome")


def read_tensor(path, C: int | None = None) -> ResponseTensor:
    """Read a tensor from CSV long format or a JSON manifest (by extension)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return _read_json(path, C)
    return _read_csv(path, C)


def write_tensor(R, path) -> Path:
    R = as_tensor(R)
    path = Path(path)
    if path.suffix.lower() == ".json":
        manifest = {
            "L": R.L,
            "M": R.M,
            "N": R.N,
            "C": R.C,
            "data": R.data.tolist(),
        }
        path.write_text(json.dumps(manifest) + "\n")
        return path
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for (l, m, n), v in np.ndenumerate(R.data):
            writer.writerow((l + 1, m + 1, n + 1, int(v)))
    return path


def _read_json(path: Path, C: int | None) -> ResponseTensor:
    manifest = json.loads(path.read_text())
    data = np.asarray(manifest["data"])
    C = int(manifest.get("C", C if C is not None else max(1, int(data.max()))))
    if data.ndim == 2:
        data = data[None, :, :]
    expected = tuple(int(manifest[k]) for k in ("L", "M", "N") if k in manifest)
    if len(expected) == 3 and data.shape != expected:
        raise ValueError(f"manifest shape {expected} does not match data {data.shape}")
    return ResponseTensor(data, C)


def _read_csv(path: Path, C: int | None) -> ResponseTensor:
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"CSV header must be {','.join(CSV_HEADER)}")
        rows = [
            (int(r["system"]), int(r["task"]), int(r["trial"]), int(r["outcome"]))
            for r in reader
        ]
    if not rows:
        raise ValueError("empty tensor file")
    idx = np.array(rows, dtype=np.int64)
    if idx[:, :3].min() < 1:
        raise ValueError("CSV indices are 1-based")
    L, M, N = (int(v) for v in idx[:, :3].max(axis=0))
    flat = np.ravel_multi_index((idx[:, 0] - 1, idx[:, 1] - 1, idx[:, 2] - 1), (L, M, N))
    if len(rows) != L * M * N or np.unique(flat).size != flat.size:
        raise ValueError("CSV must list every (system, task, trial) cell exactly once")
    data = np.empty(L * M * N, dtype=np.int64)
    data[flat] = idx[:, 3]
    data = data.reshape(L, M, N)
    if C is None:
        C = max(1, int(idx[:, 3].max()))
    return ResponseTensor(data, C)

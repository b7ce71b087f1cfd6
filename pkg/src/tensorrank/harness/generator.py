"""Seeded synthetic response tensors from a Rasch-style ability model."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit

from ..ranking import rank_scores
from ..tensor import ResponseTensor


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic benchmark layout.

    ``tie_pair`` holds 0-based system indices that share one ability level.
    The remaining levels are equally spaced ``ability_gap`` apart and
    centred on zero, with system 0 the strongest.
    """

    L: int = 11
    M: int = 500
    N_max: int = 32
    seeds: tuple[int, ...] = (0, 1, 2, 3)
    ability_gap: float = 0.25
    tie_pair: tuple[int, int] | None = (4, 5)
    difficulty_spread: float = 1.0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("need L >= 2")
        if self.M < 1 or self.N_max < 1:
            raise ValueError("need M >= 1 and N_max >= 1")
        if self.tie_pair is not None:
            a, b = self.tie_pair
            if a == b or not (0 <= a < self.L and 0 <= b < self.L):
                raise ValueError("tie_pair must be two distinct in-range indices")
            object.__setattr__(self, "tie_pair", (int(a), int(b)))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["seeds"] = list(self.seeds)
        out["tie_pair"] = list(self.tie_pair) if self.tie_pair else None
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        d = dict(d)
        if d.get("tie_pair") is not None:
            d["tie_pair"] = tuple(d["tie_pair"])
        d["seeds"] = tuple(d.get("seeds", (0,)))
        return cls(**d)


def abilities(config: GeneratorConfig) -> np.ndarray:
    L = config.L
    tie = config.tie_pair
    levels = L - 1 if tie is not None else L
    grid = config.ability_gap * ((levels - 1) / 2.0 - np.arange(levels))
    theta = np.empty(L)
    if tie is None:
        theta[:] = grid
        return theta
    lo, hi = sorted(tie)
    # walk systems in index order; the later member of the pair reuses a level
    k = 0
    for l in range(L):
        if l == hi:
            theta[l] = theta[lo]
            continue
        theta[l] = grid[k]
        k += 1
    return theta


@dataclass(frozen=True)
class SyntheticData:
    tensor: ResponseTensor
    truth: np.ndarray  # fractional ranks of theta
    theta: np.ndarray
    difficulty: np.ndarray
    seed: int


def generate(config: GeneratorConfig, seed: int) -> SyntheticData:
    """Draw ``R[l, m, n] ~ Bernoulli(sigmoid(theta_l - b_m))`` with ``N_max`` trials."""
    rng = np.random.default_rng(seed)
    theta = abilities(config)
    b = rng.normal(0.0, config.difficulty_spread, size=config.M)
    p = expit(theta[:, None] - b[None, :])
    draws = rng.random((config.L, config.M, config.N_max))
    data = (draws < p[:, :, None]).astype(np.int64)
    truth = rank_scores(theta).fractional
    return SyntheticData(ResponseTensor(data, 1), truth, theta, b, seed)

"""Prior distributions for MAP-style estimators.

Priors act independently on each parameter they are attached to (for
example each log-strength in a Bradley-Terry fit). All log-densities are
vectorized over ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

KINDS = ("gaussian", "laplace", "cauchy", "uniform", "custom", "empirical")

_LOG_2PI = math.log(2.0 * math.pi)


def silverman_bandwidth(sample: np.ndarray) -> float:
    sample = np.asarray(sample, dtype=float)
    n = sample.size
    sd = float(np.std(sample, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(sample, [75, 25])
    iqr = float(q75 - q25) / 1.34
    spread = min(sd, iqr) if iqr > 0 else sd
    if spread <= 0:
        # degenerate sample (single point or all equal)
        return 1.0
    return 0.9 * spread * n ** (-0.2)


@dataclass(frozen=True)
class Prior:
    kind: str
    params: dict = field(default_factory=dict)
    callback: Callable | None = None
    sample: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown prior kind {self.kind!r}")
        p = self.params
        if self.kind == "gaussian" and not p["sigma"] > 0:
            raise ValueError("gaussian sigma must be positive")
        if self.kind == "laplace" and not p["b"] > 0:
            raise ValueError("laplace scale must be positive")
        if self.kind == "cauchy" and not p["gamma"] > 0:
            raise ValueError("cauchy gamma must be positive")
        if self.kind == "uniform" and not p["lo"] < p["hi"]:
            raise ValueError("uniform prior needs lo < hi")
        if self.kind == "custom" and not callable(self.callback):
            raise ValueError("custom prior needs a log-density callback")
        if self.kind == "empirical":
            sample = np.asarray(self.sample, dtype=float).ravel()
            if sample.size == 0:
                raise ValueError("empirical prior needs a non-empty sample")
            object.__setattr__(self, "sample", sample)
            if p.get("bandwidth") is None:
                object.__setattr__(
                    self, "params", {"bandwidth": silverman_bandwidth(sample)}
                )
            elif not p["bandwidth"] > 0:
                raise ValueError("bandwidth must be positive")

    # -- construction -------------------------------------------------------

    @classmethod
    def gaussian(cls, mu: float = 0.0, sigma: float = 1.0) -> "Prior":
        return cls("gaussian", {"mu": float(mu), "sigma": float(sigma)})

    @classmethod
    def laplace(cls, mu: float = 0.0, b: float = 1.0) -> "Prior":
        return cls("laplace", {"mu": float(mu), "b": float(b)})

    @classmethod
    def cauchy(cls, x0: float = 0.0, gamma: float = 1.0) -> "Prior":
        return cls("cauchy", {"x0": float(x0), "gamma": float(gamma)})

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "Prior":
        return cls("uniform", {"lo": float(lo), "hi": float(hi)})

    @classmethod
    def custom(cls, log_density: Callable[[np.ndarray], np.ndarray]) -> "Prior":
        return cls("custom", {}, callback=log_density)

    @classmethod
    def empirical(cls, sample, bandwidth: float | None = None) -> "Prior":
        return cls("empirical", {"bandwidth": bandwidth}, sample=sample)

    @classmethod
    def from_dict(cls, spec: dict) -> "Prior":
        """Build a prior from its JSON form, e.g. ``{"kind": "gaussian", "mu": 0, "sigma": 1}``."""
        spec = dict(spec)
        kind = spec.pop("kind")
        if kind == "custom":
            raise ValueError("custom priors cannot be expressed as JSON")
        if kind == "empirical":
            return cls.empirical(spec["sample"], spec.get("bandwidth"))
        return getattr(cls, kind)(**spec)

    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom priors cannot be expressed as JSON")
        out = {"kind": self.kind, **self.params}
        if self.kind == "empirical":
            out["sample"] = self.sample.tolist()
        return out

    # -- evaluation ---------------------------------------------------------

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValueError("log_density needs finite arguments")
        p = self.params
        if self.kind == "gaussian":
            z = (x - p["mu"]) / p["sigma"]
            out = -0.5 * z**2 - math.log(p["sigma"]) - 0.5 * _LOG_2PI
        elif self.kind == "laplace":
            out = -np.abs(x - p["mu"]) / p["b"] - math.log(2.0 * p["b"])
        elif self.kind == "cauchy":
            z = (x - p["x0"]) / p["gamma"]
            out = -np.log1p(z**2) - math.log(math.pi * p["gamma"])
        elif self.kind == "uniform":
            inside = (x >= p["lo"]) & (x <= p["hi"])
            out = np.where(inside, -math.log(p["hi"] - p["lo"]), -np.inf)
        elif self.kind == "custom":
            out = np.asarray(self.callback(x), dtype=float)
        else:
            h = p["bandwidth"]
            z = (x[..., None] - self.sample) / h
            out = (
                logsumexp(-0.5 * z**2, axis=-1)
                - math.log(self.sample.size * h)
                - 0.5 * _LOG_2PI
            )
        return out if out.ndim else float(out)

    def grad_log_density(self, x):
        """Derivative of the log-density; zero inside a uniform support."""
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "gaussian":
            return -(x - p["mu"]) / p["sigma"] ** 2
        if self.kind == "laplace":
            return -np.sign(x - p["mu"]) / p["b"]
        if self.kind == "cauchy":
            d = x - p["x0"]
            return -2.0 * d / (p["gamma"] ** 2 + d**2)
        if self.kind == "uniform":
            return np.zeros_like(x)
        if self.kind == "empirical":
            h = p["bandwidth"]
            z = (x[..., None] - self.sample) / h
            logk = -0.5 * z**2
            w = np.exp(logk - logsumexp(logk, axis=-1, keepdims=True))
            return -np.sum(w * z, axis=-1) / h
        step = 1e-5
        return (self.log_density(x + step) - self.log_density(x - step)) / (2 * step)


def default_prior() -> Prior:
    return Prior.gaussian(0.0, 1.0)


def log_density(prior: Prior, x):
    return prior.log_density(x)


def resolve_prior(prior) -> Prior | None:
    """Accept a Prior, its dict form, or None."""
    if prior is None or isinstance(prior, Prior):
        return prior
    if isinstance(prior, dict):
        return Prior.from_dict(prior)
    raise TypeError(f"cannot interpret {prior!r} as a prior")

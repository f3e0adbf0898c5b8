"""Edge cost models and frozen scenario tensors.

Two families are supported: a Gaussian truncated from below, and a finite
discrete law. Both are sampled through their inverse CDF from a single
uniform tensor, so a ``SampleMatrix`` is a deterministic function of
``(instance, S, seed)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import log_ndtr
from scipy.stats import truncnorm

from .exceptions import IncompleteInstanceError, InvalidParameterError, TooLargeError

PROB_TOL = 1e-12
DEFAULT_SAMPLES = 100
EXACT_SUPPORT_CAP = 10**6


@dataclass(frozen=True)
class TruncatedGaussian:
    """Normal(mean, std) conditioned on ``X >= lower``."""

    mean: float
    std: float
    lower: float

    kind = "tgauss"

    def __post_init__(self):
        if not (self.std > 0 and math.isfinite(self.std)):
            raise InvalidParameterError(f"stddev must be positive, got {self.std}")
        if not self.lower >= 0:
            raise InvalidParameterError(f"lower bound must be >= 0, got {self.lower}")
        if not math.isfinite(self.mean):
            raise InvalidParameterError(f"mean must be finite, got {self.mean}")

    @property
    def _a(self) -> float:
        return (self.lower - self.mean) / self.std

    def ppf(self, u):
        return truncnorm.ppf(u, self._a, np.inf, loc=self.mean, scale=self.std)

    def expected(self) -> float:
        return float(truncnorm.mean(self._a, np.inf, loc=self.mean, scale=self.std))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mean": float(self.mean), "std": float(self.std),
                "lower": float(self.lower)}


@dataclass(frozen=True)
class Discrete:
    """Finite law given as ``((value, probability), ...)``."""

    support: tuple
    _values: np.ndarray = field(init=False, repr=False, compare=False)
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    kind = "discrete"

    def __post_init__(self):
        support = tuple((float(v), float(p)) for v, p in self.support)
        if not support:
            raise InvalidParameterError("discrete support is empty")
        for v, p in support:
            # zero is allowed: a robot starting on a task node has zero travel time
            if not (v >= 0 and math.isfinite(v)):
                raise InvalidParameterError(f"support value must be finite and >= 0, got {v}")
            if not 0 < p <= 1:
                raise InvalidParameterError(f"probability must lie in (0, 1], got {p}")
        total = math.fsum(p for _, p in support)
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidParameterError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "support", support)
        values = np.array([v for v, _ in support])
        cdf = np.cumsum([p for _, p in support])
        cdf[-1] = 1.0
        object.__setattr__(self, "_values", values)
        object.__setattr__(self, "_cdf", cdf)

    def ppf(self, u):
        idx = np.searchsorted(self._cdf, u, side="right")
        return self._values[np.minimum(idx, len(self._values) - 1)]

    def expected(self) -> float:
        return math.fsum(v * p for v, p in self.support)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "support": [[v, p] for v, p in self.support]}


Distribution = Union[TruncatedGaussian, Discrete]


def make_truncated_gaussian(mean: float, stddev: float, lower: float) -> TruncatedGaussian:
    return TruncatedGaussian(float(mean), float(stddev), float(lower))


def make_discrete(support: Iterable[Sequence[float]]) -> Discrete:
    return Discrete(tuple(tuple(pair) for pair in support))


def point_mass(value: float) -> Discrete:
    return Discrete(((float(value), 1.0),))


def empirical_discrete(draws) -> Discrete:
    """Discrete law putting mass ``count / n`` on every distinct draw."""
    values, counts = np.unique(np.asarray(draws, dtype=float), return_counts=True)
    n = counts.sum()
    probs = counts / n
    # absorb rounding so the probabilities sum to one within PROB_TOL
    probs[-1] = 1.0 - math.fsum(probs[:-1])
    return Discrete(tuple(zip(values.tolist(), probs.tolist())))


def distribution_from_dict(d: dict) -> Distribution:
    kind = d.get("kind")
    if kind == "tgauss":
        return make_truncated_gaussian(d["mean"], d["std"], d["lower"])
    if kind == "discrete":
        return make_discrete(d["support"])
    raise InvalidParameterError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class SampleMatrix:
    """Frozen ``(S, N, M)`` tensor of cost draws shared by a whole solve."""

    samples: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 3 or arr.shape[0] < 1:
            raise InvalidParameterError(f"samples must have shape (S, N, M), got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def S(self) -> int:
        return self.samples.shape[0]

    @property
    def shape(self) -> tuple:
        return self.samples.shape


def expected_values(dists) -> np.ndarray:
    """Means of many laws at once; truncated Gaussians use the closed form
    ``mean + std * phi(a) / (1 - Phi(a))``, evaluated in log space."""
    dists = list(dists)
    out = np.empty(len(dists))
    tg = [k for k, d in enumerate(dists) if isinstance(d, TruncatedGaussian)]
    if tg:
        mu = np.array([dists[k].mean for k in tg])
        sd = np.array([dists[k].std for k in tg])
        a = np.array([dists[k]._a for k in tg])
        mills = np.exp(-0.5 * a * a - 0.5 * math.log(2 * math.pi) - log_ndtr(-a))
        out[tg] = mu + sd * mills
    for k, d in enumerate(dists):
        if not isinstance(d, TruncatedGaussian):
            out[k] = d.expected()
    return out


def uniform_tensor(rng: np.random.Generator, shape) -> np.ndarray:
    # random() returns multiples of 2**-53 in [0, 1); shift into the open interval
    return rng.random(shape) + 2.0**-54


def sample_cost_matrix(instance, S: int = DEFAULT_SAMPLES, seed: int = 0) -> SampleMatrix:
    """Draw ``S`` independent scenarios of every edge cost of ``instance``.

    ``instance.edges[i][j]`` must hold the distribution of agent ``i`` on
    task ``j``. A single uniform tensor of shape ``(S, N, M)`` is drawn from
    ``numpy.random.default_rng(seed)`` and pushed through each edge's inverse
    CDF. Scenario ``s`` therefore does not depend on ``S`` beyond ``s``, and
    the result is bit-identical across runs.
    """
    if int(S) != S or S < 1:
        raise InvalidParameterError(f"S must be a positive integer, got {S}")
    S = int(S)
    edges = instance.edges
    n, m = instance.N, instance.M
    if len(edges) != n or any(len(row) != m for row in edges):
        raise IncompleteInstanceError("edge table does not cover every (agent, task) pair")

    u = uniform_tensor(np.random.default_rng(seed), (S, n, m))
    out = np.empty_like(u)

    tg = [(i, j) for i in range(n) for j in range(m) if isinstance(edges[i][j], TruncatedGaussian)]
    if tg:
        ii, jj = np.array(tg).T
        a = np.array([edges[i][j]._a for i, j in tg])
        loc = np.array([edges[i][j].mean for i, j in tg])
        scale = np.array([edges[i][j].std for i, j in tg])
        lower = np.array([edges[i][j].lower for i, j in tg])
        draws = truncnorm.ppf(u[:, ii, jj], a, np.inf, loc=loc, scale=scale)
        # inverse-CDF rounding can land a hair below the truncation point
        out[:, ii, jj] = np.maximum(draws, lower)
    for i in range(n):
        for j in range(m):
            d = edges[i][j]
            if d is None:
                raise IncompleteInstanceError(f"missing distribution for edge ({i}, {j})")
            if isinstance(d, Discrete):
                out[:, i, j] = d.ppf(u[:, i, j])
            elif not isinstance(d, TruncatedGaussian):
                raise IncompleteInstanceError(f"edge ({i}, {j}) has no usable distribution")
    return SampleMatrix(out, seed)


def exact_min_expectation(dists: Sequence[Discrete], cap: int = EXACT_SUPPORT_CAP) -> float:
    """E[min] of one independent draw per distribution, by full enumeration."""
    if not dists:
        raise InvalidParameterError("need at least one distribution")
    for d in dists:
        if not isinstance(d, Discrete):
            raise InvalidParameterError("exact backend requires discrete distributions")
    size = math.prod(len(d.support) for d in dists)
    if size > cap:
        raise TooLargeError(f"joint support has {size} outcomes, cap is {cap}")
    total = []
    for outcome in itertools.product(*(d.support for d in dists)):
        prob = math.prod(p for _, p in outcome)
        total.append(prob * min(v for v, _ in outcome))
    return math.fsum(total)

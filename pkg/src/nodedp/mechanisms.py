"""Pure differential privacy primitives.

Laplace noise, the exponential mechanism in its minimisation form, and the
generalized exponential mechanism, which copes with candidates whose scores
have very different sensitivities by comparing them on a common scale.

Floating-point side channels in the samplers below are out of scope: they
use ordinary double precision draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget.

    Parameters
    ----------
    epsilon : float
        Pure DP budget. Zero is allowed so that an empty composition is
        representable; mechanisms themselves require ``epsilon > 0``.
    beta : float
        Failure probability used by the generalized exponential mechanism.
    delta : float
        Kept for accounting only; every mechanism here is pure.
    """

    epsilon: float
    beta: float = 0.1
    delta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon!r}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise ValueError(f"delta must be >= 0, got {self.delta!r}")


@dataclass(frozen=True)
class CandidateSet:
    """Scores to minimise, each with its own sensitivity bound."""

    scores: np.ndarray
    sensitivities: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.scores, dtype=float).ravel()
        d = np.broadcast_to(np.asarray(self.sensitivities, dtype=float), q.shape).copy()
        if not np.all(np.isfinite(q)):
            raise ValueError("scores must be finite")
        if not np.all((d > 0) & np.isfinite(d)):
            raise ValueError("sensitivities must be positive and finite")
        q.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "scores", q)
        object.__setattr__(self, "sensitivities", d)

    @property
    def k(self) -> int:
        return self.scores.shape[0]

    @property
    def max_sensitivity(self) -> float:
        return float(self.sensitivities.max())


@dataclass
class RandomSource:
    """Seeded stream of randomness; ``(seed, stream)`` fixes every draw."""

    seed: int
    stream: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(int(self.seed) % 2**64, spawn_key=(int(self.stream),))
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def child(self, stream: int) -> "RandomSource":
        """Independent source for a sub-stage, derived from the same seed."""
        return RandomSource(self.seed, stream)

    def uniform(self, size=None):
        return self.generator.random(size)

    def gumbel(self, size=None):
        return self.generator.gumbel(size=size)


def _as_source(rng) -> RandomSource:
    if isinstance(rng, RandomSource):
        return rng
    return RandomSource(int(rng))


def laplace_sample(scale: float, rng, size=None):
    """Draw from Lap(scale) by inverting the CDF of one uniform per draw."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale!r}")
    u = _as_source(rng).uniform(size) - 0.5
    # u = -0.5 happens with probability 2**-53; keep the draw finite
    tail = np.maximum(1.0 - 2.0 * np.abs(u), np.finfo(float).tiny)
    x = -scale * np.sign(u) * np.log(tail)
    return float(x) if size is None else x


def laplace_mechanism(v, sensitivity: float, epsilon: float, rng) -> np.ndarray:
    """Add i.i.d. Lap(sensitivity / epsilon) noise to every coordinate of ``v``."""
    if not sensitivity > 0:
        raise ValueError("sensitivity must be positive")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    v = np.asarray(v, dtype=float)
    return v + laplace_sample(sensitivity / epsilon, rng, size=v.shape)


def exponential_mechanism_min(c: CandidateSet, epsilon: float, rng) -> int:
    """Sample ``i`` with probability proportional to ``exp(-eps q_i / (2 Delta))``.

    Uses the Gumbel-max identity, so no normalisation of large exponents is
    needed. All candidates must share one sensitivity.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if c.k == 0:
        raise ValueError("no candidates")
    delta = c.sensitivities[0]
    if np.any(c.sensitivities != delta):
        raise ValueError("exponential mechanism needs a common sensitivity")
    noisy = c.scores - (2.0 * delta / epsilon) * _as_source(rng).gumbel(c.k)
    return int(np.argmin(noisy))


def normalized_scores(c: CandidateSet, t: float) -> np.ndarray:
    """``s(i) = max_j (q_i + t D_i - q_j - t D_j) / (D_i + D_j)``.

    The score of the minimiser of ``q + t D`` is exactly zero, every other
    score is non-negative, and the map has sensitivity 1.
    """
    p = c.scores + t * c.sensitivities
    d = c.sensitivities
    return ((p[:, None] - p[None, :]) / (d[:, None] + d[None, :])).max(axis=1)


def gem_temperature(k: int, params: PrivacyParams) -> float:
    return 2.0 * math.log(k / params.beta) / params.epsilon


def generalized_exponential_mechanism(c: CandidateSet, params: PrivacyParams, rng) -> int:
    """Private argmin over candidates with heterogeneous sensitivities.

    Consumes ``params.epsilon``. With one candidate nothing is sampled.
    """
    if c.k == 0:
        raise ValueError("no candidates")
    if not params.epsilon > 0:
        raise ValueError("epsilon must be positive")
    if c.k == 1:
        return 0
    s = normalized_scores(c, gem_temperature(c.k, params))
    return exponential_mechanism_min(CandidateSet(s, np.ones(c.k)), params.epsilon, rng)


def compose_budget(stages) -> PrivacyParams:
    """Basic composition: budgets add up coordinatewise."""
    pairs = [(s.epsilon, s.delta) if isinstance(s, PrivacyParams) else tuple(s) for s in stages]
    return PrivacyParams(math.fsum(e for e, _ in pairs), delta=math.fsum(d for _, d in pairs))

"""Node-private release of a degree distribution.

Two stages, each with its own share of the budget: pick a degree threshold
``D`` with the generalized exponential mechanism, then release the extended
degree histogram at that threshold with Laplace noise. Candidate thresholds
are powers of two up to the (public) node count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .flow import default_tol, degree_list_extension
from .graph import Graph, degree_list, padded_l1
from .histogram import degree_histogram_extension
from .mechanisms import (
    CandidateSet,
    PrivacyParams,
    RandomSource,
    compose_budget,
    generalized_exponential_mechanism,
    laplace_mechanism,
)
from .parametric import extension_total

SELECTION_STREAM = 0
NOISE_STREAM = 1
DEGENERATE_MASS = 1e-9


@dataclass(frozen=True)
class ErrorProxy:
    """Bias plus expected noise of the fixed-threshold histogram at ``D``."""

    D: int
    extension_error: float
    total: float


def noise_scale(D: int, epsilon: float, tol: float) -> float:
    """Laplace scale for the histogram at threshold ``D``.

    The histogram extension moves by at most ``6D`` in l1 between node
    neighbours; ``2 * tol`` covers the solver's numerical slack.
    """
    return (6.0 * D + 2.0 * tol) / epsilon


def err_proxy(g: Graph, D: int, epsilon: float, tol: float | None = None) -> ErrorProxy:
    ext = degree_list_extension(g, D, tol)
    bias = padded_l1(ext, degree_list(g))
    return ErrorProxy(int(D), bias, bias + 6.0 * D * D / epsilon)


def noisy_degree_histogram(g: Graph, epsilon: float, D: int, rng, tol: float | None = None) -> np.ndarray:
    """Extended histogram over degrees ``1..D`` plus Laplace noise.

    Spends ``epsilon``.
    """
    if tol is None:
        tol = default_tol(g.node_count, D)
    h = degree_histogram_extension(g, D, tol)
    return laplace_mechanism(h, 6.0 * D + 2.0 * tol, epsilon, rng)


def candidate_thresholds(n: int) -> np.ndarray:
    """Powers of two ``1, 2, 4, ..., 2**floor(log2 n)``."""
    if n < 1:
        raise ValueError("need at least one node")
    return 2 ** np.arange(int(n).bit_length())


def threshold_scores(g: Graph, noise_epsilon: float, workers: int = 1) -> tuple[np.ndarray, CandidateSet]:
    """Candidate thresholds and their scores ``6 D^2 / eps - ||f_D||_1``.

    The score differs from the error proxy by ``||deg-list||_1``, a constant
    across candidates, so the selection distribution is the same, while each
    score moves by at most ``D`` between node neighbours.
    """
    Ds = candidate_thresholds(g.node_count)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            mass = list(pool.map(lambda D: extension_total(g, int(D)), Ds))
    else:
        mass = [extension_total(g, int(D)) for D in Ds]
    q = 6.0 * Ds.astype(float) ** 2 / noise_epsilon - np.asarray(mass, dtype=float)
    return Ds, CandidateSet(q, Ds.astype(float))


def select_threshold(
    g: Graph,
    epsilon: float,
    beta: float,
    rng,
    tol: float | None = None,
    noise_epsilon: float | None = None,
    workers: int = 1,
    scored=None,
) -> int:
    """Privately choose ``D`` from the power-of-two grid. Spends ``epsilon``.

    ``noise_epsilon`` is the budget of the later histogram stage, which sets
    the noise term of the score; it defaults to ``epsilon``. ``scored`` may
    carry a precomputed :func:`threshold_scores` result for that budget.
    """
    if scored is None:
        scored = threshold_scores(g, epsilon if noise_epsilon is None else noise_epsilon, workers)
    Ds, cands = scored
    i = generalized_exponential_mechanism(cands, PrivacyParams(epsilon, beta), rng)
    return int(Ds[i])


@dataclass
class BudgetLedger:
    """Record of every privacy-consuming stage."""

    entries: list = field(default_factory=list)

    def spend(self, stage: str, epsilon: float, delta: float = 0.0) -> None:
        self.entries.append((stage, float(epsilon), float(delta)))

    def total(self) -> PrivacyParams:
        return compose_budget([(e, d) for _, e, d in self.entries])


@dataclass
class PrivateRelease:
    """Output of :func:`release_degree_distribution`.

    ``histogram[k-1]`` is the noisy count of nodes of degree ``k`` and
    ``distribution`` its normalisation by ``node_count_estimate``, the l1 norm
    of the noisy histogram.
    """

    threshold: int
    histogram: np.ndarray
    distribution: np.ndarray
    node_count_estimate: float
    budget_spent: PrivacyParams
    seed: int
    degenerate: bool = False
    ledger: BudgetLedger = field(default_factory=BudgetLedger, repr=False)

    def to_dict(self) -> dict:
        return {
            "threshold": int(self.threshold),
            "histogram": [float(x) for x in self.histogram],
            "distribution": [float(x) for x in self.distribution],
            "node_count_estimate": float(self.node_count_estimate),
            "epsilon_total": float(self.budget_spent.epsilon),
            "beta": float(self.budget_spent.beta),
            "seed": int(self.seed),
            "degenerate": bool(self.degenerate),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def normalize_histogram(h, clip_negative: bool = False):
    """Return ``(distribution, mass, degenerate)`` for a noisy histogram."""
    h = np.asarray(h, dtype=float)
    if clip_negative:
        h = np.maximum(h, 0.0)
    mass = float(np.abs(h).sum())
    if mass < DEGENERATE_MASS:
        return np.zeros_like(h), mass, True
    return h / mass, mass, False


def release_degree_distribution(
    g: Graph,
    epsilon_total: float,
    beta: float = 0.1,
    seed: int = 0,
    tol: float | None = None,
    selection_share: float = 0.5,
    clip_negative: bool = False,
    workers: int = 1,
    scored=None,
) -> PrivateRelease:
    """Estimate the degree distribution of ``g`` under node privacy.

    Parameters
    ----------
    epsilon_total : float
        Whole budget; ``selection_share`` of it picks the threshold and the
        rest pays for the histogram.
    seed : int
        The two stages draw from independent streams of this seed.
    clip_negative : bool
        Post-process by zeroing negative counts before normalising.
    scored : tuple, optional
        Precomputed ``threshold_scores(g, noise budget)``.
    """
    if not (math.isfinite(epsilon_total) and epsilon_total > 0):
        raise ValueError(f"epsilon_total must be positive, got {epsilon_total!r}")
    if not 0 < selection_share < 1:
        raise ValueError("selection_share must lie in (0, 1)")
    eps_select = epsilon_total * selection_share
    eps_noise = epsilon_total - eps_select
    ledger = BudgetLedger()

    D = select_threshold(
        g, eps_select, beta, RandomSource(seed, SELECTION_STREAM), noise_epsilon=eps_noise, workers=workers,
        scored=scored,
    )
    ledger.spend("select-threshold", eps_select)
    h = noisy_degree_histogram(g, eps_noise, D, RandomSource(seed, NOISE_STREAM), tol)
    ledger.spend("noisy-histogram", eps_noise)

    spent = ledger.total()
    if not math.isclose(spent.epsilon, epsilon_total, rel_tol=1e-12):
        raise AssertionError(f"budget mismatch: spent {spent.epsilon}, configured {epsilon_total}")
    p, mass, degenerate = normalize_histogram(h, clip_negative)
    return PrivateRelease(
        threshold=D,
        histogram=h,
        distribution=p,
        node_count_estimate=mass,
        budget_spent=PrivacyParams(epsilon_total, beta, spent.delta),
        seed=int(seed),
        degenerate=degenerate,
        ledger=ledger,
    )


def reference_distribution(g: Graph, length: int) -> np.ndarray:
    """Degree distribution of the non-isolated nodes, over degrees ``1..length``.

    This is what a release estimates: degree 0 is outside the released
    histogram. Mass above ``length`` is dropped, so the vector may sum to
    less than one.
    """
    deg = g.degrees
    active = deg[deg > 0]
    if active.size == 0:
        return np.zeros(length)
    counts = np.bincount(active, minlength=length + 1)[1 : length + 1]
    return counts / active.size


def tv_error(release: PrivateRelease, g: Graph) -> float:
    """Total variation distance between the released and true distributions."""
    deg = g.degrees
    active = deg[deg > 0]
    top = max(int(active.max()) if active.size else 0, release.threshold)
    p = np.zeros(top)
    p[: release.threshold] = release.distribution
    return 0.5 * float(np.abs(p - reference_distribution(g, top)).sum())

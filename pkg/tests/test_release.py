import json
import math

import numpy as np
import pytest

from oracles import tail_sum_bruteforce, true_histogram
from nodedp.graph import Graph, degree_list, generate, tail_excess
from nodedp.histogram import degree_histogram_extension
from nodedp.mechanisms import CandidateSet, PrivacyParams, RandomSource, generalized_exponential_mechanism
from nodedp.release import (
    BudgetLedger,
    candidate_thresholds,
    err_proxy,
    noise_scale,
    noisy_degree_histogram,
    normalize_histogram,
    reference_distribution,
    release_degree_distribution,
    select_threshold,
    threshold_scores,
    tv_error,
)


def random_graph(rng, i):
    n = int(rng.integers(2, 60))
    kind = i % 3
    if kind == 0:
        return generate("chung-lu", n, i, alpha=float(rng.uniform(1.3, 3)), avg_degree=float(rng.uniform(1, 6)))
    if kind == 1:
        return generate("erdos-renyi", n, i, p=float(rng.uniform(0.02, 0.4)))
    return generate("star", n, i)


def noise_draws(h, D, eps, tol, seed, trials):
    """Many noisy histograms at once, drawn like noisy_degree_histogram."""
    from nodedp.mechanisms import laplace_mechanism

    return laplace_mechanism(np.broadcast_to(h, (trials, D)), 6.0 * D + 2.0 * tol, eps, RandomSource(seed))


class TestErrProxy:
    def test_k3(self, k3):
        e = err_proxy(k3, 2, 1.0)
        assert (e.D, e.extension_error, e.total) == (2, 0.0, 24.0)

    def test_star(self, star4):
        e = err_proxy(star4, 2, 1.0)
        assert e.extension_error == pytest.approx(4.0) and e.total == pytest.approx(28.0)

    def test_monotone_in_threshold(self, rng):
        for i in range(200):
            g = random_graph(rng, i)
            D = int(rng.integers(1, 10))
            assert err_proxy(g, D + 1, 1.0).extension_error <= err_proxy(g, D, 1.0).extension_error + 1e-9

    def test_sandwich(self, rng):
        for i in range(100):
            g = random_graph(rng, i)
            D = int(rng.integers(1, 10))
            eps = float(rng.uniform(0.1, 5))
            noise = 6 * D * D / eps
            total = err_proxy(g, D, eps).total
            te = tail_excess(g, D)
            assert te + noise - 1e-9 <= total <= 2 * te + noise + 1e-9

    def test_bias_coarsening(self, rng):
        # the noise term is quadratic, so doubling D can cost up to a factor 4 overall
        for i in range(100):
            g = random_graph(rng, i)
            D = int(2 ** rng.integers(1, 6))
            eps = float(rng.uniform(0.1, 5))
            hi, lo = err_proxy(g, D, eps), err_proxy(g, D // 2, eps)
            assert hi.extension_error <= lo.extension_error + 1e-9
            assert hi.total <= 4 * lo.total + 1e-9

    def test_factor_two_coarsening_fails_on_empty_graph(self):
        g = Graph.empty(4)
        assert err_proxy(g, 2, 1.0).total == 4 * err_proxy(g, 1, 1.0).total


class TestNoisyHistogram:
    def test_vanishing_noise(self, k3):
        h = noisy_degree_histogram(k3, 1e6, 2, RandomSource(0))
        assert h.shape == (2,) and np.abs(h - [0, 3]).max() < 1e-3

    def test_noise_scale(self):
        assert noise_scale(4, 2.0, 0.5) == 12.5

    def test_matches_vectorised_draws(self, k3):
        tol = 1e-3
        src = RandomSource(5)
        one = np.array([noisy_degree_histogram(k3, 1.0, 2, src, tol) for _ in range(20)])
        assert np.array_equal(one, noise_draws(np.array([0.0, 3.0]), 2, 1.0, tol, 5, 20))

    def test_expected_error_bounded_graph(self):
        D, eps, tol = 4, 1.0, 1e-6
        g = generate("random-bounded", 200, 3, D=D)
        h = degree_histogram_extension(g, D)
        assert np.array_equal(h, true_histogram(g, D))
        draws = noise_draws(h, D, eps, tol, 6, 1000)
        assert np.abs(draws - true_histogram(g, D)).sum(axis=1).mean() <= 6 * D * D / eps * 1.1

    def test_expected_error_big_star(self):
        D, eps, tol = 4, 1.0, 1e-6
        g = generate("star", 100, 0)
        assert tail_excess(g, D) == 95
        h = degree_histogram_extension(g, D)
        draws = noise_draws(h, D, eps, tol, 7, 1000)
        err = np.abs(draws - true_histogram(g, D)).sum(axis=1).mean()
        assert err <= 2 * 95 + 6 * D * D * 1.1


class TestSelection:
    def test_candidates(self):
        assert candidate_thresholds(1).tolist() == [1]
        assert candidate_thresholds(9).tolist() == [1, 2, 4, 8]
        assert candidate_thresholds(16).tolist() == [1, 2, 4, 8, 16]
        with pytest.raises(ValueError):
            candidate_thresholds(0)

    def test_scores(self, star4):
        Ds, c = threshold_scores(star4, 1.0)
        assert Ds.tolist() == [1, 2, 4]
        # ||f_D||_1 is 2, 4, 8 on the star with four leaves
        assert c.scores.tolist() == [6 - 2, 24 - 4, 96 - 8]
        assert c.sensitivities.tolist() == [1, 2, 4]

    def test_parallel_scores_match(self):
        g = generate("chung-lu", 300, 1, alpha=2.0, avg_degree=5.0)
        a, b = threshold_scores(g, 0.5), threshold_scores(g, 0.5, workers=3)
        assert np.array_equal(a[1].scores, b[1].scores)

    def test_empty_graph_picks_one(self):
        g = Graph.empty(64)
        picks = [select_threshold(g, 1.0, 0.1, RandomSource(s)) for s in range(500)]
        assert np.mean(np.array(picks) == 1) >= 0.9

    def test_shift_invariance(self):
        g = generate("chung-lu", 200, 4, alpha=2.0, avg_degree=4.0)
        Ds, c = threshold_scores(g, 1.0)
        shifted = CandidateSet(c.scores + 2 * g.edge_count, c.sensitivities)
        p = PrivacyParams(1.0, 0.1)
        for s in range(200):
            a = generalized_exponential_mechanism(c, p, RandomSource(s))
            b = generalized_exponential_mechanism(shifted, p, RandomSource(s))
            assert a == b

    def test_utility_large_epsilon(self):
        beta = 0.1
        for n in (8, 30, 100):
            g = Graph.from_edges(n, [(i, j) for i in range(3) for j in range(i + 1, 3)])
            for eps in (5.0, 50.0):
                errs = {int(D): err_proxy(g, int(D), eps).total for D in candidate_thresholds(n)}
                D_star = min(errs, key=errs.get)
                bound = errs[D_star] + 4 * D_star * math.log((n.bit_length()) / beta) / eps
                picks = [select_threshold(g, eps, beta, RandomSource(s)) for s in range(300)]
                assert np.mean([errs[D] <= bound + 1e-9 for D in picks]) >= 1 - beta


class TestRelease:
    def test_noiseless_k3(self, k3):
        rel = release_degree_distribution(k3, 1e6, 0.1, seed=1)
        assert rel.threshold == 2
        assert tv_error(rel, k3) <= 1e-3
        assert not rel.degenerate
        assert rel.histogram.shape == (rel.threshold,)

    def test_deterministic(self):
        g = generate("chung-lu", 500, 9, alpha=2.0, avg_degree=5.0)
        a = release_degree_distribution(g, 1.0, seed=42)
        b = release_degree_distribution(g, 1.0, seed=42)
        assert a.to_json() == b.to_json()
        assert np.array_equal(a.histogram, b.histogram)
        assert release_degree_distribution(g, 1.0, seed=43).to_json() != a.to_json()

    def test_budget(self):
        g = generate("erdos-renyi", 100, 2, p=0.05)
        for share in (0.1, 0.5, 0.9):
            rel = release_degree_distribution(g, 2.0, selection_share=share, seed=3)
            assert rel.budget_spent.epsilon == 2.0 and rel.budget_spent.delta == 0.0
            assert [s for s, _, _ in rel.ledger.entries] == ["select-threshold", "noisy-histogram"]
            assert math.fsum(e for _, e, _ in rel.ledger.entries) == 2.0

    def test_ledger(self):
        led = BudgetLedger()
        led.spend("a", 0.25)
        led.spend("b", 0.75, 1e-9)
        assert led.total() == PrivacyParams(1.0, delta=1e-9)

    @pytest.mark.parametrize("kw", [dict(epsilon_total=0.0), dict(epsilon_total=math.nan), dict(epsilon_total=1.0, selection_share=1.0)])
    def test_invalid(self, k3, kw):
        with pytest.raises(ValueError):
            release_degree_distribution(k3, **kw)

    def test_json_fields(self, k3):
        d = json.loads(release_degree_distribution(k3, 1.0, seed=5).to_json())
        assert list(d) == ["threshold", "histogram", "distribution", "node_count_estimate", "epsilon_total", "beta", "seed", "degenerate"]
        assert len(d["histogram"]) == d["threshold"] and d["seed"] == 5

    def test_normalisation_uses_signed_mass(self):
        p, mass, degenerate = normalize_histogram([3.0, -1.0])
        assert mass == 4.0 and p.tolist() == [0.75, -0.25] and not degenerate
        p, mass, _ = normalize_histogram([3.0, -1.0], clip_negative=True)
        assert mass == 3.0 and p.tolist() == [1.0, 0.0]

    def test_degenerate(self):
        p, mass, degenerate = normalize_histogram([1e-12, -1e-12])
        assert degenerate and p.tolist() == [0, 0]

    def test_clip_negative_release(self):
        g = generate("chung-lu", 300, 8, alpha=2.0, avg_degree=3.0)
        rel = release_degree_distribution(g, 0.5, seed=8, clip_negative=True)
        assert np.all(rel.distribution >= 0) and rel.distribution.sum() == pytest.approx(1.0)

    def test_normalisation_at_most_doubles(self, rng):
        for i in range(300):
            D = int(rng.integers(1, 8))
            g = generate("random-bounded", int(rng.integers(5, 80)), i, D=D)
            deg = g.degrees
            if (deg == 0).any() or g.max_degree > D:
                continue
            n = g.node_count
            p_G = reference_distribution(g, D)
            h = n * p_G + rng.normal(size=D) * rng.uniform(0, 0.4) * n / D
            gap = np.abs(h / n - p_G).sum()
            if gap >= 1:
                continue
            p_hat, _, _ = normalize_histogram(h)
            assert np.abs(p_hat - p_G).sum() <= 2 * gap + 1e-12

    def test_reference_distribution(self, p3):
        assert reference_distribution(p3, 3).tolist() == [2 / 3, 1 / 3, 0]
        g = Graph.from_edges(4, [(0, 1)])
        assert reference_distribution(g, 2).tolist() == [1, 0]
        assert reference_distribution(Graph.empty(3), 2).tolist() == [0, 0]

    def test_tv_error_range(self):
        g = generate("chung-lu", 400, 10, alpha=2.0, avg_degree=5.0)
        for s in range(10):
            assert 0 <= tv_error(release_degree_distribution(g, 0.3, seed=s, clip_negative=True), g) <= 1


class TestDecay:
    def test_tail_identity(self, rng):
        for i in range(50):
            g = random_graph(rng, i)
            D = int(rng.integers(1, 12))
            assert tail_excess(g, D) == tail_sum_bruteforce(g, D)
            assert sum(max(0, d - D) for d in degree_list(g)) == tail_excess(g, D)

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
    def test_decay_exponent(self, alpha):
        g = generate("chung-lu", 100_000, 1, alpha=alpha, avg_degree=5.0)
        Ds = np.array([8, 16, 32, 64]) if alpha < 2.5 else np.array([8, 12, 16, 24])
        t = np.array([tail_excess(g, int(D)) / g.node_count for D in Ds])
        slope = np.polyfit(np.log(Ds), np.log(t), 1)[0]
        assert -slope >= alpha - 1 - 0.3

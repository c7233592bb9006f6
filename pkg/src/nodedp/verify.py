"""Self-checks runnable from the command line.

Each suite samples random instances and checks a guarantee of the library:
agreement on bounded graphs, the l1 sensitivity bounds, mechanism utility,
and the stretch gadget. Instance sizes and time limits live in
``verify_defaults.json``.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .flow import build_flow_network, default_tol, degree_list_extension, max_flow_value
from .gadget import verify_stretch_gadget
from .graph import degree_list, generate, padded_l1, remove_node, tail_excess
from .histogram import degree_histogram_extension
from .mechanisms import (
    CandidateSet,
    PrivacyParams,
    RandomSource,
    exponential_mechanism_min,
    generalized_exponential_mechanism,
)

SUITES = ("extension", "sensitivity", "mechanisms", "gadget")


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)
    elapsed_s: float = 0.0
    time_limit_s: float | None = None

    @property
    def passed(self) -> bool:
        in_time = self.time_limit_s is None or self.elapsed_s <= self.time_limit_s
        return not self.failures and in_time

    def check(self, ok: bool, what: str) -> None:
        self.checks += 1
        if not ok:
            self.failures.append(what)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.name}: {self.checks} checks, {len(self.failures)} failures, {self.elapsed_s:.1f}s"
        if self.time_limit_s is not None and self.elapsed_s > self.time_limit_s:
            line += f" (over the {self.time_limit_s:g}s limit)"
        return line


def load_defaults(path=None) -> dict:
    if path is None:
        text = resources.files("nodedp").joinpath("verify_defaults.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def random_graph(rng: np.random.Generator, max_n: int):
    """Mixed bag of test graphs: stars, power-law, G(n, p) and bounded."""
    n = int(rng.integers(2, max_n + 1))
    kind = int(rng.integers(4))
    seed = int(rng.integers(2**31))
    if kind == 0:
        return generate("star", n, seed)
    if kind == 1:
        return generate("chung-lu", n, seed, alpha=float(rng.uniform(1.2, 3.0)), avg_degree=float(rng.uniform(1, 6)))
    if kind == 2:
        return generate("erdos-renyi", n, seed, p=float(rng.uniform(0.02, 0.5)))
    return generate("random-bounded", n, seed, D=int(rng.integers(1, 8)))


def suite_extension(cfg, seed) -> SuiteResult:
    res = SuiteResult("extension")
    rng = np.random.default_rng([seed, 1])
    Ds = cfg["thresholds"]
    for i in range(cfg["bounded_graphs"]):
        D = int(Ds[i % len(Ds)])
        g = generate("random-bounded", int(rng.integers(1, cfg["max_n"] + 1)), int(rng.integers(2**31)), D=D)
        ext = degree_list_extension(g, D)
        res.check(np.array_equal(ext, degree_list(g)), f"bounded graph {i}: extension differs from degree list")
    for i in range(cfg["random_graphs"]):
        g = random_graph(rng, cfg["max_n"])
        D = int(Ds[i % len(Ds)])
        ext = degree_list_extension(g, D)
        tol = default_tol(g.node_count, D)
        mf = max_flow_value(build_flow_network(g, D))
        res.check(abs(ext.sum() - mf) <= 1e-5 * max(mf, 1), f"graph {i}: total {ext.sum()} vs max flow {mf}")
        err = padded_l1(ext, degree_list(g))
        te = tail_excess(g, D)
        res.check(te - 1e-9 <= err <= 2 * te + 2 * tol * g.node_count, f"graph {i}: error {err} outside [{te}, {2 * te}]")
    return res


def suite_sensitivity(cfg, seed) -> SuiteResult:
    res = SuiteResult("sensitivity")
    rng = np.random.default_rng([seed, 2])
    Ds = cfg["thresholds"]
    for i in range(cfg["pairs"]):
        g = random_graph(rng, cfg["max_n"])
        v = int(rng.integers(g.node_count))
        h = remove_node(g, v)
        D = int(Ds[i % len(Ds)])
        tol = default_tol(g.node_count, D)
        d = padded_l1(degree_list_extension(g, D), degree_list_extension(h, D))
        res.check(d <= 3 * D + 2 * tol * g.node_count, f"pair {i}: degree list moved {d} > 3D = {3 * D}")
        dh = np.abs(degree_histogram_extension(g, D) - degree_histogram_extension(h, D)).sum()
        res.check(dh <= 6 * D + 1e-9, f"pair {i}: histogram moved {dh} > 6D = {6 * D}")
    return res


def suite_mechanisms(cfg, seed) -> SuiteResult:
    res = SuiteResult("mechanisms")
    trials = int(cfg["trials"])
    beta = float(cfg["beta"])
    eps = 1.0
    bad = CandidateSet([0.0, 100.0 / eps], [1.0, 100.0])
    gem_good = sum(
        generalized_exponential_mechanism(bad, PrivacyParams(eps, beta), RandomSource(seed, i)) == 0
        for i in range(trials)
    )
    em_bad = sum(
        exponential_mechanism_min(CandidateSet(bad.scores, 100.0), eps, RandomSource(seed + 1, i)) == 1
        for i in range(trials)
    )
    res.check(gem_good / trials >= 0.9, f"GEM picked the good candidate only {gem_good / trials:.3f} of the time")
    res.check(em_bad / trials >= 0.2, f"EM picked the bad candidate only {em_bad / trials:.3f} of the time")

    rng = np.random.default_rng([seed, 3])
    hits = 0
    for i in range(trials):
        k = int(rng.integers(1, 17))
        q = rng.normal(0, 50, k)
        d = 10 ** rng.uniform(0, 4, k)
        c = CandidateSet(q, d)
        j = generalized_exponential_mechanism(c, PrivacyParams(eps, beta), RandomSource(seed + 2, i))
        hits += q[j] <= np.min(q + 4 * d * np.log(k / beta) / eps)
    res.check(hits / trials >= 1 - beta, f"GEM utility bound held only {hits / trials:.4f} of the time")
    return res


def suite_gadget(cfg, seed) -> SuiteResult:
    res = SuiteResult("gadget")
    rep = verify_stretch_gadget(cfg["step"])
    res.check(abs(rep.l1_radius - 3.0) <= 0.01, f"l1 radius {rep.l1_radius:.4f}, expected 3")
    res.check(abs(rep.l2_radius - 3 ** -0.5) <= 0.001, f"l2 radius {rep.l2_radius:.4f}, expected 1/sqrt(3)")
    res.check(rep.passed, "gadget does not certify a stretch above 1")
    return res


_RUNNERS = {
    "extension": suite_extension,
    "sensitivity": suite_sensitivity,
    "mechanisms": suite_mechanisms,
    "gadget": suite_gadget,
}


def run_suite(name: str, defaults: dict | None = None) -> SuiteResult:
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}")
    defaults = load_defaults() if defaults is None else defaults
    cfg = defaults[name]
    t0 = time.perf_counter()
    res = _RUNNERS[name](cfg, int(defaults["seed"]))
    res.elapsed_s = time.perf_counter() - t0
    res.time_limit_s = cfg.get("time_limit_s")
    return res

"""Evaluation sweeps: generate graphs, release, measure the error, write CSV."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from .graph import generate
from .release import release_degree_distribution, threshold_scores, tv_error

MODELS = ("chung-lu", "erdos-renyi")


@dataclass(frozen=True)
class EvalRecord:
    seed: int
    n: int
    model: str
    alpha: float
    avg_degree: float
    epsilon: float
    beta: float
    D_hat: int
    l1_error: float
    tv_error: float
    err_proxy_opt: float
    runtime_ms: float


FIELDS = tuple(f.name for f in fields(EvalRecord))


@dataclass(frozen=True)
class Cell:
    model: str
    alpha: float
    avg_degree: float
    n: int
    epsilon: float
    beta: float
    rep: int
    seed: int


def cell_seed(base: int, *key) -> int:
    """63-bit seed derived from the sweep seed and a cell key."""
    words = [int(round(k * 1000)) if isinstance(k, float) else int(k) for k in key]
    ss = np.random.SeedSequence(int(base) % 2**64, spawn_key=tuple(w % 2**32 for w in words))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_cells(models, n_grid, eps_grid, reps, seed, alpha_grid=(2.0,), avg_degree=5.0, beta=0.1):
    cells = []
    for m_idx, model in enumerate(models):
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
        # Erdos-Renyi tails are lighter than any power law
        alphas = alpha_grid if model == "chung-lu" else (math.inf,)
        for alpha, n, eps, rep in itertools.product(alphas, n_grid, eps_grid, range(reps)):
            key = (m_idx, 0 if math.isinf(alpha) else alpha, n, eps, rep)
            cells.append(Cell(model, float(alpha), float(avg_degree), int(n), float(eps), beta, rep, cell_seed(seed, *key)))
    return cells


def run_cell(cell: Cell, timing: bool = True) -> EvalRecord:
    t0 = time.perf_counter()
    if cell.model == "chung-lu":
        g = generate("chung-lu", cell.n, cell.seed, alpha=cell.alpha, avg_degree=cell.avg_degree)
    else:
        p = min(1.0, cell.avg_degree / max(cell.n - 1, 1))
        g = generate("erdos-renyi", cell.n, cell.seed, p=p)
    eps_noise = cell.epsilon / 2
    scored = threshold_scores(g, eps_noise)
    rel = release_degree_distribution(g, cell.epsilon, cell.beta, seed=cell.seed ^ 1, scored=scored)
    tv = tv_error(rel, g)
    # best achievable proxy over the grid; scores omit the constant ||deg||_1
    proxy = float(scored[1].scores.min() + 2 * g.edge_count)
    runtime = (time.perf_counter() - t0) * 1e3 if timing else 0.0
    return EvalRecord(
        cell.seed, cell.n, cell.model, cell.alpha, cell.avg_degree, cell.epsilon, cell.beta,
        rel.threshold, 2 * tv, tv, proxy, round(runtime, 3),
    )


def _run_timed(cell):
    return run_cell(cell, True)


def _run_untimed(cell):
    return run_cell(cell, False)


def run_eval(cells, workers: int = 1, timing: bool = True) -> list[EvalRecord]:
    """Evaluate every cell; rows come back in a fixed order."""
    fn = _run_timed if timing else _run_untimed
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(fn, cells))
    else:
        rows = [fn(c) for c in cells]
    return sorted(rows, key=lambda r: (r.model, r.alpha, r.n, r.epsilon, r.seed))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in rows:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()


def summarize(rows):
    """Mean TV error per (model, alpha, n, epsilon)."""
    groups = {}
    for r in rows:
        groups.setdefault((r.model, r.alpha, r.n, r.epsilon), []).append(r.tv_error)
    return {k: float(np.mean(v)) for k, v in sorted(groups.items())}


def loglog_slope(ns, errors) -> float:
    """Least-squares slope of log(error) against log(n)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)[0])

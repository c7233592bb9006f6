"""Simple undirected graphs, degree statistics, generators and edge-list I/O."""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
from numba import njit


class GraphError(ValueError):
    """Raised for graphs that violate the simple-graph invariants."""


class ParseError(ValueError):
    """Malformed edge-list text. ``lineno`` is 1-based."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Finite simple undirected graph on nodes ``0..node_count-1``.

    ``edges`` is an ``(m, 2)`` int64 array with ``u < v`` in every row,
    sorted lexicographically and read-only. Use :meth:`from_edges` to build
    one from arbitrary pairs.
    """

    node_count: int
    edges: np.ndarray

    def __post_init__(self):
        n = int(self.node_count)
        if n < 0:
            raise GraphError("node_count must be nonnegative")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if np.any(e[:, 0] == e[:, 1]):
                raise GraphError("self-loop")
            if e.min() < 0 or e.max() >= n:
                raise GraphError("edge endpoint out of range")
            e = np.sort(e, axis=1)
            e = e[np.lexsort((e[:, 1], e[:, 0]))]
            if np.any(np.all(e[1:] == e[:-1], axis=1)):
                raise GraphError("duplicate edge")
        e = np.ascontiguousarray(e)
        e.flags.writeable = False
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_edges(cls, node_count: int, pairs: Iterable) -> "Graph":
        return cls(node_count, np.array(list(pairs), dtype=np.int64).reshape(-1, 2))

    @classmethod
    def empty(cls, node_count: int) -> "Graph":
        return cls(node_count, np.empty((0, 2), dtype=np.int64))

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges.ravel(), minlength=self.node_count).astype(np.int64)
        deg.flags.writeable = False
        return deg

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.node_count else 0

    @property
    def average_degree(self) -> float:
        return 2.0 * self.edge_count / self.node_count if self.node_count else 0.0

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.node_count, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.node_count}, m={self.edge_count})"


# ---------------------------------------------------------------------------
# edge-list format


def parse_edge_list(text) -> Graph:
    """Parse the edge-list text format.

    ``#`` lines are comments; the first other line is ``"n m"`` and exactly
    ``m`` lines ``"u v"`` follow. Fields are ASCII decimals separated by one
    space. Raises :class:`ParseError` naming the offending line.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise ParseError(text[: exc.start].count(b"\n") + 1, "non-ASCII byte") from None
    elif hasattr(text, "read"):
        data = text.read()
        return parse_edge_list(data)

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    header = None
    expected = 0
    pairs = []
    seen = set()
    for lineno, line in enumerate(lines, start=1):
        if line.startswith("#"):
            continue
        fields = line.split(" ")
        if len(fields) != 2 or not all(f.isdigit() and f.isascii() for f in fields):
            what = "header 'n m'" if header is None else "edge 'u v'"
            raise ParseError(lineno, f"expected {what}, got {line!r}")
        a, b = int(fields[0]), int(fields[1])
        if header is None:
            header = (a, b)
            expected = b
            continue
        if len(pairs) == expected:
            raise ParseError(lineno, f"more than the declared {expected} edges")
        n = header[0]
        if a == b:
            raise ParseError(lineno, f"self-loop at node {a}")
        if a >= n or b >= n:
            raise ParseError(lineno, f"node index out of range for n={n}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise ParseError(lineno, f"duplicate edge {key[0]} {key[1]}")
        seen.add(key)
        pairs.append(key)
    if header is None:
        raise ParseError(len(lines) + 1, "missing header 'n m'")
    if len(pairs) != expected:
        raise ParseError(len(lines) + 1, f"declared {expected} edges, found {len(pairs)}")
    return Graph.from_edges(header[0], pairs)


def serialize_edge_list(g: Graph, comment: str | None = None) -> str:
    out = io.StringIO()
    if comment:
        for line in comment.splitlines():
            out.write(f"# {line}\n")
    out.write(f"{g.node_count} {g.edge_count}\n")
    if g.edge_count:
        np.savetxt(out, g.edges, fmt="%d", delimiter=" ", newline="\n")
    return out.getvalue()


def read_edge_list(path) -> Graph:
    with open(path, "rb") as fh:
        return parse_edge_list(fh.read())


def write_edge_list(g: Graph, path, comment: str | None = None) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(serialize_edge_list(g, comment))


# ---------------------------------------------------------------------------
# degree statistics


@dataclass(frozen=True)
class DegreeDistribution:
    """``pmf[k]`` is the fraction of nodes of degree ``k``; ``cdf_tail[k]``
    the fraction of degree at least ``k``. Both have length ``maxdeg + 1``."""

    pmf: np.ndarray
    cdf_tail: np.ndarray


def degree_list(g: Graph) -> np.ndarray:
    """Degrees sorted in non-increasing order (float array, integral values)."""
    return np.sort(g.degrees)[::-1].astype(float)


def padded_l1(a, b) -> float:
    """l1 distance between finite sequences after zero-padding the shorter one."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size < b.size:
        a, b = b, a
    return float(np.abs(a[: b.size] - b).sum() + np.abs(a[b.size :]).sum())


def degree_distribution(g: Graph) -> DegreeDistribution:
    if g.node_count < 1:
        raise GraphError("degree distribution of the empty graph is undefined")
    counts = np.bincount(g.degrees, minlength=1).astype(float)
    pmf = counts / g.node_count
    tail = np.cumsum(counts[::-1])[::-1] / g.node_count
    return DegreeDistribution(pmf, tail)


def remove_node(g: Graph, v: int) -> Graph:
    """Node neighbor of ``g`` without ``v``; indices above ``v`` shift down by one."""
    if not 0 <= v < g.node_count:
        raise GraphError(f"node {v} out of range for n={g.node_count}")
    e = g.edges
    e = e[(e[:, 0] != v) & (e[:, 1] != v)]
    e = e - (e > v)
    return Graph(g.node_count - 1, e)


def tail_excess(g: Graph, D: int) -> int:
    """Sum over nodes of ``max(0, deg - D)``."""
    return int(np.maximum(g.degrees - D, 0).sum())


def decay_grid(g: Graph) -> np.ndarray:
    """Breakpoints ``t = k / avg_degree`` (``t > 1``, ``k <= maxdeg``) of the
    degree CDF, where the decay condition is tightest."""
    avg = g.average_degree
    k = np.arange(math.floor(avg) + 1, g.max_degree + 1)
    return k / avg


def alpha_decay_holds(g: Graph, alpha: float, t_grid=None) -> bool:
    """Check ``P_G(t * avg_degree) <= t**-alpha`` for every ``t`` on the grid."""
    avg = g.average_degree
    if avg <= 0:
        raise GraphError("alpha-decay needs positive average degree")
    t = decay_grid(g) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(t <= 1):
        raise ValueError("decay grid points must exceed 1")
    if t.size == 0:
        return True
    deg = np.sort(g.degrees)
    # fraction of nodes with degree >= ceil(t * avg)
    thresh = np.ceil(t * avg - 1e-12)
    frac = (g.node_count - np.searchsorted(deg, thresh, side="left")) / g.node_count
    return bool(np.all(frac <= t ** (-alpha) + 1e-15))


# ---------------------------------------------------------------------------
# generators


def _rng(seed):
    return np.random.default_rng(np.random.SeedSequence(int(seed) & ((1 << 64) - 1)))


def _pair_from_index(idx, n):
    # row-major enumeration of pairs (u, v), u < v
    idx = np.asarray(idx, dtype=np.int64)
    u = (n - 2 - np.floor(np.sqrt(-8.0 * idx + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
    row_start = u * (2 * n - u - 1) // 2
    # repair rare floating-point off-by-one at row boundaries
    too_far = row_start > idx
    while np.any(too_far):
        u[too_far] -= 1
        row_start = u * (2 * n - u - 1) // 2
        too_far = row_start > idx
    next_start = (u + 1) * (2 * n - u - 2) // 2
    short = idx >= next_start
    while np.any(short):
        u[short] += 1
        row_start = u * (2 * n - u - 1) // 2
        next_start = (u + 1) * (2 * n - u - 2) // 2
        short = idx >= next_start
    v = idx - row_start + u + 1
    return np.stack([u, v], axis=1)


def _gnp_edges(n, p, rng):
    total = n * (n - 1) // 2
    if p <= 0 or total == 0:
        return np.empty((0, 2), dtype=np.int64)
    if p >= 1:
        return _pair_from_index(np.arange(total), n)
    chunks = []
    pos = -1
    batch = max(1024, int(total * p * 1.1) + 64)
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        chunks.append(idx[idx < total])
        if idx[-1] >= total:
            break
        pos = int(idx[-1])
    idx = np.concatenate(chunks)
    return _pair_from_index(idx, n)


@njit(cache=True)
def _chung_lu_kernel(w, seed):
    # Miller-Hagberg skipping sampler; ``w`` sorted non-increasing
    np.random.seed(seed)
    n = w.shape[0]
    S = w.sum()
    cap = 16
    us = np.empty(cap, dtype=np.int64)
    vs = np.empty(cap, dtype=np.int64)
    m = 0
    for u in range(n - 1):
        v = u + 1
        p = min(w[u] * w[v] / S, 1.0)
        while v < n and p > 0:
            if p != 1.0:
                r = 1.0 - np.random.random()
                v += int(math.floor(math.log(r) / math.log(1.0 - p)))
            if v < n:
                q = min(w[u] * w[v] / S, 1.0)
                if np.random.random() < q / p:
                    if m == cap:
                        cap *= 2
                        us2 = np.empty(cap, dtype=np.int64)
                        vs2 = np.empty(cap, dtype=np.int64)
                        us2[:m] = us[:m]
                        vs2[:m] = vs[:m]
                        us = us2
                        vs = vs2
                    us[m] = u
                    vs[m] = v
                    m += 1
                p = q
                v += 1
    out = np.empty((m, 2), dtype=np.int64)
    out[:, 0] = us[:m]
    out[:, 1] = vs[:m]
    return out


def chung_lu_weights(n: int, alpha: float, avg_degree: float) -> np.ndarray:
    """Expected degrees ``w_v ∝ (v + 1) ** (-1 / alpha)`` with mean ``avg_degree``."""
    w = np.arange(1, n + 1, dtype=float) ** (-1.0 / alpha)
    return w * (avg_degree / w.mean())


def generate(model: str, n: int, seed: int, **params) -> Graph:
    """Sample a graph from one of the built-in models.

    Models and their parameters:

    ``erdos-renyi``  ``p``
    ``chung-lu``     ``alpha``, ``avg_degree`` (alias ``chung-lu-powerlaw``)
    ``star``         none; node 0 is the center
    ``regular``      ``d``; uniform random ``d``-regular graph
    ``random-bounded``  ``D``; G(n, D/(n-1)) thinned in random order so
    that no degree exceeds ``D``

    The result is a deterministic function of ``(model, n, seed, params)``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    required = {"erdos-renyi": ("p",), "chung-lu": ("alpha", "avg_degree"),
                "chung-lu-powerlaw": ("alpha", "avg_degree"), "regular": ("d",), "random-bounded": ("D",)}
    missing = [k for k in required.get(model, ()) if k not in params]
    if missing:
        raise ValueError(f"model {model!r} needs parameter(s) {', '.join(missing)}")
    rng = _rng(seed)
    if model == "erdos-renyi":
        p = float(params["p"])
        if not 0 <= p <= 1:
            raise ValueError("p must lie in [0, 1]")
        return Graph(n, _gnp_edges(n, p, rng))
    if model in ("chung-lu", "chung-lu-powerlaw"):
        alpha = float(params["alpha"])
        avg = float(params["avg_degree"])
        if alpha <= 0 or avg < 0:
            raise ValueError("chung-lu needs alpha > 0 and avg_degree >= 0")
        if n < 2 or avg == 0:
            return Graph.empty(n)
        w = chung_lu_weights(n, alpha, avg)
        kernel_seed = int(rng.integers(0, 2**31 - 1))
        return Graph(n, _chung_lu_kernel(w, kernel_seed))
    if model == "star":
        if n < 1:
            raise ValueError("star needs n >= 1")
        leaves = np.arange(1, n, dtype=np.int64)
        return Graph(n, np.stack([np.zeros_like(leaves), leaves], axis=1))
    if model == "regular":
        d = int(params["d"])
        if not 0 <= d < max(n, 1) or (n * d) % 2:
            raise ValueError(f"no {d}-regular graph on {n} nodes")
        import networkx as nx

        h = nx.random_regular_graph(d, n, seed=int(rng.integers(0, 2**31 - 1)))
        return Graph.from_edges(n, h.edges())
    if model == "random-bounded":
        D = int(params["D"])
        if D < 0:
            raise ValueError("D must be nonnegative")
        if n < 2 or D == 0:
            return Graph.empty(n)
        cand = _gnp_edges(n, min(1.0, D / (n - 1)), rng)
        cand = cand[rng.permutation(len(cand))]
        deg = np.zeros(n, dtype=np.int64)
        keep = np.zeros(len(cand), dtype=bool)
        for i, (u, v) in enumerate(cand):
            if deg[u] < D and deg[v] < D:
                deg[u] += 1
                deg[v] += 1
                keep[i] = True
        return Graph(n, cand[keep])
    raise ValueError(f"unknown model {model!r}")


class ThresholdWarning(UserWarning):
    """The degree threshold is not below the node count."""


def check_threshold(g: Graph, D: int) -> None:
    if int(D) != D or D < 1:
        raise ValueError("degree threshold must be a positive integer")
    if g.node_count and D >= g.node_count:
        warnings.warn(f"threshold D={D} is not below n={g.node_count}", ThresholdWarning, stacklevel=3)

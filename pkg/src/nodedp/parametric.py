"""Exact Phi-optimal boundary of the flow graph via parametric min cuts.

The source-arc boundary of a Phi-optimal flow coincides with the
minimum-norm point of the base polytope of the rank function
``rho(A) = max flow out of A_left``. That point is found by the classic
divide-and-conquer decomposition: guess a common water level for a block of
nodes, test it with one max flow, and split the block along the minimum cut
when the guess is infeasible. Each split leaves two disjoint subnetworks, so
the work per recursion depth is one max flow over the whole graph.

All capacities are integers after scaling by the level's denominator, so
levels come out as exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._maxflow import max_flow


@dataclass
class LevelSolution:
    """Per-node optimal source flows (as exact rationals) plus bookkeeping."""

    levels: list
    max_flows: int
    fixed_edges: int

    def as_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.levels], dtype=float)

    @property
    def total(self) -> Fraction:
        return sum(self.levels, Fraction(0))


def _reduce(g, D):
    """Saturate edges whose endpoints both have degree <= D.

    Such edges carry one unit in both directions in some symmetric optimum,
    so they can be fixed up front. Returns per-node fixed flow, the
    remaining edges and the count of fixed edges.
    """
    deg = g.degrees
    e = g.edges
    low = deg <= D
    both_low = low[e[:, 0]] & low[e[:, 1]] if e.size else np.zeros(0, dtype=bool)
    fixed = e[both_low]
    offset = np.bincount(fixed.ravel(), minlength=g.node_count).astype(np.int64)
    return offset, e[~both_low], int(both_low.sum())


def _water_level(T, c, D):
    """Smallest ``mu`` with ``sum(clip(mu, c_u, D) - c_u) == T`` (exact)."""

    def fill(mu):
        return sum(min(max(mu, ci), D) - ci for ci in c)

    points = sorted({Fraction(ci) for ci in c} | {Fraction(D)})
    if fill(points[-1]) < T:
        raise ValueError("block total exceeds its capacity")
    prev = points[0]
    for b in points[1:]:
        fb = fill(b)
        if fb >= T:
            fa = fill(prev)
            return prev + (T - fa) * (b - prev) / (fb - fa)
        prev = b
    return prev


def extension_total(g, D) -> int:
    """Value of a maximum flow in the flow graph, i.e. the l1 norm of the
    extended degree list. Exact integer."""
    if D >= g.max_degree:
        return 2 * g.edge_count
    offset, rest, nfixed = _reduce(g, D)
    nodes = np.unique(rest.ravel())
    k = nodes.size
    local = np.full(g.node_count, -1, dtype=np.int64)
    local[nodes] = np.arange(k)
    lu = local[rest[:, 0]]
    lv = local[rest[:, 1]]
    s, t = 2 * k, 2 * k + 1
    cap_b = D - offset[nodes]
    tails = np.concatenate([np.full(k, s), k + np.arange(k), lu, lv])
    heads = np.concatenate([np.arange(k), np.full(k, t), k + lv, k + lu])
    caps = np.concatenate([cap_b, cap_b, np.ones(2 * rest.shape[0], dtype=np.int64)])
    value, _, _ = max_flow(2 * k + 2, tails, heads, caps, s, t)
    return 2 * nfixed + value


def solve_levels(g, D) -> LevelSolution:
    """Exact Phi-optimal source flow for every node of ``g`` at threshold ``D``."""
    n = g.node_count
    levels = [Fraction(0)] * n
    if D >= g.max_degree:
        return LevelSolution([Fraction(int(d)) for d in g.degrees], 0, g.edge_count)

    offset, rest, nfixed = _reduce(g, D)
    for v in range(n):
        levels[v] = Fraction(int(offset[v]))
    if rest.size == 0:
        return LevelSolution(levels, 0, nfixed)

    nodes = np.unique(rest.ravel())
    # arcs u_l -> v_r in both orientations, in global node ids
    arc_l = np.concatenate([rest[:, 0], rest[:, 1]])
    arc_r = np.concatenate([rest[:, 1], rest[:, 0]])
    c0 = offset[nodes].astype(np.int64)
    kappa0 = (D - offset[nodes]).astype(np.int64)
    flows = 0

    T0 = _block_flow(nodes, nodes, arc_l, arc_r, D - c0, kappa0, 1)[0]
    flows += 1

    stack = [(nodes, c0, nodes, kappa0, arc_l, arc_r, T0)]
    while stack:
        left, c, right, kappa, al, ar, T = stack.pop()
        if left.size == 0:
            continue
        if T == 0:
            for u, cu in zip(left.tolist(), c.tolist()):
                levels[u] = Fraction(cu)
            continue
        mu = _water_level(T, c.tolist(), D)
        p, q = mu.numerator, mu.denominator
        src = np.clip(p - q * c, 0, q * (D - c))
        value, reach_l, reach_r = _block_flow(left, right, al, ar, src, q * kappa, q)
        flows += 1
        if value == q * T:
            for u, cu in zip(left.tolist(), c.tolist()):
                levels[u] = min(max(mu, Fraction(cu)), Fraction(D))
            continue

        # split along the minimal min cut: A (source side) sits below mu
        in_A = np.zeros(n, dtype=bool)
        in_A[left[reach_l]] = True
        in_Y = np.zeros(n, dtype=bool)
        in_Y[right[reach_r]] = True
        A, B = left[reach_l], left[~reach_l]
        Y, Z = right[reach_r], right[~reach_r]
        assert A.size and B.size, "degenerate split"

        from_A = in_A[al]
        to_Y = in_Y[ar]
        pos_l = np.full(n, -1, dtype=np.int64)
        pos_l[left] = np.arange(left.size)
        pos_r = np.full(n, -1, dtype=np.int64)
        pos_r[right] = np.arange(right.size)

        # A-side: arcs A -> Z are saturated and become fixed flow
        a_to_z = from_A & ~to_Y
        extra = np.bincount(pos_l[al[a_to_z]], minlength=left.size)
        c_A = (c + extra)[reach_l]
        kappa_Y = kappa[reach_r]
        keep_A = from_A & to_Y
        T_A = int(kappa_Y.sum())

        # B-side: Z loses the capacity consumed by A
        used = np.bincount(pos_r[ar[a_to_z]], minlength=right.size)
        kappa_Z = (kappa - used)[~reach_r]
        keep_B = ~from_A & ~to_Y
        T_B = T - T_A - int(a_to_z.sum())

        stack.append((B, c[~reach_l], Z, kappa_Z, al[keep_B], ar[keep_B], T_B))
        stack.append((A, c_A, Y, kappa_Y, al[keep_A], ar[keep_A], T_A))

    return LevelSolution(levels, flows, nfixed)


def _block_flow(left, right, al, ar, src_caps, sink_caps, unit):
    """Max flow on one block. Returns (value, left reachable, right reachable)."""
    k, r = left.size, right.size
    s, t = k + r, k + r + 1
    lookup_l = {int(u): i for i, u in enumerate(left.tolist())}
    lookup_r = {int(v): i for i, v in enumerate(right.tolist())}
    li = np.fromiter((lookup_l[u] for u in al.tolist()), dtype=np.int64, count=al.size)
    ri = np.fromiter((lookup_r[v] for v in ar.tolist()), dtype=np.int64, count=ar.size)
    tails = np.concatenate([np.full(k, s), k + np.arange(r), li])
    heads = np.concatenate([np.arange(k), np.full(r, t), k + ri])
    caps = np.concatenate([
        np.asarray(src_caps, dtype=np.int64),
        np.asarray(sink_caps, dtype=np.int64),
        np.full(al.size, unit, dtype=np.int64),
    ])
    value, _, reach = max_flow(k + r + 2, tails, heads, caps, s, t)
    return value, reach[:k], reach[k : k + r]

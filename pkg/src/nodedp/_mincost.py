"""Successive shortest paths for min-cost flow with free flow value, in numba."""

import heapq

import numpy as np
from numba import njit

from ._maxflow import _build


@njit(cache=True, nogil=True)
def _layered_potentials(num_nodes, start, to, res, cost, s, order):
    # Bellman-Ford style sweep in a topological order of the original DAG
    inf = np.inf
    pot = np.full(num_nodes, inf)
    pot[s] = 0.0
    for u in order:
        if pot[u] == inf:
            continue
        for e in range(start[u], start[u + 1]):
            if res[e] > 0 and pot[u] + cost[e] < pot[to[e]]:
                pot[to[e]] = pot[u] + cost[e]
    for i in range(num_nodes):
        if pot[i] == inf:
            pot[i] = 0.0
    return pot


@njit(cache=True, nogil=True)
def _admissible(e, u, to, res, cost, pot, eps):
    return res[e] > 0 and cost[e] + pot[u] - pot[to[e]] <= eps


@njit(cache=True, nogil=True)
def _augment_admissible(num_nodes, start, to, res, rev, cost, pot, s, t, eps):
    # Dinic restricted to arcs of zero reduced cost
    level = np.empty(num_nodes, dtype=np.int64)
    queue = np.empty(num_nodes, dtype=np.int64)
    it = np.empty(num_nodes, dtype=np.int64)
    path = np.empty(num_nodes, dtype=np.int64)
    while True:
        level[:] = -1
        level[s] = 0
        head, tail = 0, 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(start[u], start[u + 1]):
                if level[to[e]] < 0 and _admissible(e, u, to, res, cost, pot, eps):
                    level[to[e]] = level[u] + 1
                    queue[tail] = to[e]
                    tail += 1
        if level[t] < 0:
            return
        for i in range(num_nodes):
            it[i] = start[i]
        depth = 0
        u = s
        while True:
            if u == t:
                push = res[path[0]]
                for k in range(1, depth):
                    if res[path[k]] < push:
                        push = res[path[k]]
                cut = depth
                for k in range(depth):
                    e = path[k]
                    res[e] -= push
                    res[rev[e]] += push
                    if res[e] == 0 and cut == depth:
                        cut = k
                depth = cut
                u = s if cut == 0 else to[path[cut - 1]]
                continue
            advanced = False
            while it[u] < start[u + 1]:
                e = it[u]
                v = to[e]
                if level[v] == level[u] + 1 and _admissible(e, u, to, res, cost, pot, eps):
                    path[depth] = e
                    depth += 1
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if advanced:
                continue
            level[u] = -1
            if depth == 0:
                break
            depth -= 1
            u = to[rev[path[depth]]]
            it[u] += 1


@njit(cache=True, nogil=True)
def _ssp(num_nodes, start, to, res, rev, cost, s, t, pot):
    inf = np.inf
    dist = np.empty(num_nodes)
    done = np.empty(num_nodes, dtype=np.bool_)
    scale = 1.0
    for e in range(cost.shape[0]):
        if abs(cost[e]) > scale:
            scale = abs(cost[e])
    eps = 1e-12 * scale * num_nodes
    while True:
        dist[:] = inf
        done[:] = False
        dist[s] = 0.0
        heap = [(0.0, s)]
        while len(heap) > 0:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for e in range(start[u], start[u + 1]):
                if res[e] <= 0:
                    continue
                v = to[e]
                rc = cost[e] + pot[u] - pot[v]
                if rc < 0.0:
                    rc = 0.0
                nd = d + rc
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        if dist[t] == inf or dist[t] + pot[t] - pot[s] >= -eps:
            break
        dt = dist[t]
        for u in range(num_nodes):
            pot[u] += dist[u] if dist[u] < dt else dt
        # every admissible s-t path now has the same negative cost
        _augment_admissible(num_nodes, start, to, res, rev, cost, pot, s, t, eps)


@njit(cache=True, nogil=True)
def _solve(num_nodes, tails, heads, caps, arc_cost, s, t, order):
    start, to, res, rev, fwd_pos = _build(num_nodes, tails, heads, caps)
    cost = np.zeros(to.shape[0])
    for i in range(tails.shape[0]):
        cost[fwd_pos[i]] = arc_cost[i]
        cost[rev[fwd_pos[i]]] = -arc_cost[i]
    pot = _layered_potentials(num_nodes, start, to, res, cost, s, order)
    _ssp(num_nodes, start, to, res, rev, cost, s, t, pot)
    flow = np.empty(tails.shape[0], dtype=np.int64)
    for i in range(tails.shape[0]):
        flow[i] = caps[i] - res[fwd_pos[i]]
    return flow


def min_cost_flow(num_nodes, tails, heads, caps, costs, source, sink, order):
    """Integral flow of any value minimising ``sum(costs * flow)``.

    The network must be acyclic; ``order`` is a topological order of its
    nodes, used to seed the node potentials.
    """
    return _solve(
        int(num_nodes),
        np.ascontiguousarray(tails, dtype=np.int64),
        np.ascontiguousarray(heads, dtype=np.int64),
        np.ascontiguousarray(caps, dtype=np.int64),
        np.ascontiguousarray(costs, dtype=np.float64),
        int(source),
        int(sink),
        np.ascontiguousarray(order, dtype=np.int64),
    )

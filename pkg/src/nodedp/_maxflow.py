"""Dinic max-flow on int64 capacities, compiled with numba.

The flow graph solvers scale capacities by rational denominators, which
quickly overflows the int32 kernel shipped with scipy, so we keep our own.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _build(num_nodes, tails, heads, caps):
    m = tails.shape[0]
    deg = np.zeros(num_nodes + 1, dtype=np.int64)
    for i in range(m):
        deg[tails[i] + 1] += 1
        deg[heads[i] + 1] += 1
    start = np.cumsum(deg)
    fill = start[:-1].copy()
    to = np.empty(2 * m, dtype=np.int64)
    res = np.empty(2 * m, dtype=np.int64)
    rev = np.empty(2 * m, dtype=np.int64)
    fwd_pos = np.empty(m, dtype=np.int64)
    for i in range(m):
        a = fill[tails[i]]
        fill[tails[i]] += 1
        b = fill[heads[i]]
        fill[heads[i]] += 1
        to[a] = heads[i]
        res[a] = caps[i]
        to[b] = tails[i]
        res[b] = 0
        rev[a] = b
        rev[b] = a
        fwd_pos[i] = a
    return start, to, res, rev, fwd_pos


@njit(cache=True, nogil=True)
def _bfs_levels(num_nodes, start, to, res, s, t, level, queue):
    for i in range(num_nodes):
        level[i] = -1
    level[s] = 0
    head = 0
    tail = 1
    queue[0] = s
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(start[u], start[u + 1]):
            if res[e] > 0 and level[to[e]] < 0:
                level[to[e]] = level[u] + 1
                queue[tail] = to[e]
                tail += 1
    return level[t] >= 0


@njit(cache=True, nogil=True)
def _dinic(num_nodes, start, to, res, rev, s, t):
    level = np.empty(num_nodes, dtype=np.int64)
    queue = np.empty(num_nodes, dtype=np.int64)
    it = np.empty(num_nodes, dtype=np.int64)
    path = np.empty(num_nodes, dtype=np.int64)
    total = 0
    while _bfs_levels(num_nodes, start, to, res, s, t, level, queue):
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
                total += push
                # resume from the tail of the first saturated arc
                depth = cut
                u = s if cut == 0 else to[path[cut - 1]]
                continue
            advanced = False
            while it[u] < start[u + 1]:
                e = it[u]
                v = to[e]
                if res[e] > 0 and level[v] == level[u] + 1:
                    path[depth] = e
                    depth += 1
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if advanced:
                continue
            # dead end: prune u from the level graph and retreat
            level[u] = -1
            if depth == 0:
                break
            depth -= 1
            e = path[depth]
            u = to[rev[e]]
            it[u] += 1
    return total


@njit(cache=True, nogil=True)
def _source_side(num_nodes, start, to, res, s):
    seen = np.zeros(num_nodes, dtype=np.bool_)
    stack = np.empty(num_nodes, dtype=np.int64)
    seen[s] = True
    stack[0] = s
    top = 1
    while top > 0:
        top -= 1
        u = stack[top]
        for e in range(start[u], start[u + 1]):
            if res[e] > 0 and not seen[to[e]]:
                seen[to[e]] = True
                stack[top] = to[e]
                top += 1
    return seen


@njit(cache=True, nogil=True)
def _solve(num_nodes, tails, heads, caps, s, t):
    start, to, res, rev, fwd_pos = _build(num_nodes, tails, heads, caps)
    value = _dinic(num_nodes, start, to, res, rev, s, t)
    flow = np.empty(tails.shape[0], dtype=np.int64)
    for i in range(tails.shape[0]):
        flow[i] = caps[i] - res[fwd_pos[i]]
    reach = _source_side(num_nodes, start, to, res, s)
    return value, flow, reach


def max_flow(num_nodes, tails, heads, caps, source, sink):
    """Maximum ``source``-``sink`` flow on a network with integer capacities.

    Returns ``(value, arc_flows, source_side)`` where ``source_side`` is the
    set of nodes reachable from the source in the final residual graph, i.e.
    the source side of the minimal minimum cut.
    """
    tails = np.ascontiguousarray(tails, dtype=np.int64)
    heads = np.ascontiguousarray(heads, dtype=np.int64)
    caps = np.ascontiguousarray(caps, dtype=np.int64)
    if np.any(caps < 0):
        raise ValueError("capacities must be nonnegative")
    value, flow, reach = _solve(int(num_nodes), tails, heads, caps, int(source), int(sink))
    return int(value), flow, reach

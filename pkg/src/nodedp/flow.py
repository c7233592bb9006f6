"""Flow graph of a graph, the convex objective Phi, and the degree-list extension.

Arc layout of ``FG(G)`` with ``n`` nodes and edges ``e = (u, v)``, ``u < v``:

* arcs ``0..n-1``: source ``s -> v_l`` (capacity ``D``)
* arcs ``n..2n-1``: ``v_r -> t`` (capacity ``D``)
* arc ``2n + 2e``: ``u_l -> v_r`` and arc ``2n + 2e + 1``: ``v_l -> u_r`` (capacity 1)

Node ids: left copy of ``v`` is ``v``, right copy is ``n + v``, source ``2n``,
sink ``2n + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from ._maxflow import max_flow
from ._mincost import min_cost_flow
from .graph import Graph
from .parametric import solve_levels


class SolverError(RuntimeError):
    """Raised when a solver fails to certify its answer.

    The best report seen so far is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InfeasibleFlowError(ValueError):
    """A flow violates a capacity or conservation constraint."""


@dataclass(frozen=True)
class FlowNetwork:
    """The directed capacitated network ``FG(G)`` at threshold ``D``."""

    graph: Graph
    D: int
    tails: np.ndarray
    heads: np.ndarray
    caps: np.ndarray

    @property
    def n(self) -> int:
        return self.graph.node_count

    @property
    def source(self) -> int:
        return 2 * self.n

    @property
    def sink(self) -> int:
        return 2 * self.n + 1

    @property
    def num_nodes(self) -> int:
        return 2 * self.n + 2

    @property
    def num_arcs(self) -> int:
        return self.tails.shape[0]

    def mirror(self) -> np.ndarray:
        """Arc permutation realising the source/sink, left/right swap."""
        n, m = self.n, self.graph.edge_count
        perm = np.empty(self.num_arcs, dtype=np.int64)
        perm[:n] = np.arange(n, 2 * n)
        perm[n : 2 * n] = np.arange(n)
        mid = 2 * n + 2 * np.arange(m)
        perm[mid] = mid + 1
        perm[mid + 1] = mid
        return perm


@dataclass
class FlowAssignment:
    """Flow value on every arc of a :class:`FlowNetwork`."""

    flow: np.ndarray

    def boundary_out(self, net: FlowNetwork) -> np.ndarray:
        return self.flow[: net.n].copy()

    def boundary_in(self, net: FlowNetwork) -> np.ndarray:
        return self.flow[net.n : 2 * net.n].copy()


@dataclass
class SolveReport:
    """Result of a Phi minimisation.

    Attributes
    ----------
    boundary_out, boundary_in : ndarray
        Source-arc and sink-arc flows, indexed by node.
    phi_value : float
    fw_gap : float
        Frank-Wolfe duality gap, an upper bound on ``phi_value - min Phi``.
    iterations : int
    flow : FlowAssignment
    method : str
    """

    boundary_out: np.ndarray
    boundary_in: np.ndarray
    phi_value: float
    fw_gap: float
    iterations: int
    flow: FlowAssignment
    method: str = "frank-wolfe"
    levels: list | None = field(default=None, repr=False)


def build_flow_network(g: Graph, D: int) -> FlowNetwork:
    """Construct ``FG(G)`` with threshold ``D``."""
    if int(D) != D or D < 1:
        raise ValueError(f"threshold must be a positive integer, got {D!r}")
    D = int(D)
    n = g.node_count
    e = g.edges
    m = e.shape[0]
    tails = np.empty(2 * n + 2 * m, dtype=np.int64)
    heads = np.empty_like(tails)
    tails[:n] = 2 * n
    heads[:n] = np.arange(n)
    tails[n : 2 * n] = n + np.arange(n)
    heads[n : 2 * n] = 2 * n + 1
    tails[2 * n :: 2] = e[:, 0]
    heads[2 * n :: 2] = n + e[:, 1]
    tails[2 * n + 1 :: 2] = e[:, 1]
    heads[2 * n + 1 :: 2] = n + e[:, 0]
    caps = np.ones(tails.shape[0], dtype=np.int64)
    caps[: 2 * n] = D
    for a in (tails, heads, caps):
        a.setflags(write=False)
    return FlowNetwork(g, D, tails, heads, caps)


def check_feasible(net: FlowNetwork, f, atol: float = 1e-9) -> None:
    """Raise :class:`InfeasibleFlowError` naming the first violated constraint."""
    x = _as_array(net, f)
    low = np.flatnonzero(x < -atol)
    high = np.flatnonzero(x > net.caps + atol)
    if low.size or high.size:
        a = int(min(low.min(initial=x.size), high.min(initial=x.size)))
        raise InfeasibleFlowError(
            f"arc {a} ({net.tails[a]}->{net.heads[a]}) carries {x[a]!r}, "
            f"outside [0, {net.caps[a]}]"
        )
    excess = np.bincount(net.heads, weights=x, minlength=net.num_nodes)
    excess -= np.bincount(net.tails, weights=x, minlength=net.num_nodes)
    inner = np.abs(excess[: 2 * net.n])
    bad = np.flatnonzero(inner > atol)
    if bad.size:
        v = int(bad[0])
        side = "left" if v < net.n else "right"
        raise InfeasibleFlowError(
            f"conservation violated at {side} copy of node {v % max(net.n, 1)}: "
            f"net inflow {excess[v]!r}"
        )


def phi(net: FlowNetwork, f, check: bool = True) -> float:
    """Squared distance of the boundary flows to the all-``D`` vector."""
    x = _as_array(net, f)
    if check:
        check_feasible(net, x)
    r = net.D - x[: 2 * net.n]
    return float(r @ r)


def _as_array(net, f) -> np.ndarray:
    x = f.flow if isinstance(f, FlowAssignment) else f
    x = np.asarray(x, dtype=float)
    if x.shape != (net.num_arcs,):
        raise ValueError(f"expected {net.num_arcs} arc flows, got shape {x.shape}")
    return x


def symmetrize(net: FlowNetwork, f) -> FlowAssignment:
    """Average a flow with its mirror image."""
    x = _as_array(net, f)
    return FlowAssignment(0.5 * (x + x[net.mirror()]))


def max_flow_value(net: FlowNetwork) -> int:
    """Maximum s-t flow value computed with scipy's augmenting-path solver."""
    if net.num_arcs == 0:
        return 0
    A = csr_matrix(
        (np.asarray(net.caps, dtype=np.int32), (net.tails, net.heads)),
        shape=(net.num_nodes, net.num_nodes),
    )
    return int(maximum_flow(A, net.source, net.sink, method="edmonds_karp").flow_value)


# -- linear minimisation oracle ---------------------------------------------


def min_cost_flow_lmo(net: FlowNetwork, costs) -> FlowAssignment:
    """Flow minimising a linear cost placed on the boundary arcs.

    Successive shortest paths with node potentials. Capacities are integral,
    so every augmentation is integral and the result is a vertex of the flow
    polytope.

    Parameters
    ----------
    costs : array_like
        Either ``2n`` boundary costs (source arcs then sink arcs) or one cost
        per arc with zeros on the middle arcs.
    """
    n = net.n
    c = np.zeros(net.num_arcs)
    costs = np.asarray(costs, dtype=float)
    if costs.shape == (2 * n,):
        c[: 2 * n] = costs
    elif costs.shape == (net.num_arcs,):
        if np.any(costs[2 * n :] != 0):
            raise ValueError("middle arcs must have zero cost")
        c[:] = costs
    else:
        raise ValueError("costs must cover the boundary arcs")
    if not np.all(np.isfinite(c)):
        raise ValueError("costs must be finite")
    # s, then the left layer, the right layer, and t
    order = np.concatenate([[net.source], np.arange(2 * n), [net.sink]])
    flow = min_cost_flow(net.num_nodes, net.tails, net.heads, net.caps, c, net.source, net.sink, order)
    return FlowAssignment(flow.astype(float))


def _gradient(net, x):
    g = np.zeros(net.num_arcs)
    g[: 2 * net.n] = -2.0 * (net.D - x[: 2 * net.n])
    return g


def fw_gap(net: FlowNetwork, f) -> float:
    """Frank-Wolfe gap ``<grad Phi(f), f - s>`` with ``s`` the LMO vertex."""
    x = _as_array(net, f)
    g = _gradient(net, x)
    s = min_cost_flow_lmo(net, g).flow
    return max(float(g @ (x - s)), 0.0)


# -- solvers -----------------------------------------------------------------


def default_tol(n: int, D: int) -> float:
    """Default tolerance on the Frank-Wolfe gap."""
    return 1e-6 * max(n, 1) * D


def solve_phi_optimal(
    net: FlowNetwork,
    tol: float | None = None,
    *,
    method: str = "frank-wolfe",
    max_iter: int = 1_000_000,
    symmetrize_every: int = 25,
    seed: int | None = None,
    certificate: bool = True,
) -> SolveReport:
    """Minimise Phi over the flow polytope of ``net``.

    Parameters
    ----------
    tol : float, optional
        Accuracy target, defaults to ``1e-6 * n * D``. Frank-Wolfe stops once
        the gap is below ``min(tol, tol**2)``, which bounds both the Phi
        suboptimality and the l2 error of the boundary flows by ``tol``.
    method : {"frank-wolfe", "exact"}
        ``"frank-wolfe"`` runs the away-step conditional gradient method.
        ``"exact"`` computes the optimal boundary as exact rationals with a
        sequence of parametric max flows and then recovers a full flow.
    seed : int, optional
        Shuffles the arc order of the initial max flow (frank-wolfe only),
        giving an independent starting point.
    certificate : bool
        For ``"exact"``, whether to evaluate the gap with one LMO call.
    """
    if tol is None:
        tol = default_tol(net.n, net.D)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method == "exact":
        return _solve_exact(net, certificate)
    if method != "frank-wolfe":
        raise ValueError(f"unknown method {method!r}")
    return _solve_fw(net, tol, max_iter, symmetrize_every, seed)


def _solve_exact(net, certificate):
    sol = solve_levels(net.graph, net.D)
    levels = sol.levels
    n = net.n
    scale = 1
    for x in levels:
        scale = math.lcm(scale, x.denominator)
    if scale * max(net.D, 1) * max(n, 1) > 2**62:
        raise SolverError("level denominators too large for an exact flow")
    # a flow with both boundaries equal to the levels exists by symmetry
    caps = np.asarray(net.caps, dtype=np.int64) * scale
    want = np.array([int(x * scale) for x in levels], dtype=np.int64)
    caps[:n] = want
    caps[n : 2 * n] = want
    value, arc_flow, _ = max_flow(net.num_nodes, net.tails, net.heads, caps, net.source, net.sink)
    if value != int(want.sum()):
        raise SolverError("optimal boundary could not be routed")
    x = arc_flow / scale
    flow = FlowAssignment(x)
    gap = fw_gap(net, x) if certificate else float("nan")
    out = np.array([float(v) for v in levels])
    return SolveReport(out, out.copy(), phi(net, x, check=False), gap, sol.max_flows, flow, "exact", levels)


def _initial_flow(net, seed):
    order = np.arange(net.num_arcs)
    if seed is not None:
        order = np.random.default_rng(seed).permutation(net.num_arcs)
    _, arc_flow, _ = max_flow(
        net.num_nodes, net.tails[order], net.heads[order], net.caps[order], net.source, net.sink
    )
    x = np.empty(net.num_arcs)
    x[order] = arc_flow
    return x


class _ActiveSet:
    """Convex combination of flow-polytope vertices, stored row-wise."""

    def __init__(self, num_arcs):
        self.keys = {}
        self.atoms = np.empty((8, num_arcs))
        self.weights = np.zeros(8)
        self.size = 0

    def add(self, v, weight):
        key = v.astype(np.int64).tobytes()
        i = self.keys.get(key)
        if i is None:
            if self.size == self.atoms.shape[0]:
                self.atoms = np.vstack([self.atoms, np.empty_like(self.atoms)])
                self.weights = np.concatenate([self.weights, np.zeros_like(self.weights)])
            i = self.size
            self.size += 1
            self.keys[key] = i
            self.atoms[i] = v
            self.weights[i] = 0.0
        self.weights[i] += weight

    def rebuilt(self, perm=None):
        """Copy without zero-weight atoms, optionally averaged with mirror images."""
        out = _ActiveSet(self.atoms.shape[1])
        for v, w in zip(self.atoms[: self.size], self.weights[: self.size]):
            if w <= 0.0:
                continue
            if perm is None:
                out.add(v, w)
            else:
                out.add(v, 0.5 * w)
                out.add(v[perm], 0.5 * w)
        return out

    def point(self):
        k = self.size
        return self.weights[:k] @ self.atoms[:k]


def _solve_fw(net, tol, max_iter, symmetrize_every, seed):
    n = net.n
    D = net.D
    perm = net.mirror()
    if net.graph.edge_count == 0:
        x = np.zeros(net.num_arcs)
        return _report(net, x, 0.0, 0)

    # Phi is 1-strongly convex in the boundary, so a gap of tol**2 pins the
    # boundary to within tol of the optimum in l2, not just sqrt(tol)
    target = min(tol, tol * tol)
    f0 = _initial_flow(net, seed)
    active = _ActiveSet(net.num_arcs)
    active.add(f0, 0.5)
    active.add(f0[perm], 0.5)
    x = active.point()
    best = None
    gap = math.inf

    for it in range(1, max_iter + 1):
        grad = _gradient(net, x)
        s = min_cost_flow_lmo(net, grad).flow
        gap = max(float(grad @ (x - s)), 0.0)
        if best is None or gap < best[1]:
            best = (x.copy(), gap, it)
        if gap <= target:
            break

        # away atom: the active vertex with the largest gradient product
        k = active.size
        scores = active.atoms[:k, : 2 * n] @ grad[: 2 * n]
        scores[active.weights[:k] <= 0.0] = -np.inf
        iv = int(np.argmax(scores))
        alpha_v = active.weights[iv]
        away_gap = float(scores[iv] - grad @ x)
        fw_step = gap >= away_gap or alpha_v >= 1.0
        if fw_step:
            d = s - x
            gmax = 1.0
        else:
            d = x - active.atoms[iv]
            gmax = alpha_v / (1.0 - alpha_v)

        db = d[: 2 * n]
        denom = float(db @ db)
        if denom <= 0.0:
            break
        gamma = min(max(float((D - x[: 2 * n]) @ db) / denom, 0.0), gmax)

        if fw_step:
            active.weights[: active.size] *= 1.0 - gamma
            active.add(s, gamma)
        else:
            active.weights[: active.size] *= 1.0 + gamma
            active.weights[iv] = 0.0 if gamma >= gmax else active.weights[iv] - gamma
        x = x + gamma * d

        if symmetrize_every and it % symmetrize_every == 0:
            active = active.rebuilt(perm)
            x = active.point()
        elif it % 100 == 0:
            active = active.rebuilt()
    else:
        xb, gb, itb = best
        report = _report(net, xb, gb, itb)
        raise SolverError(f"Frank-Wolfe gap {gb:.3g} above tol {tol:.3g} after {max_iter} iterations", report)

    return _report(net, x, gap, it)


def _report(net, x, gap, iterations):
    n = net.n
    if net.graph.max_degree <= net.D:
        # bounded graphs have an integral optimum; remove solver dust
        x = x.copy()
        near = np.abs(x - np.rint(x)) <= max(gap, 1e-9)
        x[near] = np.rint(x[near])
    return SolveReport(
        boundary_out=x[:n].copy(),
        boundary_in=x[n : 2 * n].copy(),
        phi_value=phi(net, x, check=False),
        fw_gap=gap,
        iterations=iterations,
        flow=FlowAssignment(x),
    )


def degree_list_extension(g: Graph, D: int, tol: float | None = None, method: str = "exact") -> np.ndarray:
    """Lipschitz extension of the sorted degree list at threshold ``D``.

    Returns the source-arc flows of the Phi-optimal flow, sorted in
    non-increasing order. On graphs with maximum degree at most ``D`` this is
    exactly the degree list.
    """
    if int(D) != D or D < 1:
        raise ValueError(f"threshold must be a positive integer, got {D!r}")
    if method == "exact":
        vals = solve_levels(g, int(D)).as_float()
    else:
        rep = solve_phi_optimal(build_flow_network(g, D), tol, method=method)
        vals = rep.boundary_out
        if g.max_degree <= D:
            vals = np.rint(vals)
    return np.sort(vals)[::-1].copy()


def extension_levels(g: Graph, D: int) -> list:
    """Exact rational Phi-optimal source flows, one per node."""
    return solve_levels(g, int(D)).levels


__all__ = [
    "FlowAssignment",
    "FlowNetwork",
    "InfeasibleFlowError",
    "SolveReport",
    "SolverError",
    "build_flow_network",
    "check_feasible",
    "default_tol",
    "degree_list_extension",
    "extension_levels",
    "fw_gap",
    "max_flow_value",
    "min_cost_flow_lmo",
    "phi",
    "solve_phi_optimal",
    "symmetrize",
]

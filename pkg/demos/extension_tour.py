"""
Extending the degree list past a degree threshold
=================================================

A star with many leaves has one node far above any small threshold D. The
extension keeps the list within the flow polytope: the center keeps D and
the remaining mass is spread evenly over the leaves.
"""

import numpy as np

from nodedp import Graph, degree_list, tail_excess
from nodedp.flow import build_flow_network, degree_list_extension, solve_phi_optimal
from nodedp.histogram import degree_histogram_extension
from nodedp.graph import generate, padded_l1

star = generate("star", 5, 0)
print("degrees      ", degree_list(star))
print("extension D=2", degree_list_extension(star, 2))
print("histogram D=2", degree_histogram_extension(star, 2))

# the same boundary from the iterative solver, with its certificate
rep = solve_phi_optimal(build_flow_network(star, 2))
print("frank-wolfe  ", np.round(rep.boundary_out, 6), "gap", rep.fw_gap, "iterations", rep.iterations)

# the bias sits between the tail excess and twice it
g = generate("chung-lu", 2000, 1, alpha=2.0, avg_degree=5.0)
for D in (4, 8, 16, 32, 64):
    err = padded_l1(degree_list_extension(g, D), degree_list(g))
    print(f"D={D:3d}  tail {tail_excess(g, D):6d}  error {err:9.2f}")

# bounded graphs pass through unchanged
k3 = Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])
print("K3 at D=2    ", degree_list_extension(k3, 2))

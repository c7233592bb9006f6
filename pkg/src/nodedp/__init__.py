"""Node-differentially-private degree distributions via flow-based Lipschitz extensions."""

__version__ = "0.1.0"

from .flow import (
    FlowAssignment,
    FlowNetwork,
    InfeasibleFlowError,
    SolveReport,
    SolverError,
    build_flow_network,
    degree_list_extension,
    fw_gap,
    max_flow_value,
    min_cost_flow_lmo,
    phi,
    solve_phi_optimal,
    symmetrize,
)
from .graph import (
    DegreeDistribution,
    Graph,
    GraphError,
    ParseError,
    alpha_decay_holds,
    degree_distribution,
    degree_list,
    generate,
    padded_l1,
    parse_edge_list,
    remove_node,
    serialize_edge_list,
    tail_excess,
)
from .histogram import bracket, cdh, degree_histogram_extension, hist_from_cdh
from .mechanisms import (
    CandidateSet,
    PrivacyParams,
    RandomSource,
    compose_budget,
    exponential_mechanism_min,
    generalized_exponential_mechanism,
    laplace_mechanism,
    laplace_sample,
    normalized_scores,
)
from .release import (
    ErrorProxy,
    PrivateRelease,
    err_proxy,
    noisy_degree_histogram,
    release_degree_distribution,
    select_threshold,
)

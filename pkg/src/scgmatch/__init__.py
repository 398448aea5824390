"""Graph matching by softassign constrained gradient with an adaptive step size."""

from .graph import (
    AttributedGraph,
    DoublyStochasticMatrix,
    GraphFormatError,
    PermutationMatching,
    SolverConfig,
    feature_kernel,
    graph_from_points,
    load_graph,
    objective,
    permutation_to_matrix,
    save_graph,
)
from .operators import (
    OperatorResult,
    alternating_projection,
    dynamic_softassign,
    greedy_assign,
    hungarian,
    offset_input,
    softassign,
    spectral_normalize,
)
from .stepsize import AlphaDecision, adaptive_alpha, apply_step
from .solver import SolveResult, discretize, scg_solve, variant_solve
from .synth import (
    GenSpec,
    delete_nodes,
    noisy_pair,
    plant_permutation,
    random_geometric_graph,
    random_profit,
)
from .metrics import (
    MetricReport,
    accuracy,
    alpha_one_frequency,
    brute_force_qap,
    eigen_signature,
    error_rate,
    kron_vec_check,
    matching_error,
)

__version__ = "0.1.0"

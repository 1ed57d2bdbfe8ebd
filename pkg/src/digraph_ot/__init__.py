"""Optimal-transport distances between directed weighted graphs."""

from .errors import DigraphOtError, InputError, NumericalError
from .graphs import (
    DiGraph,
    Reachability,
    analyze_reachability,
    from_edge_list,
    read_edge_list_csv,
    read_manifest,
    regularize,
    write_edge_list_csv,
    write_manifest,
)
from .metrics import (
    ChainStatistics,
    DistanceMatrix,
    GroundedSystem,
    chain_statistics,
    grd_matrix,
    grounded_system,
    grounding_matrix,
    hitting_probability_matrix,
    htd_matrix,
    read_distance_matrix,
    stationary_distribution,
    transition_matrix,
    write_distance_matrix,
)
from .ot import GwOptions, TransportPlan, emd, gromov_wasserstein, gw_objective, normalize_marginal
from .ensemble import (
    GraphEnsemble,
    build_ensemble,
    build_line_graph,
    gw_distance,
    line_cost,
    metric_cost,
    pairwise_distances,
    wasserstein_distance,
)
from .evaluate import (
    Partition,
    ari,
    cluster,
    correlation_cost,
    correlation_sample_distances,
    frobenius_distance,
    pca_baseline,
)
from .synth import DsbmSpec, cycle_of_cycles, dsbm_ensemble, dsbm_graph, figure_flip_triple, flip_edge

__version__ = "0.1.0"

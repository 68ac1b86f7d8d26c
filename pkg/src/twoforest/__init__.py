"""Exact analytics and Monte Carlo sampling for random two-component spanning
forests of weighted finite graphs: Green-function closed forms, brute-force
enumeration oracles, Wilson-algorithm samplers, lattice asymptotics, and the
planar forest/unicycle duality.
"""

from .census import ExactCensus, enumerate_census, enumerate_unicycles, exact_statistic
from .errors import (
    BijectionViolation,
    DisconnectedGraph,
    DivergentIntegral,
    GraphInputError,
    InvalidBoundary,
    InvalidVertex,
    NonPlanarMap,
    NonpositiveConductance,
    NumericalError,
    PointOnBoundary,
    SelfLoop,
    SingularMatrix,
    TooLarge,
    TwoForestError,
    UnknownEdge,
    UnknownStatistic,
    UnsupportedFamily,
)
from .graph import (
    SpanningTree,
    TwoForest,
    WeightedGraph,
    build_graph,
    classify_subgraph,
    contract,
    parse_edge_list,
    parse_graph_json,
    pin,
)
from .green import (
    GreenOracle,
    PotentialKernel,
    factorize,
    kappa_exact,
    potential_kernel,
    tree_edge_probability,
)
from .lattice import (
    BuiltLattice,
    LatticeSpec,
    box_green_trace,
    build_lattice,
    ell_star_finite,
    ell_star_periodic,
    exit_time_constant,
    green_scaling_check,
    grid_ratio,
    hitting_time_constant,
    resistance_limit,
    square_grid,
    torus_green_trace,
    unit_cube_box,
    unit_square_green,
)
from .planar import (
    PlanarMap,
    UnicycleStatistics,
    build_dual,
    cycle_edge_probability_forms,
    dual_map,
    enclosed_faces,
    find_cycle,
    pair_enclosure_prob,
    planar_map_from_json,
    unicycle_from_forest,
    unicycle_stats,
)
from .sampling import (
    Estimate,
    SampleBatch,
    chi_square_forest_fit,
    chi_square_tree_fit,
    estimate,
    sample_batch,
    sample_spanning_tree,
    sample_two_forest,
)
from .stats import (
    ForestStatistics,
    PinnedStatistics,
    SizeMoments,
    expected_boundary,
    forest_statistics,
    pinned_mean_size,
    pinned_statistics,
    prob_conditional,
    prob_edge_separates,
    prob_in_sigma,
    prob_pair_in_sigma,
    ratio_k2_over_k,
    size_moments,
)

__version__ = "0.1.0"

"""Closed-form statistics of the random two-component spanning forest.

Everything here reduces to Green-function entries of the graph:

* the two-forest/tree count ratio is a sum of potential-kernel products over
  edges;
* single and pair inclusion probabilities for the floating component are
  (kappa/kappa2) * G entries;
* the expected conductance-weighted boundary size is (|V|-1) over the ratio;
* the size moments are (kappa/kappa2) times the trace and grand sum of G;
* conditioning on a vertex gives harmonic ratios G[u,v]/G[u,u].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidVertex
from .graph import WeightedGraph
from .green import GreenOracle, factorize, potential_kernel


def ratio_k2_over_k(graph: WeightedGraph, root: int | None = None,
                    oracle: GreenOracle | None = None,
                    weighted: bool = True) -> float:
    """Two-forest weight over tree weight, kappa2/kappa.

    Computed from the potential kernel rooted at ``root`` (any root gives the
    same value; default is the boundary). Each edge contributes
    c(e) * (A[u,v]A[v,u] + (A[u,v]-A[v,u])^2); pass ``weighted=False`` for the
    unit-conductance literal form (identical when all conductances are 1).
    """
    kern = potential_kernel(graph, root=root, oracle=oracle)
    total = 0.0
    for eid, e in enumerate(graph.edges):
        a = kern.forward[eid]
        b = kern.backward[eid]
        w = e.conductance if weighted else 1.0
        total += w * (a * b + (a - b) ** 2)
    return float(total)


def prob_in_sigma(graph: WeightedGraph, u: int,
                  oracle: GreenOracle | None = None,
                  ratio: float | None = None) -> float:
    """Probability that vertex u lies in the floating component."""
    u = graph.check_vertex(u)
    if u == graph.boundary:
        raise InvalidVertex("the boundary vertex is never in the floating component")
    oracle = oracle or factorize(graph)
    ratio = ratio if ratio is not None else ratio_k2_over_k(graph, oracle=oracle)
    return oracle.green(u, u) / ratio


def prob_pair_in_sigma(graph: WeightedGraph, u: int, v: int,
                       oracle: GreenOracle | None = None,
                       ratio: float | None = None) -> float:
    """Probability that vertices u and v both lie in the floating component.

    Reduces to prob_in_sigma on the diagonal u == v.
    """
    u = graph.check_vertex(u)
    v = graph.check_vertex(v)
    if graph.boundary in (u, v):
        raise InvalidVertex("the boundary vertex is never in the floating component")
    oracle = oracle or factorize(graph)
    ratio = ratio if ratio is not None else ratio_k2_over_k(graph, oracle=oracle)
    return oracle.green(u, v) / ratio


def prob_conditional(graph: WeightedGraph, v: int, u: int,
                     oracle: GreenOracle | None = None) -> float:
    """P(v in floating component | u in floating component) = G[u,v]/G[u,u].

    Harmonic in v away from {u, boundary}; 1 at v=u, 0 at v=boundary.
    """
    u = graph.check_vertex(u)
    v = graph.check_vertex(v)
    if u == graph.boundary:
        raise InvalidVertex("cannot condition on the boundary vertex")
    oracle = oracle or factorize(graph)
    guu = oracle.green(u, u)
    assert guu > 0.0  # u != b and connectivity force this
    return oracle.green(u, v) / guu


def prob_edge_separates(graph: WeightedGraph, edge_id: int,
                        oracle: GreenOracle | None = None,
                        ratio: float | None = None) -> float:
    """Probability the edge has exactly one endpoint in the floating component."""
    edge_id = graph.check_edge(edge_id)
    oracle = oracle or factorize(graph)
    ratio = ratio if ratio is not None else ratio_k2_over_k(graph, oracle=oracle)
    t = oracle.transfer_current(edge_id, edge_id)
    return t / (graph.conductance(edge_id) * ratio)


def expected_boundary(graph: WeightedGraph,
                      oracle: GreenOracle | None = None,
                      ratio: float | None = None) -> float:
    """Expected conductance-weighted size of the floating component's boundary,
    (|V|-1) / (kappa2/kappa)."""
    if ratio is None:
        ratio = ratio_k2_over_k(graph, oracle=oracle)
    return (graph.vertex_count - 1) / ratio


@dataclass(frozen=True)
class SizeMoments:
    mean: float
    second_moment: float
    mean_resistance: float  # trace of G over |V|
    hitting_sum: float      # grand sum of G over |V|


def size_moments(graph: WeightedGraph,
                 oracle: GreenOracle | None = None,
                 ratio: float | None = None) -> SizeMoments:
    """First two moments of the floating component size, with the factored
    ingredients (mean Green diagonal and normalized grand sum) reported too.

    mean = (kappa/kappa2) * tr G and second = (kappa/kappa2) * sum G, which
    also factor as ell* |V|/(|V|-1) * R and ell* |V|/(|V|-1) * hitting_sum.
    """
    oracle = oracle or factorize(graph)
    ratio = ratio if ratio is not None else ratio_k2_over_k(graph, oracle=oracle)
    G = oracle.matrix()
    n = graph.vertex_count
    trace = float(np.trace(G))
    total = float(G.sum())
    return SizeMoments(
        mean=trace / ratio,
        second_moment=total / ratio,
        mean_resistance=trace / n,
        hitting_sum=total / n,
    )


def pinned_mean_size(graph: WeightedGraph, z0: int,
                     oracle: GreenOracle | None = None) -> float:
    """Expected floating-component size conditioned on containing z0:
    sum_v G[v, z0] / G[z0, z0]. Always >= 1."""
    z0 = graph.check_vertex(z0)
    if z0 == graph.boundary:
        raise InvalidVertex("cannot pin the floating component to the boundary")
    oracle = oracle or factorize(graph)
    col = oracle.column(z0)
    return float(col.sum() / col[z0])


@dataclass(frozen=True)
class ForestStatistics:
    """All scalar two-forest statistics of one graph."""
    ratio_k2_k: float
    log_kappa: float
    ell_star: float
    mean_size: float
    second_moment: float
    mean_resistance: float
    hitting_sum: float

    def __post_init__(self):
        assert self.ratio_k2_k > 0.0
        assert self.mean_size ** 2 <= self.second_moment * (1 + 1e-12)


def forest_statistics(graph: WeightedGraph,
                      oracle: GreenOracle | None = None,
                      weighted: bool = True) -> ForestStatistics:
    """One-pass computation of every scalar statistic."""
    oracle = oracle or factorize(graph)
    ratio = ratio_k2_over_k(graph, oracle=oracle, weighted=weighted)
    mom = size_moments(graph, oracle=oracle, ratio=ratio)
    return ForestStatistics(
        ratio_k2_k=ratio,
        log_kappa=oracle.log_kappa,
        ell_star=expected_boundary(graph, ratio=ratio),
        mean_size=mom.mean,
        second_moment=mom.second_moment,
        mean_resistance=mom.mean_resistance,
        hitting_sum=mom.hitting_sum,
    )


@dataclass(frozen=True)
class PinnedStatistics:
    pin_vertex: int
    conditional_mean_size: float

    def __post_init__(self):
        assert self.conditional_mean_size >= 1.0 - 1e-12


def pinned_statistics(graph: WeightedGraph, z0: int,
                      oracle: GreenOracle | None = None) -> PinnedStatistics:
    return PinnedStatistics(z0, pinned_mean_size(graph, z0, oracle=oracle))

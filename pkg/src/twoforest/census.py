"""Brute-force ground truth: enumerate every spanning tree and two-component
spanning forest of a small graph and evaluate statistics by direct summation.

Weights are exact rationals (float conductances are binary rationals, so
Fraction arithmetic is exact). Enumeration walks lexicographic edge-id
combinations with a union-find cycle check; capped at 24 edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import TooLarge, UnknownStatistic
from .graph import SpanningTree, TwoForest, WeightedGraph, _UnionFind

MAX_EDGES = 24


@dataclass(frozen=True)
class ExactCensus:
    """Complete list of spanning trees and 2-component forests with exact weights."""
    graph: WeightedGraph
    trees: tuple[SpanningTree, ...]
    tree_weights: tuple[Fraction, ...]
    forests: tuple[TwoForest, ...]
    forest_weights: tuple[Fraction, ...]

    @property
    def kappa(self) -> Fraction:
        return sum(self.tree_weights, Fraction(0))

    @property
    def kappa2(self) -> Fraction:
        return sum(self.forest_weights, Fraction(0))

    @property
    def ratio(self) -> Fraction:
        return self.kappa2 / self.kappa

    def forest_probabilities(self) -> tuple[Fraction, ...]:
        k2 = self.kappa2
        return tuple(w / k2 for w in self.forest_weights)

    def tree_probabilities(self) -> tuple[Fraction, ...]:
        k = self.kappa
        return tuple(w / k for w in self.tree_weights)


def enumerate_census(graph: WeightedGraph) -> ExactCensus:
    """Enumerate all spanning trees and two-forests. Raises TooLarge past the
    24-edge cap."""
    m = graph.edge_count
    if m > MAX_EDGES:
        raise TooLarge(f"{m} edges exceeds the enumeration cap of {MAX_EDGES}")
    n = graph.vertex_count
    weights = [Fraction(e.conductance) for e in graph.edges]
    endpoints = [graph.endpoints(e) for e in range(m)]

    trees: list[SpanningTree] = []
    tree_weights: list[Fraction] = []
    forests: list[TwoForest] = []
    forest_weights: list[Fraction] = []

    def scan(size: int, sink):
        for combo in combinations(range(m), size):
            uf = _UnionFind(n)
            ok = True
            for eid in combo:
                a, b = endpoints[eid]
                if not uf.union(a, b):
                    ok = False
                    break
            if ok:
                sink(combo, uf)

    def add_tree(combo, uf):
        w = Fraction(1)
        for eid in combo:
            w *= weights[eid]
        trees.append(SpanningTree(frozenset(combo)))
        tree_weights.append(w)

    def add_forest(combo, uf):
        w = Fraction(1)
        for eid in combo:
            w *= weights[eid]
        broot = uf.find(graph.boundary)
        floating = frozenset(v for v in range(n) if uf.find(v) != broot)
        boundary_edges = frozenset(
            eid for eid, (a, b) in enumerate(endpoints)
            if (a in floating) != (b in floating))
        forests.append(TwoForest(frozenset(combo), floating, boundary_edges))
        forest_weights.append(w)

    if n >= 2:
        scan(n - 1, add_tree)
        scan(n - 2, add_forest)
    return ExactCensus(graph, tuple(trees), tuple(tree_weights),
                       tuple(forests), tuple(forest_weights))


STATISTICS = ("prob_in_sigma", "prob_pair", "prob_edge_separates",
              "expected_boundary", "mean_size", "second_moment",
              "pinned_mean", "ratio")


def exact_statistic(census: ExactCensus, statistic: str, *args) -> Fraction:
    """Exact value of a named statistic by summation over the census.

    prob_in_sigma(u); prob_pair(u, v); prob_edge_separates(e);
    expected_boundary(); mean_size(); second_moment(); pinned_mean(z0);
    ratio().
    """
    g = census.graph
    k2 = census.kappa2
    fw = census.forest_weights
    fs = census.forests

    if statistic == "ratio":
        return census.ratio
    if statistic == "prob_in_sigma":
        (u,) = args
        return sum((w for f, w in zip(fs, fw) if u in f.floating_vertices),
                   Fraction(0)) / k2
    if statistic == "prob_pair":
        u, v = args
        return sum((w for f, w in zip(fs, fw)
                    if u in f.floating_vertices and v in f.floating_vertices),
                   Fraction(0)) / k2
    if statistic == "prob_edge_separates":
        (e,) = args
        return sum((w for f, w in zip(fs, fw) if e in f.boundary_edge_ids),
                   Fraction(0)) / k2
    if statistic == "expected_boundary":
        total = Fraction(0)
        for f, w in zip(fs, fw):
            wt = sum((Fraction(g.conductance(e)) for e in f.boundary_edge_ids),
                     Fraction(0))
            total += w * wt
        return total / k2
    if statistic == "mean_size":
        return sum((w * len(f.floating_vertices) for f, w in zip(fs, fw)),
                   Fraction(0)) / k2
    if statistic == "second_moment":
        return sum((w * len(f.floating_vertices) ** 2 for f, w in zip(fs, fw)),
                   Fraction(0)) / k2
    if statistic == "pinned_mean":
        (z0,) = args
        num = Fraction(0)
        den = Fraction(0)
        for f, w in zip(fs, fw):
            if z0 in f.floating_vertices:
                num += w * len(f.floating_vertices)
                den += w
        return num / den
    raise UnknownStatistic(f"unknown statistic {statistic!r} "
                           f"(known: {', '.join(STATISTICS)})")


def enumerate_unicycles(graph: WeightedGraph) -> tuple[tuple[frozenset, Fraction], ...]:
    """All connected spanning subgraphs with exactly one cycle (|V| edges),
    with exact weights. Same 24-edge cap as the forest census."""
    m = graph.edge_count
    if m > MAX_EDGES:
        raise TooLarge(f"{m} edges exceeds the enumeration cap of {MAX_EDGES}")
    n = graph.vertex_count
    weights = [Fraction(e.conductance) for e in graph.edges]
    out = []
    for combo in combinations(range(m), n):
        uf = _UnionFind(n)
        cycles = 0
        for eid in combo:
            a, b = graph.endpoints(eid)
            if not uf.union(a, b):
                cycles += 1
                if cycles > 1:
                    break
        if cycles == 1 and uf.components == 1:
            w = Fraction(1)
            for eid in combo:
                w *= weights[eid]
            out.append((frozenset(combo), w))
    return tuple(out)

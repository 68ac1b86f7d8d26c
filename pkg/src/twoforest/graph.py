"""Weighted multigraph with a marked boundary vertex, plus the structural
operations every other module builds on: contraction, pinning, and exact
classification of edge subsets into spanning trees / two-component forests.

Vertices are dense integers 0..n-1 internally; original labels are kept in
``labels`` so inputs with arbitrary hashable vertex names round-trip.
Parallel edges are first class (distinct edge ids); self-loops are rejected.
Instances are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, NamedTuple, Sequence

from .errors import (
    DisconnectedGraph,
    GraphInputError,
    InvalidBoundary,
    InvalidVertex,
    NonpositiveConductance,
    SelfLoop,
)


class Edge(NamedTuple):
    u: int
    v: int
    conductance: float


class WeightedGraph:
    """Connected undirected multigraph with positive edge conductances and a
    marked boundary vertex ``boundary``.

    Use :func:`build_graph` to construct from user input; the constructor
    itself assumes already-densified integer endpoints.
    """

    def __init__(self, edges: Sequence[Edge], boundary: int,
                 labels: Sequence[Hashable] | None = None):
        edges = tuple(Edge(int(u), int(v), float(c)) for u, v, c in edges)
        n = 1 + max(max(e.u, e.v) for e in edges)
        for e in edges:
            if e.u == e.v:
                raise SelfLoop(f"self-loop at vertex {e.u}")
            if not (e.conductance > 0.0) or e.conductance != e.conductance \
                    or e.conductance == float("inf"):
                raise NonpositiveConductance(
                    f"conductance {e.conductance!r} on edge ({e.u},{e.v})")
            if e.u < 0 or e.v < 0:
                raise InvalidVertex(f"negative vertex id on edge {e}")
        if not (0 <= boundary < n):
            raise InvalidBoundary(f"boundary {boundary} not in 0..{n - 1}")
        self.vertex_count = n
        self.edges = edges
        self.boundary = int(boundary)
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if len(self.labels) != n:
            raise GraphInputError("label table length does not match vertex count")
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for eid, e in enumerate(edges):
            adj[e.u].append((eid, e.v))
            adj[e.v].append((eid, e.u))
        self.adjacency = tuple(tuple(a) for a in adj)
        self._check_connected()

    def _check_connected(self):
        seen = [False] * self.vertex_count
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for _, v in self.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        if count != self.vertex_count:
            raise DisconnectedGraph(
                f"graph has {self.vertex_count - count} unreachable vertices")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def label_index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def conductance(self, edge_id: int) -> float:
        return self.edges[edge_id].conductance

    def endpoints(self, edge_id: int) -> tuple[int, int]:
        e = self.edges[edge_id]
        return (e.u, e.v)

    def index_of(self, label: Hashable) -> int:
        try:
            return self.label_index[label]
        except KeyError:
            raise InvalidVertex(f"unknown vertex label {label!r}") from None

    def check_vertex(self, u: int) -> int:
        if not (0 <= u < self.vertex_count):
            raise InvalidVertex(f"vertex {u} not in 0..{self.vertex_count - 1}")
        return int(u)

    def check_edge(self, e: int) -> int:
        from .errors import UnknownEdge
        if not (0 <= e < len(self.edges)):
            raise UnknownEdge(f"edge id {e} not in 0..{len(self.edges) - 1}")
        return int(e)

    def total_log_conductance(self) -> float:
        import math
        return sum(math.log(e.conductance) for e in self.edges)

    def to_json_dict(self) -> dict:
        return {
            "vertices": self.vertex_count,
            "boundary": self.labels[self.boundary],
            "edges": [[self.labels[e.u], self.labels[e.v], e.conductance]
                      for e in self.edges],
        }

    def __repr__(self):
        return (f"WeightedGraph(n={self.vertex_count}, m={self.edge_count}, "
                f"b={self.labels[self.boundary]!r})")


@dataclass(frozen=True)
class SpanningTree:
    """Acyclic spanning edge set, |V|-1 edges."""
    edge_ids: frozenset


@dataclass(frozen=True)
class TwoForest:
    """Spanning forest with exactly two components (|V|-2 edges).

    ``floating_vertices`` is the component not containing the boundary;
    ``boundary_edge_ids`` are the graph edges with exactly one endpoint in it.
    """
    edge_ids: frozenset
    floating_vertices: frozenset
    boundary_edge_ids: frozenset


def build_graph(edge_list: Iterable, boundary: Hashable) -> WeightedGraph:
    """Validate and densify user input into a WeightedGraph.

    ``edge_list`` holds (u, v) or (u, v, conductance) entries with arbitrary
    hashable vertex labels; missing conductances default to 1.0. ``boundary``
    must be one of the labels. Raises SelfLoop, NonpositiveConductance,
    InvalidBoundary or DisconnectedGraph on bad input.
    """
    entries = []
    for item in edge_list:
        item = tuple(item)
        if len(item) == 2:
            u, v, c = item[0], item[1], 1.0
        elif len(item) == 3:
            u, v, c = item
        else:
            raise GraphInputError(f"edge entry {item!r} is not (u, v[, c])")
        entries.append((u, v, float(c)))
    if not entries:
        raise GraphInputError("empty edge list")
    labels: list = []
    index: dict = {}
    def dense(lab):
        if lab not in index:
            index[lab] = len(labels)
            labels.append(lab)
        return index[lab]
    edges = []
    for u, v, c in entries:
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u!r}")
        edges.append(Edge(dense(u), dense(v), c))
    if boundary not in index:
        raise InvalidBoundary(f"boundary {boundary!r} is not a vertex of the graph")
    return WeightedGraph(edges, index[boundary], labels)


def parse_edge_list(text: str, boundary: Hashable) -> WeightedGraph:
    """Parse the one-edge-per-line text format: ``u v [c]``.

    Blank lines and lines starting with '#' are skipped. Labels stay strings.
    """
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphInputError(f"line {lineno}: expected 'u v [c]', got {line!r}")
        c = float(parts[2]) if len(parts) == 3 else 1.0
        entries.append((parts[0], parts[1], c))
    return build_graph(entries, boundary)


def parse_graph_json(text: str, boundary: Hashable | None = None) -> WeightedGraph:
    """Parse the JSON mirror format {"vertices": n, "boundary": id, "edges": [[u,v,c],...]}."""
    obj = json.loads(text)
    b = boundary if boundary is not None else obj.get("boundary")
    if b is None:
        raise InvalidBoundary("no boundary vertex given (JSON field or flag)")
    return build_graph(obj["edges"], b)


def contract(graph: WeightedGraph, u: int, v: int) -> WeightedGraph:
    """Identify vertices u and v. Self-loops created by the merge are dropped,
    parallel edges are kept. If either vertex is the boundary, the merged
    vertex is the new boundary. Remaining vertices are renumbered densely in
    their original order.
    """
    u = graph.check_vertex(u)
    v = graph.check_vertex(v)
    if u == v:
        raise InvalidVertex(f"cannot contract vertex {u} with itself")
    keep, drop = (u, v)
    if v == graph.boundary:
        keep, drop = (v, u)
    remap = {}
    new_labels = []
    for w in range(graph.vertex_count):
        if w == drop:
            continue
        remap[w] = len(new_labels)
        new_labels.append(graph.labels[w])
    remap[drop] = remap[keep]
    edges = []
    for e in graph.edges:
        a, b = remap[e.u], remap[e.v]
        if a == b:
            continue
        edges.append(Edge(a, b, e.conductance))
    return WeightedGraph(edges, remap[graph.boundary], new_labels)


def pin(graph: WeightedGraph, u: int) -> tuple[WeightedGraph, int]:
    """Attach a unit-conductance edge from the boundary to u; returns the new
    graph and the id of the added edge (always the last id)."""
    u = graph.check_vertex(u)
    if u == graph.boundary:
        raise InvalidVertex("cannot pin the boundary vertex to itself")
    edges = list(graph.edges) + [Edge(graph.boundary, u, 1.0)]
    return WeightedGraph(edges, graph.boundary, graph.labels), len(graph.edges)


class _UnionFind:
    __slots__ = ("parent", "rank", "components")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Returns False if a and b were already connected (edge closes a cycle)."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.components -= 1
        return True


def classify_subgraph(graph: WeightedGraph, edge_ids) -> SpanningTree | TwoForest | None:
    """Exact classification of an edge subset.

    Returns a SpanningTree, a TwoForest (with floating component and boundary
    edge set filled in), or None for anything else (cycles, >2 components,
    wrong sizes).
    """
    ids = frozenset(graph.check_edge(e) for e in edge_ids)
    n = graph.vertex_count
    uf = _UnionFind(n)
    for e in ids:
        a, b = graph.endpoints(e)
        if not uf.union(a, b):
            return None
    if uf.components == 1 and len(ids) == n - 1:
        return SpanningTree(ids)
    if uf.components == 2 and len(ids) == n - 2:
        broot = uf.find(graph.boundary)
        floating = frozenset(v for v in range(n) if uf.find(v) != broot)
        boundary_edges = frozenset(
            eid for eid, e in enumerate(graph.edges)
            if (e.u in floating) != (e.v in floating))
        return TwoForest(ids, floating, boundary_edges)
    return None

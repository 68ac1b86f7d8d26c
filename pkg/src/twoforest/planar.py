"""Rotation-system planar maps, dual graphs, and the forest/unicycle
translation: a two-forest on the dual (marked at the outer face) corresponds
to a spanning subgraph of the primal with exactly one cycle, the cycle
enclosing precisely the dual forest's floating faces.

Darts: edge e contributes darts 2e (tail = stored u) and 2e+1 (tail = stored
v). A rotation system lists the darts leaving each vertex in cyclic order;
faces are the orbits of "twin, then next in rotation at the new tail". The
Euler count |V| - |E| + |F| = 2 gates every map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BijectionViolation, GraphInputError, NonPlanarMap
from .graph import Edge, TwoForest, WeightedGraph, _UnionFind
from .green import factorize
from .stats import prob_edge_separates, ratio_k2_over_k


class PlanarMap:
    """An embedded graph: rotation system plus a designated outer face.

    ``rotations`` gives, per vertex, the cyclic order of darts leaving it;
    ``outer_dart`` picks the face walk that plays the outer (unbounded) role.
    Construction computes all face walks and validates the Euler formula.
    """

    def __init__(self, graph: WeightedGraph, rotations, outer_dart: int):
        self.graph = graph
        m = graph.edge_count
        rotations = tuple(tuple(int(d) for d in r) for r in rotations)
        if len(rotations) != graph.vertex_count:
            raise NonPlanarMap("rotation system must cover every vertex")
        seen = [False] * (2 * m)
        for v, rot in enumerate(rotations):
            for d in rot:
                if not (0 <= d < 2 * m) or seen[d]:
                    raise NonPlanarMap(f"dart {d} missing or repeated")
                seen[d] = True
                if self._tail(d) != v:
                    raise NonPlanarMap(
                        f"dart {d} listed at vertex {v} but leaves {self._tail(d)}")
        if not all(seen):
            raise NonPlanarMap("rotation system does not cover all darts")
        self.rotations = rotations
        nxt = {}
        for rot in rotations:
            for i, d in enumerate(rot):
                nxt[d] = rot[(i + 1) % len(rot)]
        faces = []
        face_of = [-1] * (2 * m)
        for d0 in range(2 * m):
            if face_of[d0] >= 0:
                continue
            walk = []
            d = d0
            while face_of[d] < 0:
                face_of[d] = len(faces)
                walk.append(d)
                d = nxt[d ^ 1]  # cross the edge, turn at the far endpoint
            if d != d0:
                raise NonPlanarMap("face walk did not close")
            faces.append(tuple(walk))
        self.faces = tuple(faces)
        self.face_of = tuple(face_of)
        euler = graph.vertex_count - m + len(faces)
        if euler != 2:
            raise NonPlanarMap(
                f"Euler count V-E+F = {euler}, not 2: rotation system is not planar")
        if not (0 <= outer_dart < 2 * m):
            raise NonPlanarMap(f"outer dart {outer_dart} out of range")
        self.outer_dart = int(outer_dart)
        self.outer_face = face_of[outer_dart]

    def _tail(self, dart: int) -> int:
        e = self.graph.edges[dart >> 1]
        return e.u if dart % 2 == 0 else e.v

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def inner_faces(self) -> tuple[int, ...]:
        return tuple(f for f in range(len(self.faces)) if f != self.outer_face)

    def edge_faces(self, edge_id: int) -> tuple[int, int]:
        """The two faces on either side of an edge (equal only for bridges)."""
        return (self.face_of[2 * edge_id], self.face_of[2 * edge_id + 1])

    def to_json_dict(self) -> dict:
        d = self.graph.to_json_dict()
        d["rotations"] = [list(r) for r in self.rotations]
        d["outer_dart"] = self.outer_dart
        return d


def planar_map_from_json(obj: dict) -> PlanarMap:
    from .graph import build_graph
    g = build_graph(obj["edges"], obj["boundary"])
    return PlanarMap(g, obj["rotations"], obj["outer_dart"])


def build_dual(pmap: PlanarMap) -> WeightedGraph:
    """Dual graph: one vertex per face, one edge per primal edge with the
    reciprocal conductance, boundary at the outer face. Dual edge ids equal
    primal edge ids. Requires a bridgeless map (a bridge would dualize to a
    self-loop)."""
    edges = []
    for eid, e in enumerate(pmap.graph.edges):
        f1, f2 = pmap.edge_faces(eid)
        if f1 == f2:
            raise GraphInputError(
                f"edge {eid} is a bridge; the dual of a bridged map has self-loops")
        edges.append(Edge(f1, f2, 1.0 / e.conductance))
    labels = tuple(f"f{f}" for f in range(pmap.face_count))
    return WeightedGraph(edges, pmap.outer_face, labels)


def dual_map(pmap: PlanarMap) -> PlanarMap:
    """The dual as an embedded map: the rotation around a dual vertex (face)
    is the face walk itself. The outer designation on the dual is the face of
    the dual corresponding to the tail of the primal outer dart."""
    dual = build_dual(pmap)
    rotations = [None] * pmap.face_count
    for f, walk in enumerate(pmap.faces):
        rotations[f] = tuple(walk)
    dm = PlanarMap(dual, rotations, outer_dart=pmap.outer_dart)
    return dm


def find_cycle(graph: WeightedGraph, edge_ids) -> frozenset:
    """The unique cycle of a spanning unicycle edge set, by pruning leaves."""
    ids = set(edge_ids)
    deg = [0] * graph.vertex_count
    incident: list[list[int]] = [[] for _ in range(graph.vertex_count)]
    for e in ids:
        a, b = graph.endpoints(e)
        deg[a] += 1
        deg[b] += 1
        incident[a].append(e)
        incident[b].append(e)
    leaves = [v for v in range(graph.vertex_count) if deg[v] == 1]
    alive = set(ids)
    while leaves:
        v = leaves.pop()
        edge = next((e for e in incident[v] if e in alive), None)
        if edge is None:
            continue
        alive.discard(edge)
        a, b = graph.endpoints(edge)
        w = b if a == v else a
        deg[v] -= 1
        deg[w] -= 1
        if deg[w] == 1:
            leaves.append(w)
    return frozenset(alive)


def enclosed_faces(pmap: PlanarMap, cycle_edges) -> frozenset:
    """Faces separated from the outer face by the given cycle: reachability
    over shared non-cycle edges, starting from the outer face."""
    cyc = set(cycle_edges)
    adj: list[list[int]] = [[] for _ in range(pmap.face_count)]
    for eid in range(pmap.graph.edge_count):
        if eid in cyc:
            continue
        f1, f2 = pmap.edge_faces(eid)
        adj[f1].append(f2)
        adj[f2].append(f1)
    seen = [False] * pmap.face_count
    stack = [pmap.outer_face]
    seen[pmap.outer_face] = True
    while stack:
        f = stack.pop()
        for g in adj[f]:
            if not seen[g]:
                seen[g] = True
                stack.append(g)
    return frozenset(f for f in range(pmap.face_count) if not seen[f])


def unicycle_from_forest(pmap: PlanarMap, forest: TwoForest) -> frozenset:
    """Transport a two-forest of the dual to the primal unicycle: the primal
    edges whose duals are NOT in the forest. Verifies the result is connected,
    spanning, with exactly |V| edges (hence a unique cycle)."""
    m = pmap.graph.edge_count
    ids = frozenset(e for e in range(m) if e not in forest.edge_ids)
    n = pmap.graph.vertex_count
    if len(ids) != n:
        raise BijectionViolation(
            f"complement has {len(ids)} edges, expected |V| = {n}")
    uf = _UnionFind(n)
    cycles = 0
    for e in ids:
        a, b = pmap.graph.endpoints(e)
        if not uf.union(a, b):
            cycles += 1
    if uf.components != 1 or cycles != 1:
        raise BijectionViolation(
            f"complement is not a spanning unicycle "
            f"(components={uf.components}, independent cycles={cycles})")
    return ids


@dataclass(frozen=True)
class UnicycleStatistics:
    """Exact statistics of the conductance-weighted random spanning unicycle
    of an embedded graph: cycle-edge probabilities, face enclosure
    probabilities, and the first two moments of the enclosed area."""
    log_lambda: float
    cycle_edge_probs: tuple
    face_enclosure_probs: tuple  # indexed by face id; 0 at the outer face
    area_mean: float
    area_second_moment: float

    def __post_init__(self):
        assert self.area_mean ** 2 <= self.area_second_moment * (1 + 1e-12)


def unicycle_stats(pmap: PlanarMap) -> UnicycleStatistics:
    """All unicycle statistics, computed through duality: the dual two-forest
    measure carries every quantity (enclosed faces = floating dual component,
    cycle edges = dual boundary edges)."""
    dual = build_dual(pmap)
    oracle = factorize(dual)
    ratio = ratio_k2_over_k(dual, oracle=oracle)
    log_lambda = (oracle.log_kappa + math.log(ratio)
                  + pmap.graph.total_log_conductance())
    G = oracle.matrix()
    face_probs = tuple(float(G[f, f]) / ratio for f in range(pmap.face_count))
    cycle_probs = tuple(
        prob_edge_separates(dual, e, oracle=oracle, ratio=ratio)
        for e in range(dual.edge_count))
    area_mean = float(np.trace(G)) / ratio
    area_second = float(G.sum()) / ratio
    return UnicycleStatistics(log_lambda, cycle_probs, face_probs,
                              area_mean, area_second)


def pair_enclosure_prob(pmap: PlanarMap, f1: int, f2: int) -> float:
    """Probability both faces are enclosed by the unicycle's cycle."""
    dual = build_dual(pmap)
    oracle = factorize(dual)
    ratio = ratio_k2_over_k(dual, oracle=oracle)
    return oracle.green(f1, f2) / ratio


def cycle_edge_probability_forms(pmap: PlanarMap, edge_id: int) -> tuple[float, float]:
    """Both published expressions for the probability that an edge's dual lies
    in the cycle of the dual unicycle (equivalently: the edge separates the
    primal floating component).

    First form: kappa(G) T_G(e,e) / (c(e) kappa2(G)), on the primal.
    Second form: c(e*) kappa(G*) (1 - T_{G*}(e*,e*)) / lambda(G*), on the dual,
    with lambda(G*) obtained from kappa2(G) by weight transport.
    They agree identically; computing both is a cross-check of the embedding,
    the duality constant and both Green oracles.
    """
    g = pmap.graph
    edge_id = g.check_edge(edge_id)
    primal_oracle = factorize(g)
    primal_ratio = ratio_k2_over_k(g, oracle=primal_oracle)
    lhs = prob_edge_separates(g, edge_id, oracle=primal_oracle, ratio=primal_ratio)

    dual = build_dual(pmap)
    dual_oracle = factorize(dual)
    # lambda(G*) = kappa2(G) / prod c(e): CRSTs of the dual correspond to
    # two-forests of the primal with a constant weight factor.
    log_lambda_dual = (primal_oracle.log_kappa + math.log(primal_ratio)
                       - g.total_log_conductance())
    t_dual = dual_oracle.transfer_current(edge_id, edge_id)
    rhs = (dual.conductance(edge_id)
           * math.exp(dual_oracle.log_kappa - log_lambda_dual)
           * (1.0 - t_dual))
    return lhs, rhs

"""Random generation: weighted spanning trees by Wilson's loop-erased walk,
exact two-forest samples by tree-minus-edge proposal with rejection, and
seeded Monte Carlo estimators.

Determinism contract: a batch is a pure function of (graph, count, seed,
workers). Worker w draws from a Philox stream keyed by (seed, w), and worker
outputs are concatenated in worker order, so the result does not depend on
how (or whether) workers actually run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats as _scipy_stats

from .census import ExactCensus
from .errors import UnknownStatistic
from .graph import SpanningTree, TwoForest, WeightedGraph, classify_subgraph


@lru_cache(maxsize=32)
def _walk_tables(graph: WeightedGraph):
    """Per-vertex neighbor arrays and cumulative conductances for O(log deg)
    biased steps."""
    nbr_edge, nbr_vertex, cum = [], [], []
    for u in range(graph.vertex_count):
        eids = np.array([e for e, _ in graph.adjacency[u]], dtype=np.int64)
        others = np.array([v for _, v in graph.adjacency[u]], dtype=np.int64)
        c = np.array([graph.edges[e].conductance for e, _ in graph.adjacency[u]])
        nbr_edge.append(eids)
        nbr_vertex.append(others)
        cum.append(np.cumsum(c))
    return nbr_edge, nbr_vertex, cum


class _Uniforms:
    """Buffered uniforms from a Generator; cuts per-call overhead in the walk
    loops without changing the draw sequence for a given generator state."""

    __slots__ = ("rng", "buf", "pos")

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self.rng = rng
        self.buf = rng.random(block)
        self.pos = 0

    def next(self) -> float:
        if self.pos >= self.buf.size:
            self.buf = self.rng.random(self.buf.size)
            self.pos = 0
        x = self.buf[self.pos]
        self.pos += 1
        return x


def _wilson_tree(graph: WeightedGraph, uni: _Uniforms, tables) -> np.ndarray:
    """Successor edge array of a Wilson tree rooted at the boundary; entry for
    the boundary is -1."""
    nbr_edge, nbr_vertex, cum = tables
    n = graph.vertex_count
    b = graph.boundary
    in_tree = np.zeros(n, dtype=bool)
    in_tree[b] = True
    succ_edge = np.full(n, -1, dtype=np.int64)
    succ_vertex = np.full(n, -1, dtype=np.int64)
    for start in range(n):
        u = start
        while not in_tree[u]:
            cw = cum[u]
            k = int(np.searchsorted(cw, uni.next() * cw[-1], side="right"))
            if k >= cw.size:  # guard the measure-zero edge case u*cw[-1]==cw[-1]
                k = cw.size - 1
            succ_edge[u] = nbr_edge[u][k]
            succ_vertex[u] = nbr_vertex[u][k]
            u = int(succ_vertex[u])
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = int(succ_vertex[u])
    return succ_edge


def sample_spanning_tree(graph: WeightedGraph,
                         rng: np.random.Generator) -> SpanningTree:
    """One spanning tree with probability proportional to the product of its
    edge conductances (loop-erased walks rooted at the boundary)."""
    succ = _wilson_tree(graph, _Uniforms(rng), _walk_tables(graph))
    return SpanningTree(frozenset(int(e) for e in succ if e >= 0))


def _forest_from_tree(graph: WeightedGraph, succ_edge: np.ndarray,
                      drop_vertex: int) -> TwoForest:
    """Remove the successor edge of ``drop_vertex`` from the tree; the floating
    component is everything whose root path passes through drop_vertex."""
    n = graph.vertex_count
    b = graph.boundary
    # children lists in the successor forest, minus the dropped edge
    kids: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        if u == b or u == drop_vertex:
            continue
        e = graph.edges[succ_edge[u]]
        parent = e.v if e.u == u else e.u
        kids[parent].append(u)
    floating = set()
    stack = [drop_vertex]
    while stack:
        w = stack.pop()
        floating.add(w)
        stack.extend(kids[w])
    edge_ids = frozenset(int(succ_edge[u]) for u in range(n)
                         if u != b and u != drop_vertex)
    boundary_edges = frozenset(
        eid for eid, e in enumerate(graph.edges)
        if (e.u in floating) != (e.v in floating))
    return TwoForest(edge_ids, frozenset(floating), boundary_edges)


def sample_two_forest(graph: WeightedGraph, rng: np.random.Generator,
                      ) -> tuple[TwoForest, int]:
    """One exact two-forest sample (probability proportional to its weight)
    and the number of proposals it took.

    Proposal: Wilson tree, drop a uniform tree edge. A forest F is proposed
    with probability proportional to w(F) * c(dF), where c(dF) is the
    conductance sum over its boundary; accepting with probability
    c_min / c(dF) therefore leaves P(F) proportional to w(F), and the
    acceptance ratio is <= 1 because the boundary always contains an edge.
    """
    uni = _Uniforms(rng)
    tables = _walk_tables(graph)
    c_min = min(e.conductance for e in graph.edges)
    non_root = [u for u in range(graph.vertex_count) if u != graph.boundary]
    attempts = 0
    while True:
        attempts += 1
        succ = _wilson_tree(graph, uni, tables)
        drop = non_root[int(uni.next() * len(non_root)) % len(non_root)]
        forest = _forest_from_tree(graph, succ, drop)
        c_boundary = sum(graph.conductance(e) for e in forest.boundary_edge_ids)
        if uni.next() * c_boundary <= c_min:
            return forest, attempts


@dataclass(frozen=True)
class SampleBatch:
    """Per-sample records from a reproducible two-forest sampling run."""
    seed: int
    count: int
    workers: int
    sizes: np.ndarray             # |Sigma| per sample
    boundary_weight: np.ndarray   # conductance sum over the boundary per sample
    proposals: np.ndarray         # rejection attempts per sample
    membership: np.ndarray | None  # bool (count, n) if requested
    forests: tuple | None          # sorted edge tuples if requested

    @property
    def acceptance_rate(self) -> float:
        return float(self.count / self.proposals.sum())

    def digest(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.sizes).tobytes())
        h.update(np.ascontiguousarray(self.boundary_weight).tobytes())
        h.update(np.ascontiguousarray(self.proposals).tobytes())
        if self.membership is not None:
            h.update(np.ascontiguousarray(self.membership).tobytes())
        if self.forests is not None:
            h.update(repr(self.forests).encode())
        return h.hexdigest()


def _worker_rng(seed: int, worker: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(worker,))
    return np.random.Generator(np.random.Philox(ss))


def _split_counts(count: int, workers: int) -> list[int]:
    base, extra = divmod(count, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _run_worker(graph: WeightedGraph, count: int, seed: int, worker: int,
                record_membership: bool, record_forests: bool):
    rng = _worker_rng(seed, worker)
    sizes = np.empty(count, dtype=np.int64)
    bweight = np.empty(count, dtype=np.float64)
    props = np.empty(count, dtype=np.int64)
    member = (np.zeros((count, graph.vertex_count), dtype=bool)
              if record_membership else None)
    forests = [] if record_forests else None
    for i in range(count):
        forest, attempts = sample_two_forest(graph, rng)
        sizes[i] = len(forest.floating_vertices)
        bweight[i] = sum(graph.conductance(e) for e in forest.boundary_edge_ids)
        props[i] = attempts
        if member is not None:
            member[i, list(forest.floating_vertices)] = True
        if forests is not None:
            forests.append(tuple(sorted(forest.edge_ids)))
    return sizes, bweight, props, member, forests


def sample_batch(graph: WeightedGraph, count: int, seed: int,
                 workers: int = 1, record_membership: bool = False,
                 record_forests: bool = False,
                 parallel: bool = False) -> SampleBatch:
    """Draw ``count`` two-forests. Identical output for identical
    (graph, count, seed, workers); ``parallel`` only changes how the worker
    shards execute, never what they produce."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    shards = _split_counts(count, workers)
    args = [(graph, c, seed, w, record_membership, record_forests)
            for w, c in enumerate(shards) if c > 0]
    if parallel and len(args) > 1:
        import concurrent.futures
        with concurrent.futures.ProcessPoolExecutor(max_workers=len(args)) as ex:
            results = list(ex.map(_run_worker_star, args))
    else:
        results = [_run_worker(*a) for a in args]
    sizes = np.concatenate([r[0] for r in results])
    bw = np.concatenate([r[1] for r in results])
    props = np.concatenate([r[2] for r in results])
    member = (np.concatenate([r[3] for r in results])
              if record_membership else None)
    forests = (tuple(f for r in results for f in r[4])
               if record_forests else None)
    return SampleBatch(seed, count, workers, sizes, bw, props, member, forests)


def _run_worker_star(args):
    return _run_worker(*args)


@dataclass(frozen=True)
class Estimate:
    statistic: str
    mean: float
    stderr: float
    count: int
    acceptance_rate: float


SAMPLE_STATISTICS = ("mean_size", "second_moment", "boundary_weight",
                     "prob_in_sigma", "prob_pair", "prob_vertices",
                     "prob_edge_separates", "pinned_mean")


def estimate(graph: WeightedGraph, statistic: str, samples: int, seed: int,
             workers: int = 1, vertices=(), edge: int | None = None,
             batch: SampleBatch | None = None) -> Estimate:
    """Monte Carlo estimate with standard error.

    ``prob_vertices`` takes any tuple of vertices (three-point and beyond);
    with duplicates or fewer entries it degrades to pair / single inclusion.
    """
    need_membership = statistic in ("prob_in_sigma", "prob_pair",
                                    "prob_vertices", "pinned_mean")
    need_forests = statistic == "prob_edge_separates"
    if batch is None:
        batch = sample_batch(graph, samples, seed, workers,
                             record_membership=need_membership,
                             record_forests=need_forests)
    if statistic == "mean_size":
        data = batch.sizes.astype(float)
    elif statistic == "second_moment":
        data = batch.sizes.astype(float) ** 2
    elif statistic == "boundary_weight":
        data = batch.boundary_weight
    elif statistic in ("prob_in_sigma", "prob_pair", "prob_vertices"):
        vs = [graph.check_vertex(v) for v in vertices]
        if not vs:
            raise UnknownStatistic(f"{statistic} needs vertices=")
        data = batch.membership[:, vs].all(axis=1).astype(float)
    elif statistic == "pinned_mean":
        (z0,) = vertices
        mask = batch.membership[:, graph.check_vertex(z0)]
        if not mask.any():
            raise UnknownStatistic("no samples hit the conditioning event")
        data = batch.sizes[mask].astype(float)
    elif statistic == "prob_edge_separates":
        e = graph.check_edge(edge)
        data = np.empty(len(batch.forests))
        for i, ids in enumerate(batch.forests):
            f = classify_subgraph(graph, ids)
            data[i] = 1.0 if e in f.boundary_edge_ids else 0.0
    else:
        raise UnknownStatistic(f"unknown statistic {statistic!r} "
                               f"(known: {', '.join(SAMPLE_STATISTICS)})")
    n = data.size
    mean = float(data.mean())
    stderr = float(data.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return Estimate(statistic, mean, stderr, n, batch.acceptance_rate)


def chi_square_forest_fit(graph: WeightedGraph, census: ExactCensus,
                          samples: int, seed: int, workers: int = 1,
                          batch: SampleBatch | None = None):
    """Goodness of fit of sampled two-forests against the exact census.

    Returns (chi2, p_value, dof). Cells with expected count below 5 are
    pooled into their neighbors to keep the test honest on weighted graphs.
    """
    if batch is None:
        batch = sample_batch(graph, samples, seed, workers, record_forests=True)
    index = {tuple(sorted(f.edge_ids)): i for i, f in enumerate(census.forests)}
    counts = np.zeros(len(census.forests))
    for ids in batch.forests:
        counts[index[ids]] += 1
    expected = np.array([float(p) for p in census.forest_probabilities()])
    expected = expected * batch.count
    obs, exp = _pool_small_cells(counts, expected)
    chi2, p = _scipy_stats.chisquare(obs, exp)
    return float(chi2), float(p), len(obs) - 1


def chi_square_tree_fit(graph: WeightedGraph, census: ExactCensus,
                        samples: int, seed: int):
    """Same test for Wilson tree samples against the weighted tree census."""
    rng = _worker_rng(seed, 0)
    index = {tuple(sorted(t.edge_ids)): i for i, t in enumerate(census.trees)}
    counts = np.zeros(len(census.trees))
    for _ in range(samples):
        t = sample_spanning_tree(graph, rng)
        counts[index[tuple(sorted(t.edge_ids))]] += 1
    expected = np.array([float(p) for p in census.tree_probabilities()]) * samples
    obs, exp = _pool_small_cells(counts, expected)
    chi2, p = _scipy_stats.chisquare(obs, exp)
    return float(chi2), float(p), len(obs) - 1


def _pool_small_cells(obs: np.ndarray, exp: np.ndarray, min_expected: float = 5.0):
    order = np.argsort(exp)
    obs, exp = obs[order].copy(), exp[order].copy()
    while exp.size > 1 and exp[0] < min_expected:
        obs[1] += obs[0]
        exp[1] += exp[0]
        obs, exp = obs[1:], exp[1:]
        order = np.argsort(exp)
        obs, exp = obs[order], exp[order]
    # chisquare requires matching totals to floating precision
    exp *= obs.sum() / exp.sum()
    return obs, exp

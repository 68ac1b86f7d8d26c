"""Dirichlet Laplacian factorization and everything served from it: Green's
function entries, log tree count, transfer currents, potential kernels.

The Dirichlet Laplacian is the graph Laplacian with the root's row and column
removed; its determinant is the weighted spanning-tree count and its inverse
is the Green's function (zero on the root by convention). Determinants are
kept in log domain throughout: raw tree counts overflow quickly on lattice
boxes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import NumericalError, SingularMatrix, UnknownEdge
from .graph import WeightedGraph

#: graphs above this vertex count get a sparse LU factorization instead of
#: a dense Cholesky.
DENSE_THRESHOLD = 2000

#: relative residual allowed on solves before we refuse to return values.
RESIDUAL_TOL = 1e-9


def dirichlet_laplacian(graph: WeightedGraph, root: int | None = None,
                        sparse: bool = False):
    """Laplacian of the graph with ``root``'s row and column removed.

    Returns (matrix, keep) where keep maps reduced indices to vertex ids.
    """
    root = graph.boundary if root is None else graph.check_vertex(root)
    n = graph.vertex_count
    keep = [v for v in range(n) if v != root]
    pos = {v: i for i, v in enumerate(keep)}
    m = n - 1
    if sparse:
        rows, cols, vals = [], [], []
        diag = np.zeros(m)
        for e in graph.edges:
            iu = pos.get(e.u)
            iv = pos.get(e.v)
            if iu is not None:
                diag[iu] += e.conductance
            if iv is not None:
                diag[iv] += e.conductance
            if iu is not None and iv is not None:
                rows.extend((iu, iv))
                cols.extend((iv, iu))
                vals.extend((-e.conductance, -e.conductance))
        rows.extend(range(m))
        cols.extend(range(m))
        vals.extend(diag)
        mat = scipy.sparse.csc_matrix(
            (vals, (rows, cols)), shape=(m, m), dtype=np.float64)
        mat.sum_duplicates()
        return mat, keep
    mat = np.zeros((m, m))
    for e in graph.edges:
        iu = pos.get(e.u)
        iv = pos.get(e.v)
        if iu is not None:
            mat[iu, iu] += e.conductance
        if iv is not None:
            mat[iv, iv] += e.conductance
        if iu is not None and iv is not None:
            mat[iu, iv] -= e.conductance
            mat[iv, iu] -= e.conductance
    return mat, keep


class GreenOracle:
    """Factorized Dirichlet Laplacian serving Green entries and log kappa.

    Immutable once built; column solves are cached under a lock so the oracle
    can be read concurrently. Full-matrix materialization is an explicit
    opt-in (`matrix()`), used by moment sums.
    """

    def __init__(self, graph: WeightedGraph, root: int | None = None,
                 dense_threshold: int = DENSE_THRESHOLD):
        self.graph = graph
        self.root = graph.boundary if root is None else graph.check_vertex(root)
        n = graph.vertex_count
        self._sparse = (n - 1) > dense_threshold
        mat, keep = dirichlet_laplacian(graph, self.root, sparse=self._sparse)
        self._lap = mat
        self._keep = keep
        self._pos = np.full(n, -1, dtype=np.int64)
        for i, v in enumerate(keep):
            self._pos[v] = i
        if self._sparse:
            try:
                self._lu = scipy.sparse.linalg.splu(mat)
            except RuntimeError as exc:
                raise SingularMatrix(str(exc)) from exc
            diag_u = self._lu.U.diagonal()
            if np.any(diag_u == 0.0):
                raise SingularMatrix("zero pivot in sparse factorization")
            # |det| is enough: the Dirichlet Laplacian of a connected graph
            # is positive definite, so det > 0.
            self.log_kappa = float(np.sum(np.log(np.abs(diag_u))))
        else:
            try:
                self._cho = scipy.linalg.cho_factor(mat, lower=True)
            except scipy.linalg.LinAlgError as exc:
                raise SingularMatrix(str(exc)) from exc
            self.log_kappa = float(2.0 * np.sum(np.log(np.diag(self._cho[0]))))
        self._columns: dict[int, np.ndarray] = {}
        self._matrix: np.ndarray | None = None
        self._lock = threading.Lock()

    @property
    def size(self) -> int:
        return len(self._keep)

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._sparse:
            return self._lu.solve(rhs)
        return scipy.linalg.cho_solve(self._cho, rhs)

    def _check_residual(self, x: np.ndarray, rhs: np.ndarray):
        res = self._lap @ x - rhs
        scale = max(1.0, float(np.max(np.abs(rhs))))
        rel = float(np.max(np.abs(res))) / scale
        if rel > RESIDUAL_TOL * max(1.0, float(np.max(np.abs(x)))) * 100.0:
            # generous: residual ~ eps * cond; anything past this is a real
            # failure, not roundoff.
            raise NumericalError(
                f"solve residual {rel:.3e} exceeds tolerance; "
                f"the factorization is not trustworthy")

    def column(self, u: int) -> np.ndarray:
        """Green column G[., u] as a full-length vector (zero at the root)."""
        u = self.graph.check_vertex(u)
        if u == self.root:
            return np.zeros(self.graph.vertex_count)
        with self._lock:
            cached = self._columns.get(u)
        if cached is not None:
            return cached
        if self._matrix is not None:
            col = self._matrix[:, u]
        else:
            rhs = np.zeros(self.size)
            rhs[self._pos[u]] = 1.0
            x = self._solve(rhs)
            self._check_residual(x, rhs)
            col = np.zeros(self.graph.vertex_count)
            col[self._keep] = x
        with self._lock:
            self._columns[u] = col
        return col

    def green(self, u: int, v: int) -> float:
        """G[u, v]; zero whenever u or v is the root."""
        u = self.graph.check_vertex(u)
        v = self.graph.check_vertex(v)
        if u == self.root or v == self.root:
            return 0.0
        if self._matrix is not None:
            return float(self._matrix[u, v])
        with self._lock:
            for w, other in ((u, v), (v, u)):
                col = self._columns.get(w)
                if col is not None:
                    return float(col[other])
        return float(self.column(v)[u])

    def matrix(self) -> np.ndarray:
        """Full Green matrix, zero-padded at the root row/column.

        Explicit opt-in: costs a full inverse. Residuals are checked on a
        deterministic sample of columns.
        """
        with self._lock:
            if self._matrix is not None:
                return self._matrix
        m = self.size
        if self._sparse:
            inv = np.empty((m, m))
            block = 512
            eye = np.eye(m)
            for lo in range(0, m, block):
                hi = min(lo + block, m)
                inv[:, lo:hi] = self._lu.solve(eye[:, lo:hi])
        else:
            inv = scipy.linalg.cho_solve(self._cho, np.eye(m))
        probe = sorted({0, m // 2, m - 1})
        for j in probe:
            rhs = np.zeros(m)
            rhs[j] = 1.0
            self._check_residual(inv[:, j], rhs)
        full = np.zeros((self.graph.vertex_count, self.graph.vertex_count))
        full[np.ix_(self._keep, self._keep)] = 0.5 * (inv + inv.T)
        with self._lock:
            self._matrix = full
        return full

    def diagonal(self) -> np.ndarray:
        """All G[v, v] as a full-length vector (zero at the root)."""
        return np.diag(self.matrix()).copy()

    def transfer_current(self, e, e2) -> float:
        """Transfer current between two edges.

        Edges may be edge ids (orientation as stored) or (u, v) vertex pairs.
        T(e, e) is the spanning-tree probability of e and lies in [0, 1].
        """
        u1, v1, _ = self._resolve_edge(e)
        u2, v2, c2 = self._resolve_edge(e2)
        val = c2 * (self.green(u1, u2) - self.green(u1, v2)
                    - self.green(u2, v1) + self.green(v1, v2))
        if (u1, v1) == (u2, v2):
            if val < -1e-9 or val > 1.0 + 1e-9:
                raise NumericalError(f"T(e,e) = {val!r} outside [0,1]")
            val = min(1.0, max(0.0, val))
        return float(val)

    def _resolve_edge(self, e) -> tuple[int, int, float]:
        if isinstance(e, (int, np.integer)):
            eid = self.graph.check_edge(int(e))
            ed = self.graph.edges[eid]
            return ed.u, ed.v, ed.conductance
        u, v = e
        u = self.graph.check_vertex(u)
        v = self.graph.check_vertex(v)
        for eid, other in self.graph.adjacency[u]:
            if other == v:
                return u, v, self.graph.edges[eid].conductance
        raise UnknownEdge(f"no edge between vertices {u} and {v}")


def factorize(graph: WeightedGraph, root: int | None = None,
              dense_threshold: int = DENSE_THRESHOLD) -> GreenOracle:
    """Build the Green oracle for ``graph`` (Dirichlet at ``root``, default the
    boundary vertex)."""
    return GreenOracle(graph, root=root, dense_threshold=dense_threshold)


@dataclass(frozen=True)
class PotentialKernel:
    """Per-edge potential differences A[u,v] = G[u,u] - G[u,v] for both
    orientations of every edge, Green rooted at ``root``."""
    root: int
    forward: tuple  # A[u,v] for edge as stored (u, v, c)
    backward: tuple  # A[v,u]

    def value(self, edge_id: int, tail: int, graph: WeightedGraph) -> float:
        e = graph.edges[edge_id]
        if tail == e.u:
            return self.forward[edge_id]
        if tail == e.v:
            return self.backward[edge_id]
        raise UnknownEdge(f"vertex {tail} is not an endpoint of edge {edge_id}")


def potential_kernel(graph: WeightedGraph, root: int | None = None,
                     oracle: GreenOracle | None = None) -> PotentialKernel:
    """Potential kernel for every edge orientation, from a Green oracle rooted
    at ``root``. A[r, v] = 0 for edges out of the root; A[u,v] + A[v,u] >= 0
    always (it equals the edge's tree probability over its conductance)."""
    if oracle is None:
        root = graph.boundary if root is None else graph.check_vertex(root)
        oracle = GreenOracle(graph, root=root)
    else:
        root = oracle.root
    if graph.edge_count > 64 or oracle._matrix is not None:
        G = oracle.matrix()
        diag = np.diag(G)
        fw, bw = [], []
        for e in graph.edges:
            guv = G[e.u, e.v]
            fw.append(float(diag[e.u] - guv))
            bw.append(float(diag[e.v] - guv))
    else:
        fw, bw = [], []
        for e in graph.edges:
            guv = oracle.green(e.u, e.v)
            fw.append(oracle.green(e.u, e.u) - guv)
            bw.append(oracle.green(e.v, e.v) - guv)
    for a, b in zip(fw, bw):
        if a + b < -1e-9:
            raise NumericalError("potential kernel lost positivity; solve is broken")
    return PotentialKernel(root, tuple(fw), tuple(bw))


def kappa_exact(graph: WeightedGraph, root: int | None = None) -> Fraction:
    """Weighted spanning-tree count as an exact rational.

    Fraction-free Gaussian elimination on the Dirichlet Laplacian; every float
    conductance is rational, so this is exact for any input, and fast enough
    for the comparison sizes the oracle suite uses (<= a few dozen vertices).
    """
    root = graph.boundary if root is None else graph.check_vertex(root)
    n = graph.vertex_count
    keep = [v for v in range(n) if v != root]
    pos = {v: i for i, v in enumerate(keep)}
    m = n - 1
    a = [[Fraction(0)] * m for _ in range(m)]
    for e in graph.edges:
        c = Fraction(e.conductance)
        iu = pos.get(e.u)
        iv = pos.get(e.v)
        if iu is not None:
            a[iu][iu] += c
        if iv is not None:
            a[iv][iv] += c
        if iu is not None and iv is not None:
            a[iu][iv] -= c
            a[iv][iu] -= c
    det = Fraction(1)
    for k in range(m):
        pivot = None
        for r in range(k, m):
            if a[r][k] != 0:
                pivot = r
                break
        if pivot is None:
            raise SingularMatrix("singular Dirichlet Laplacian (disconnected?)")
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            det = -det
        det *= a[k][k]
        inv = 1 / a[k][k]
        for r in range(k + 1, m):
            if a[r][k] == 0:
                continue
            f = a[r][k] * inv
            row_r, row_k = a[r], a[k]
            for cix in range(k, m):
                row_r[cix] -= f * row_k[cix]
    return det


def log_kappa(graph: WeightedGraph) -> float:
    return factorize(graph).log_kappa


def tree_edge_probability(oracle: GreenOracle, edge_id: int) -> float:
    """Probability the edge is in a conductance-weighted random spanning tree."""
    return oracle.transfer_current(edge_id, edge_id)

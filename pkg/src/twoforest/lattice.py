"""Lattice generators and the asymptotic constants of the two-forest model:
finite wired boxes for the cubic/square/triangular/hexagonal families (the
planar ones carrying rotation systems), the periodic-graph limit of the
expected boundary size, the grid ratio law, torus and wired-box Green traces,
the resistance integral, the cuboid exit-time series, and the unit-square
Green function used by the scaling diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
from scipy import integrate, special

from .errors import DivergentIntegral, PointOnBoundary, UnsupportedFamily
from .graph import Edge, WeightedGraph
from .green import factorize
from .planar import PlanarMap
from .stats import expected_boundary, prob_in_sigma, prob_pair_in_sigma, ratio_k2_over_k

BOUNDARY_LABEL = "b"


@dataclass(frozen=True)
class LatticeSpec:
    """A finite wired lattice box: ``size`` n means every vertex within
    distance n-1 of the origin is interior (side 2n-1) and everything outside
    is wired into the boundary vertex."""
    family: str  # cubic | square | triangular | hexagonal
    size: int
    dimension: int = 2  # used by the cubic family only


@dataclass(frozen=True)
class BuiltLattice:
    graph: WeightedGraph
    planar_map: PlanarMap | None


# offsets defining each planar family on integer coordinates, with true
# plane positions for the embedding
_UNIT_SQUARE = ((1, 0), (0, 1))
_UNIT_TRIANGULAR = ((1, 0), (0, 1), (1, 1))


def _patch_graph(shape, forward_offsets):
    """Wired patch: interior = integer points of prod(range(s)); every lattice
    step leaving the patch becomes a distinct edge to the wired vertex."""
    coords = list(product(*(range(s) for s in shape)))
    index = {c: i for i, c in enumerate(coords)}
    b = len(coords)
    offsets = list(forward_offsets) + [tuple(-x for x in o) for o in forward_offsets]
    edges = []
    spoke_target = {}  # edge id -> outside coordinate (for embeddings)
    for c in coords:
        for o in forward_offsets:
            nb = tuple(a + d for a, d in zip(c, o))
            if nb in index:
                edges.append(Edge(index[c], index[nb], 1.0))
    for c in coords:
        for o in offsets:
            nb = tuple(a + d for a, d in zip(c, o))
            if nb not in index:
                spoke_target[len(edges)] = nb
                edges.append(Edge(index[c], b, 1.0))
    labels = coords + [BOUNDARY_LABEL]
    return WeightedGraph(edges, b, labels), spoke_target


def _hexagonal_patch(m):
    """m x m cells of the honeycomb, two vertices per cell, wired exterior."""
    coords = [(i, j, s) for i in range(m) for j in range(m) for s in (0, 1)]
    index = {c: i for i, c in enumerate(coords)}
    b = len(coords)
    # neighbors of the s=0 sublattice: own cell partner plus the partners of
    # the cells one step down/left
    def neighbors(c):
        i, j, s = c
        if s == 0:
            return [(i, j, 1), (i - 1, j, 1), (i, j - 1, 1)]
        return [(i, j, 0), (i + 1, j, 0), (i, j + 1, 0)]
    edges = []
    spoke_target = {}
    for c in coords:
        if c[2] == 0:
            continue  # add each edge once, from the s=1 endpoint
        for nb in neighbors(c):
            if nb in index:
                edges.append(Edge(index[c], index[nb], 1.0))
    for c in coords:
        for nb in neighbors(c):
            if nb not in index:
                spoke_target[len(edges)] = nb
                edges.append(Edge(index[c], b, 1.0))
    labels = coords + [BOUNDARY_LABEL]
    return WeightedGraph(edges, b, labels), spoke_target


def _square_position(c):
    return (float(c[0]), float(c[1]))


def _triangular_position(c):
    return (c[0] + 0.5 * c[1], 0.5 * math.sqrt(3.0) * c[1])


def _hexagonal_position(c):
    i, j, s = c
    x = i + 0.5 * j
    y = 0.5 * math.sqrt(3.0) * j
    if s == 1:
        x += 0.5
        y += 0.5 / math.sqrt(3.0)
    return (x, y)


def _embedded_patch_map(graph, spoke_target, position) -> PlanarMap:
    """Rotation system from plane coordinates: darts around an interior vertex
    sorted by angle; darts around the wired vertex sorted by the angle of
    their outside endpoint around the patch centroid (the wired vertex sits
    at infinity, so both cyclic orientations are tried against the Euler
    gate)."""
    n = graph.vertex_count
    b = graph.boundary
    pos = [None] * n
    for v in range(n):
        if v != b:
            pos[v] = position(graph.labels[v])
    cx = sum(p[0] for p in pos if p is not None) / (n - 1)
    cy = sum(p[1] for p in pos if p is not None) / (n - 1)

    def dart_target(d):
        eid = d >> 1
        e = graph.edges[eid]
        tail = e.u if d % 2 == 0 else e.v
        head = e.v if d % 2 == 0 else e.u
        if head == b:
            return position(spoke_target[eid])
        return pos[head]

    rotations = [None] * n
    for v in range(n):
        darts = []
        for eid, other in graph.adjacency[v]:
            e = graph.edges[eid]
            if e.u == v:
                darts.append(2 * eid)
            if e.v == v:
                darts.append(2 * eid + 1)
        darts = sorted(set(darts))
        if v == b:
            def key(d):
                tx, ty = dart_target(d)
                # darts of b point back INTO the patch; order around infinity
                # follows the outside anchor of the spoke
                eid = d >> 1
                ax, ay = position(spoke_target[eid])
                e = graph.edges[eid]
                inner = e.v if e.u == b else e.u
                ix, iy = pos[inner]
                return (math.atan2(ay - cy, ax - cx),
                        math.atan2(iy - ay, ix - ax))
            rotations[v] = sorted(darts, key=key)
        else:
            px, py = pos[v]
            rotations[v] = sorted(
                darts, key=lambda d: math.atan2(dart_target(d)[1] - py,
                                                dart_target(d)[0] - px))
    from .errors import NonPlanarMap
    try:
        return PlanarMap(graph, rotations, outer_dart=rotations[b][0])
    except NonPlanarMap:
        rotations[b] = list(reversed(rotations[b]))
        return PlanarMap(graph, rotations, outer_dart=rotations[b][0])


def build_lattice(spec: LatticeSpec) -> BuiltLattice:
    """Build the wired lattice box for a spec. Planar families also carry a
    rotation-system embedding."""
    if spec.size < 2:
        raise UnsupportedFamily("lattice size must be >= 2")
    m = 2 * spec.size - 1
    if spec.family == "cubic":
        d = spec.dimension
        if d < 1:
            raise UnsupportedFamily("cubic dimension must be >= 1")
        offs = tuple(tuple(1 if i == k else 0 for i in range(d)) for k in range(d))
        graph, spokes = _patch_graph((m,) * d, offs)
        pmap = (_embedded_patch_map(graph, spokes, _square_position)
                if d == 2 else None)
        return BuiltLattice(graph, pmap)
    if spec.family == "square":
        graph, spokes = _patch_graph((m, m), _UNIT_SQUARE)
        return BuiltLattice(graph, _embedded_patch_map(graph, spokes, _square_position))
    if spec.family == "triangular":
        graph, spokes = _patch_graph((m, m), _UNIT_TRIANGULAR)
        return BuiltLattice(graph, _embedded_patch_map(graph, spokes, _triangular_position))
    if spec.family == "hexagonal":
        graph, spokes = _hexagonal_patch(m)
        return BuiltLattice(graph, _embedded_patch_map(graph, spokes, _hexagonal_position))
    raise UnsupportedFamily(f"unknown lattice family {spec.family!r}")


def square_grid(n: int) -> BuiltLattice:
    """Free (unwired) n x n grid patch with its embedding; the boundary vertex
    is the corner (0,0). Used by the grid ratio law (which is boundary
    independent) and as the primal of the grid unicycle maps."""
    coords = [(i, j) for i in range(n) for j in range(n)]
    index = {c: i for i, c in enumerate(coords)}
    edges = []
    for (i, j) in coords:
        for o in _UNIT_SQUARE:
            nb = (i + o[0], j + o[1])
            if nb in index:
                edges.append(Edge(index[(i, j)], index[nb], 1.0))
    graph = WeightedGraph(edges, index[(0, 0)], coords)
    pos = [_square_position(c) for c in coords]
    rotations = []
    for v in range(graph.vertex_count):
        darts = []
        for eid, other in graph.adjacency[v]:
            e = graph.edges[eid]
            darts.append(2 * eid if e.u == v else 2 * eid + 1)
        px, py = pos[v]
        def angle(d):
            e = graph.edges[d >> 1]
            head = e.v if d % 2 == 0 else e.u
            hx, hy = pos[head]
            return math.atan2(hy - py, hx - px)
        rotations.append(sorted(set(darts), key=angle))
    pmap = PlanarMap(graph, rotations, outer_dart=0)
    outer = _outer_face_by_area(pmap, pos)
    if outer != pmap.outer_face:
        pmap = PlanarMap(graph, rotations, outer_dart=pmap.faces[outer][0])
    return BuiltLattice(graph, pmap)


def _outer_face_by_area(pmap: PlanarMap, pos) -> int:
    """The outer face is the unique one whose walk winds the opposite way."""
    areas = []
    for walk in pmap.faces:
        a = 0.0
        for d in walk:
            e = pmap.graph.edges[d >> 1]
            t = e.u if d % 2 == 0 else e.v
            h = e.v if d % 2 == 0 else e.u
            a += pos[t][0] * pos[h][1] - pos[h][0] * pos[t][1]
        areas.append(0.5 * a)
    signs = [a < 0 for a in areas]
    if sum(signs) == 1:
        return signs.index(True)
    if sum(signs) == len(areas) - 1:
        return signs.index(False)
    raise AssertionError("could not identify the outer face by orientation")


def unit_cube_box(d: int, n: int) -> WeightedGraph:
    """Nearest-neighbor graph of the 1/n-spaced grid strictly inside the unit
    cube, exterior wired: interior (n-1)^d, labels are integer coordinates
    in 1..n-1."""
    offs = tuple(tuple(1 if i == k else 0 for i in range(d)) for k in range(d))
    graph, _ = _patch_graph((n - 1,) * d, offs)
    # relabel from 0-based patch coordinates to 1..n-1 grid coordinates
    labels = [tuple(x + 1 for x in c) if c != BOUNDARY_LABEL else c
              for c in graph.labels]
    return WeightedGraph(graph.edges, graph.boundary, labels)


def ell_star_finite(graph: WeightedGraph) -> float:
    """Exact finite-graph expected boundary weight of the floating component."""
    return expected_boundary(graph)


_PERIODIC = {
    # family: (vertices per cell, edges per cell, degree)
    "square": (1, 2, 4),
    "triangular": (1, 3, 6),
    "hexagonal": (2, 3, 3),
}


def ell_star_periodic(family: str, dimension: int = 2) -> Fraction:
    """Infinite-lattice limit of the expected boundary size, from the
    fundamental-domain potential-kernel sum. On these edge-transitive
    families every directed nearest-neighbor kernel value is 1/degree, so the
    result is an exact rational: n0 * degree^2 / edges_per_cell."""
    if family == "cubic":
        if dimension < 1:
            raise UnsupportedFamily("cubic dimension must be >= 1")
        n0, edges, deg = 1, dimension, 2 * dimension
    elif family in _PERIODIC:
        n0, edges, deg = _PERIODIC[family]
    else:
        raise UnsupportedFamily(f"unknown lattice family {family!r}")
    per_edge = Fraction(1, deg) * Fraction(1, deg)  # A_uv * A_vu, symmetric
    return Fraction(n0) / (edges * per_edge)


def grid_ratio(n: int) -> float:
    """(kappa2/kappa) / n^2 for the free n x n grid; tends to 1/8."""
    built = square_grid(n)
    return ratio_k2_over_k(built.graph) / n**2


def _eigenvalue_sum(parts: np.ndarray, d: int) -> np.ndarray:
    acc = np.zeros(1)
    for _ in range(d):
        acc = (acc[:, None] + parts[None, :]).ravel()
    return acc


def torus_green_trace(d: int, n: int) -> float:
    """Normalized trace of the pseudo-inverse of the d-torus Laplacian of side
    n: the eigen-sum over k in {1..n}^d of 1/(4 sum_i sin^2(pi k_i/n)), leaving
    out the all-k_i = n constant mode, divided by n^d."""
    if d < 1 or n < 2:
        raise ValueError("need d >= 1 and n >= 2")
    k = np.arange(1, n + 1)
    s = 4.0 * np.sin(np.pi * k / n) ** 2
    lam = _eigenvalue_sum(s, d)
    # the all-k_i = n entry is the last in C order and is the only zero
    lam = np.delete(lam, lam.size - 1)
    assert np.all(lam > 0)
    return float(np.sum(1.0 / lam) / n**d)


def box_green_trace(d: int, n: int) -> float:
    """Mean Dirichlet Green diagonal of the wired cubic box of size n
    (interior side m = 2n-1): separable sine eigenbasis gives the trace as an
    exact eigen-sum, divided by the full vertex count m^d + 1."""
    if d < 1 or n < 2:
        raise ValueError("need d >= 1 and n >= 2")
    m = 2 * n - 1
    j = np.arange(1, m + 1)
    mu = 4.0 * np.sin(np.pi * j / (2 * (m + 1))) ** 2
    lam = _eigenvalue_sum(mu, d)
    return float(np.sum(1.0 / lam) / (m**d + 1))


def resistance_limit(d: int) -> tuple[float, float]:
    """Infinite-lattice mean resistance R*: the Brillouin-zone integral
    (2pi)^-d int dtheta / (2d - 2 sum cos theta_i), evaluated through its
    exact exponential-Bessel form int_0^inf [e^-2t I0(2t)]^d dt (same
    integral, substitution 1/x = int e^-xt dt). Returns (value, error
    estimate). Diverges logarithmically for d <= 2."""
    if d <= 2:
        raise DivergentIntegral(
            f"the resistance integral diverges for d = {d} (recurrent walk)")
    val, err = integrate.quad(lambda t: special.i0e(2.0 * t) ** d, 0.0, np.inf,
                              limit=400)
    return float(val), float(err)


def exit_time_constant(sides, truncation: int = 199) -> tuple[float, float]:
    """Cuboid exit-time constant: the odd-index series
    (4^(2d)/pi^(2d+2)) * sum prod 1/(a_i n_i^2) * (sum n_i^2/a_i^2)^-1,
    truncated at n_i <= truncation. Returns (value, tail bound).

    Note on conventions: this series equals 2^d times the limit of
    E(tau_b)/(|D| n^2) on wired boxes; see hitting_time_constant.
    """
    sides = tuple(float(a) for a in sides)
    d = len(sides)
    if d < 1 or any(a <= 0 for a in sides):
        raise ValueError("need positive side lengths")
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    ns = np.arange(1.0, truncation + 1.0, 2.0)
    prod_part = np.ones(1)
    sum_part = np.zeros(1)
    for a in sides:
        prod_part = (prod_part[:, None] / (a * ns[None, :] ** 2)).ravel()
        sum_part = (sum_part[:, None] + ns[None, :] ** 2 / a**2).ravel()
    total = float(np.sum(prod_part / sum_part))
    pref = 4.0 ** (2 * d) / np.pi ** (2 * d + 2)
    # tail: a term with some n_i > N is bounded by prod 1/(a_i n_i^2) times
    # a_max^2/n_i^2; sum over which coordinate exceeds N
    a_max = max(sides)
    odd_sq_sum = np.pi**2 / 8.0  # sum over odd n of 1/n^2
    tail_one = 0.5 / (3.0 * truncation**3)  # sum over odd n > N of 1/n^4
    tail = (pref * d * (a_max**2 / np.prod(sides))
            * odd_sq_sum ** (d - 1) * tail_one)
    return pref * total, float(tail)


def hitting_time_constant(sides, truncation: int = 199) -> float:
    """lim E(tau_b)/(|D| n^2) for wired boxes over the cuboid with the given
    sides: the exit-time series divided by 2^d (the series carries the
    torsional-rigidity normalization, which is 2^d times this limit)."""
    d = len(tuple(sides))
    return exit_time_constant(sides, truncation)[0] / 2.0**d


def unit_square_green(z, zp, tol: float = 1e-8) -> float:
    """Dirichlet Green's function of the Laplacian on the unit square
    (-lap g = delta), from the sine eigenfunction series with the transverse
    index summed in closed form. The leading exponential part of the reduced
    series is also summed in closed form, so the numerical remainder decays
    geometrically for every interior pair; summation is compensated and
    truncated when the rigorous tail bound drops below ``tol``.

    Returns inf when z == zp (logarithmic diagonal singularity).
    """
    x, y = float(z[0]), float(z[1])
    xp, yp = float(zp[0]), float(zp[1])
    for t in (x, y, xp, yp):
        if not (0.0 < t < 1.0):
            raise PointOnBoundary(f"coordinate {t} is not strictly inside (0,1)")
    if (x, y) == (xp, yp):
        return math.inf
    A = math.pi * (x - xp)
    B = math.pi * (x + xp)
    delta = abs(y - yp)
    s = y + yp
    q = math.exp(-math.pi * delta)
    # closed form of the q^j/2 part: (1/4pi) log[(1-2q cosB+q^2)/(1-2q cosA+q^2)]
    num = 1.0 - 2.0 * q * math.cos(B) + q * q
    den = 1.0 - 2.0 * q * math.cos(A) + q * q
    total = math.log(num / den) / (4.0 * math.pi)
    comp = 0.0
    decay = min(2.0 - delta, s, 2.0 - s)
    j = 0
    while True:
        j += 1
        e = math.pi * j
        numer = (math.exp(-e * (2.0 - delta)) + math.exp(-e * (2.0 + delta))
                 - math.exp(-e * (2.0 - s)) - math.exp(-e * s))
        c = numer / (2.0 * (1.0 - math.exp(-2.0 * e)))
        term = c * (math.cos(j * A) - math.cos(j * B)) / (j * math.pi)
        yk = term - comp
        t2 = total + yk
        comp = (t2 - total) - yk
        total = t2
        bound = (2.0 * math.exp(-math.pi * (j + 1) * decay)
                 / (math.pi * (j + 1) * (1.0 - math.exp(-2.0 * math.pi))
                    * (1.0 - math.exp(-math.pi * decay))))
        if bound < tol:
            return total


def green_scaling_check(n: int, z, zp) -> tuple[float, float]:
    """Exact pair-inclusion probability on the wired unit-square box at the
    lattice points nearest z, zp, against the continuum prediction
    4d * g0(z, zp) / (|D| n^(2d-2)) = 8 g0 / n^2. A convergence diagnostic,
    not an equality."""
    box = unit_cube_box(2, n)
    def nearest(pt):
        i = round(pt[0] * n)
        j = round(pt[1] * n)
        if not (1 <= i <= n - 1 and 1 <= j <= n - 1):
            raise PointOnBoundary(f"point {pt} has no interior lattice neighbor")
        return box.index_of((i, j))
    zi, zj = nearest(z), nearest(zp)
    oracle = factorize(box)
    if zi == zj:
        lhs = prob_in_sigma(box, zi, oracle=oracle)
    else:
        lhs = prob_pair_in_sigma(box, zi, zj, oracle=oracle)
    rhs = 8.0 * unit_square_green(z, zp) / n**2
    return lhs, rhs

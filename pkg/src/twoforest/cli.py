"""Batch command-line front end.

Commands: stats, verify, sample, lattice, dual. Every run emits its resolved
configuration next to the results so outputs are reproducible byte for byte
given (input, flags). JSON is canonical (floats at 17 significant digits);
CSV is a projection of the per-vertex / per-edge tables.

Exit codes: 0 ok, 2 input error, 3 numerical failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import census as census_mod
from . import lattice as lattice_mod
from . import planar as planar_mod
from . import sampling as sampling_mod
from . import stats as stats_mod
from .errors import (
    GraphInputError,
    NonPlanarMap,
    NumericalError,
    TooLarge,
    TwoForestError,
    UnsupportedFamily,
)
from .graph import WeightedGraph, parse_edge_list, parse_graph_json
from .green import factorize

EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return '"%s"' % repr(x)
        return format(x, ".17g")
    return None


def render_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k, v in obj.items():
            items.append(f'{pad}  "{k}": {render_json(v, indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {render_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, int):
        return str(obj)
    return '"%s"' % str(obj).replace("\\", "\\\\").replace('"', '\\"')


def _emit(obj, fmt: str, csv_tables=None):
    if fmt == "json":
        print(render_json(obj))
    else:
        for name, header, rows in (csv_tables or []):
            print(f"# {name}")
            print(",".join(header))
            for row in rows:
                print(",".join(_fmt(v) if isinstance(v, float) else str(v)
                               for v in row))
            print()


def _load_graph(args) -> WeightedGraph:
    text = Path(args.input).read_text()
    if args.input.endswith(".json"):
        return parse_graph_json(text, args.boundary)
    if args.boundary is None:
        raise GraphInputError("--boundary is required for edge-list input")
    return parse_edge_list(text, args.boundary)


def _config_dict(args, fields) -> dict:
    return {f: getattr(args, f) for f in fields if getattr(args, f, None) is not None}


def cmd_stats(args) -> int:
    graph = _load_graph(args)
    oracle = factorize(graph)
    fs = stats_mod.forest_statistics(graph, oracle=oracle,
                                     weighted=not args.strict_paper)
    ratio = fs.ratio_k2_k
    per_vertex = []
    for v in range(graph.vertex_count):
        if v == graph.boundary:
            continue
        per_vertex.append({
            "vertex": str(graph.labels[v]),
            "prob_in_sigma": stats_mod.prob_in_sigma(graph, v, oracle=oracle,
                                                     ratio=ratio),
        })
    per_edge = []
    for e in range(graph.edge_count):
        u, v = graph.endpoints(e)
        per_edge.append({
            "edge": e,
            "u": str(graph.labels[u]),
            "v": str(graph.labels[v]),
            "conductance": graph.conductance(e),
            "prob_separates": stats_mod.prob_edge_separates(
                graph, e, oracle=oracle, ratio=ratio),
        })
    report = {
        "config": _config_dict(args, ("command", "input", "boundary", "format",
                                      "strict_paper")),
        "results": [
            {"quantity": "log_kappa", "value": fs.log_kappa, "formula_id": "matrix_tree"},
            {"quantity": "ratio_k2_k", "value": fs.ratio_k2_k, "formula_id": "kernel_sum"},
            {"quantity": "expected_boundary", "value": fs.ell_star, "formula_id": "tree_edge_count"},
            {"quantity": "mean_size", "value": fs.mean_size, "formula_id": "green_trace"},
            {"quantity": "second_moment", "value": fs.second_moment, "formula_id": "green_sum"},
            {"quantity": "mean_resistance", "value": fs.mean_resistance, "formula_id": "green_trace"},
            {"quantity": "hitting_sum", "value": fs.hitting_sum, "formula_id": "green_sum"},
        ],
        "per_vertex": per_vertex,
        "per_edge": per_edge,
    }
    _emit(report, args.format, csv_tables=[
        ("vertices", ("vertex", "prob_in_sigma"),
         [(r["vertex"], r["prob_in_sigma"]) for r in per_vertex]),
        ("edges", ("edge", "u", "v", "conductance", "prob_separates"),
         [(r["edge"], r["u"], r["v"], r["conductance"], r["prob_separates"])
          for r in per_edge]),
    ])
    return 0


def cmd_verify(args) -> int:
    graph = _load_graph(args)
    census = census_mod.enumerate_census(graph)
    oracle = factorize(graph)
    ratio = stats_mod.ratio_k2_over_k(graph, oracle=oracle)
    tol = args.tolerance
    rows = []

    def check(name, formula, exact):
        exact = float(exact)
        err = abs(formula - exact) / max(1.0, abs(exact))
        rows.append({"quantity": name, "formula": formula, "oracle": exact,
                     "abs_error": abs(formula - exact), "pass": err <= tol})

    check("kappa", math.exp(oracle.log_kappa), census.kappa)
    check("ratio_k2_k", ratio, census.ratio)
    mom = stats_mod.size_moments(graph, oracle=oracle, ratio=ratio)
    check("mean_size", mom.mean, census_mod.exact_statistic(census, "mean_size"))
    check("second_moment", mom.second_moment,
          census_mod.exact_statistic(census, "second_moment"))
    check("expected_boundary", stats_mod.expected_boundary(graph, ratio=ratio),
          census_mod.exact_statistic(census, "expected_boundary"))
    for v in range(graph.vertex_count):
        if v == graph.boundary:
            continue
        check(f"prob_in_sigma[{graph.labels[v]}]",
              stats_mod.prob_in_sigma(graph, v, oracle=oracle, ratio=ratio),
              census_mod.exact_statistic(census, "prob_in_sigma", v))
    for e in range(graph.edge_count):
        check(f"prob_edge_separates[{e}]",
              stats_mod.prob_edge_separates(graph, e, oracle=oracle, ratio=ratio),
              census_mod.exact_statistic(census, "prob_edge_separates", e))
    if args.samples:
        chi2, p, dof = sampling_mod.chi_square_forest_fit(
            graph, census, args.samples, args.seed, workers=args.workers)
        rows.append({"quantity": "sampler_chi2", "formula": chi2,
                     "oracle": float(dof), "abs_error": 0.0,
                     "pass": p >= 1e-3})
        rows.append({"quantity": "sampler_chi2_pvalue", "formula": p,
                     "oracle": 1e-3, "abs_error": 0.0, "pass": p >= 1e-3})
    ok = all(r["pass"] for r in rows)
    report = {
        "config": _config_dict(args, ("command", "input", "boundary",
                                      "tolerance", "samples", "seed", "workers")),
        "rows": rows,
        "pass": ok,
    }
    _emit(report, args.format, csv_tables=[
        ("verify", ("quantity", "formula", "oracle", "abs_error", "pass"),
         [(r["quantity"], r["formula"], r["oracle"], r["abs_error"], r["pass"])
          for r in rows]),
    ])
    return 0 if ok else EXIT_VERIFY


def cmd_sample(args) -> int:
    if args.input:
        graph = _load_graph(args)
    else:
        graph = lattice_mod.build_lattice(
            lattice_mod.LatticeSpec(args.family, args.n, args.d)).graph
    vertices = tuple(int(v) for v in args.vertices.split(",")) if args.vertices else ()
    est = sampling_mod.estimate(graph, args.stat, args.samples, args.seed,
                                workers=args.workers, vertices=vertices,
                                edge=args.edge)
    report = {
        "config": _config_dict(args, ("command", "input", "family", "n",
                                      "stat", "samples", "seed", "workers")),
        "statistic": est.statistic,
        "mean": est.mean,
        "stderr": est.stderr,
        "count": est.count,
        "acceptance_rate": est.acceptance_rate,
    }
    if args.emit == "per-sample":
        batch = sampling_mod.sample_batch(graph, args.samples, args.seed,
                                          workers=args.workers)
        _emit(report, "csv", csv_tables=[
            ("samples", ("index", "size", "boundary_weight", "proposals"),
             [(i, int(batch.sizes[i]), float(batch.boundary_weight[i]),
               int(batch.proposals[i])) for i in range(batch.count)]),
        ])
        return 0
    _emit(report, args.format)
    return 0


def cmd_lattice(args) -> int:
    q = args.quantity
    result: dict = {"config": _config_dict(
        args, ("command", "family", "n", "d", "quantity"))}
    if q == "ell-star":
        if args.n:
            built = lattice_mod.build_lattice(
                lattice_mod.LatticeSpec(args.family, args.n, args.d))
            result["value"] = lattice_mod.ell_star_finite(built.graph)
        else:
            result["value"] = float(lattice_mod.ell_star_periodic(args.family, args.d))
            result["exact"] = str(lattice_mod.ell_star_periodic(args.family, args.d))
    elif q == "ratio":
        result["value"] = lattice_mod.grid_ratio(args.n)
    elif q == "Rn":
        result["value"] = lattice_mod.torus_green_trace(args.d, args.n)
        result["box_trace"] = lattice_mod.box_green_trace(args.d, args.n)
    elif q == "Rstar":
        val, err = lattice_mod.resistance_limit(args.d)
        result["value"] = val
        result["error_estimate"] = err
    elif q == "CD":
        sides = tuple(float(s) for s in args.sides.split(","))
        val, tail = lattice_mod.exit_time_constant(sides, args.truncation)
        result["value"] = val
        result["tail_bound"] = tail
        result["hitting_normalization"] = lattice_mod.hitting_time_constant(
            sides, args.truncation)
    elif q == "green-scaling":
        z = tuple(float(s) for s in args.z.split(","))
        zp = tuple(float(s) for s in args.zp.split(","))
        lhs, rhs = lattice_mod.green_scaling_check(args.n, z, zp)
        result["exact_pair_probability"] = lhs
        result["continuum_prediction"] = rhs
        result["ratio"] = lhs / rhs
    else:
        raise UnsupportedFamily(f"unknown quantity {q!r}")
    _emit(result, args.format)
    return 0


def cmd_dual(args) -> int:
    import json as _json
    obj = _json.loads(Path(args.map).read_text())
    pmap = planar_mod.planar_map_from_json(obj)
    st = planar_mod.unicycle_stats(pmap)
    report = {
        "config": _config_dict(args, ("command", "map", "format")),
        "log_lambda": st.log_lambda,
        "area_mean": st.area_mean,
        "area_second_moment": st.area_second_moment,
        "per_face": [{"face": f, "prob_enclosed": p}
                     for f, p in enumerate(st.face_enclosure_probs)
                     if f != pmap.outer_face],
        "per_edge": [{"edge": e, "prob_in_cycle": p}
                     for e, p in enumerate(st.cycle_edge_probs)],
    }
    _emit(report, args.format, csv_tables=[
        ("faces", ("face", "prob_enclosed"),
         [(r["face"], r["prob_enclosed"]) for r in report["per_face"]]),
        ("edges", ("edge", "prob_in_cycle"),
         [(r["edge"], r["prob_in_cycle"]) for r in report["per_edge"]]),
    ])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="twoforest",
        description="Exact statistics and Monte Carlo sampling of random "
                    "two-component spanning forests.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, input_required=True):
        sp.add_argument("--input", required=input_required,
                        help="edge list file ('u v [c]' lines) or .json graph")
        sp.add_argument("--boundary", help="boundary vertex label")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("stats", help="closed-form forest statistics")
    common(sp)
    sp.add_argument("--strict-paper", action="store_true", dest="strict_paper",
                    help="use the unit-weight ratio rule verbatim")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("verify", help="formulas vs brute-force enumeration")
    common(sp)
    sp.add_argument("--tolerance", type=float, default=1e-9)
    sp.add_argument("--samples", type=int, default=0,
                    help="also chi-square test the sampler with this many draws")
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sample", help="Monte Carlo estimates")
    common(sp, input_required=False)
    sp.add_argument("--family", default="square")
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--stat", default="mean_size",
                    choices=sampling_mod.SAMPLE_STATISTICS)
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--vertices", help="comma-separated vertex ids for prob_* stats")
    sp.add_argument("--edge", type=int, help="edge id for prob_edge_separates")
    sp.add_argument("--emit", choices=("summary", "per-sample"), default="summary")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("lattice", help="lattice constants and trends")
    sp.add_argument("--family", default="square")
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--quantity", required=True,
                    choices=("ell-star", "ratio", "Rn", "Rstar", "CD",
                             "green-scaling"))
    sp.add_argument("--sides", default="1,1", help="cuboid sides for CD")
    sp.add_argument("--truncation", type=int, default=199)
    sp.add_argument("--z", default="0.25,0.5")
    sp.add_argument("--zp", default="0.75,0.5")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_lattice)

    sp = sub.add_parser("dual", help="unicycle statistics of an embedded map")
    sp.add_argument("--map", required=True, help="JSON planar map file")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_dual)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphInputError, TooLarge, UnsupportedFamily, NonPlanarMap,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TwoForestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

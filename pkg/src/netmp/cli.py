"""Command-line front end.

One subcommand per algorithm plus graph generation and the simulation
oracle.  Graphs come from a file (--graph) or the generator mini-language
(--gen kind:args): er:n:p, regular:n:d, sbm:n:q:cin:cout, tri:n.  Output is
CSV (provenance in leading # comments, then header and rows) or JSON
validating against schemas/sweep.schema.json.  Runs are deterministic for a
fixed command line and seed; NETMP_SEED is the seed fallback.

Exit codes: 0 success, 1 runtime/input error, 2 usage error, 3 completed
but some grid points failed to converge (results still emitted).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from netmp import __version__
from netmp.community import SBMParams, overlap, sbm_bp
from netmp.engine import FixedPointConfig
from netmp.errors import NetmpError
from netmp.generators import (
    generate_er,
    generate_regular,
    generate_sbm,
    generate_triangle_mesh,
)
from netmp.graph import Graph, edge_list_text, load_edge_list
from netmp.halfedge import HalfEdgeIndex, nb_leading_eigenvalue
from netmp.ising import IsingParams, ising_critical_temperature, solve_ising
from netmp.loopy import sweep_loopy_percolation
from netmp.oracles import percolation_sim
from netmp.percolation import percolation_threshold, sweep_percolation
from netmp.results import SweepResult
from netmp.spectra import SpectralParams, sweep_spectral_density

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_UNCONVERGED = 3


def _parse_grid(text: str) -> np.ndarray:
    """start:stop:step (inclusive of both ends) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(round((stop - start) / step)) + 1
        grid = start + step * np.arange(count)
        return grid[grid <= stop + 1e-12]
    return np.asarray([float(x) for x in text.split(",")])


def _parse_gen(spec: str, seed: int) -> tuple[Graph, np.ndarray | None, dict]:
    """Build a graph from the generator mini-language; returns truth labels for sbm."""
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "er":
            n, p = int(parts[1]), float(parts[2])
            return generate_er(n, p, seed), None, {"gen": spec}
        if kind == "regular":
            n, d = int(parts[1]), int(parts[2])
            return generate_regular(n, d, seed), None, {"gen": spec}
        if kind == "sbm":
            n, q = int(parts[1]), int(parts[2])
            c_in, c_out = float(parts[3]), float(parts[4])
            omega = np.full((q, q), c_out / n)
            np.fill_diagonal(omega, c_in / n)
            graph, truth = generate_sbm(n, q, np.full(q, 1.0 / q), omega, seed)
            return graph, truth, {"gen": spec, "q": q, "c_in": c_in, "c_out": c_out}
        if kind == "tri":
            n = int(parts[1])
            return generate_triangle_mesh(n, seed), None, {"gen": spec}
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown generator kind {kind!r} (er, regular, sbm, tri)")


def _load_graph(args, seed: int) -> tuple[Graph, np.ndarray | None, dict]:
    if getattr(args, "gen", None):
        return _parse_gen(args.gen, seed)
    with open(args.graph, encoding="utf-8") as fh:
        graph, stats = load_edge_list(fh.read())
    meta = {"path": args.graph}
    if stats.self_loops_dropped or stats.duplicates_dropped:
        print(
            f"note: dropped {stats.self_loops_dropped} self-loop(s) and "
            f"{stats.duplicates_dropped} duplicate(s)",
            file=sys.stderr,
        )
    return graph, None, meta


def _graph_hash(graph: Graph) -> str:
    payload = f"n={graph.n}\n{edge_list_text(graph)}"
    return hashlib.sha256(payload.encode()).hexdigest()


def _meta(command: str, graph: Graph, seed: int, params: dict) -> dict:
    return {
        "tool": "netmp",
        "version": __version__,
        "command": command,
        "seed": seed,
        "graph": {"hash": _graph_hash(graph), "n": graph.n, "m": graph.m},
        "params": params,
    }


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".netmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _sweep_csv(res: SweepResult, meta: dict) -> str:
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(meta.items())]
    lines.append(f"{res.parameter},{res.value_name},converged,iterations,residual")
    for x, y, rep in res.rows():
        lines.append(
            f"{_fmt(x)},{_fmt(y)},{_fmt(rep.converged)},{rep.iterations},{_fmt(rep.residual)}"
        )
    return "\n".join(lines) + "\n"


def _sweep_json(res: SweepResult, meta: dict, per_node: dict | None = None) -> str:
    obj = {
        "meta": meta,
        "grid": {"parameter": res.parameter, "values": [float(x) for x in res.grid]},
        "series": {res.value_name: [float(v) for v in res.values]},
        "convergence": [
            {"converged": bool(r.converged), "iterations": int(r.iterations),
             "residual": float(r.residual)}
            for r in res.reports
        ],
    }
    if per_node:
        obj["per_node"] = per_node
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _per_node_csv(meta: dict, header: list[str], columns: list[np.ndarray]) -> str:
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(meta.items())]
    lines.append(",".join(["node"] + header))
    for i in range(columns[0].shape[0]):
        lines.append(",".join([str(i)] + [_fmt(c[i]) for c in columns]))
    return "\n".join(lines) + "\n"


def _config_from(args, **overrides) -> FixedPointConfig:
    kwargs = {
        "tol": args.tol,
        "max_iter": args.max_iter,
        "seed": args.seed,
    }
    if getattr(args, "damping", None) is not None:
        kwargs["damping"] = args.damping
    kwargs.update(overrides)
    return FixedPointConfig(**kwargs)


def _add_common(sub, grid_flag: str | None = None) -> None:
    src = sub.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="edge-list file")
    src.add_argument("--gen", help="generator spec kind:args (er:n:p, regular:n:d, sbm:n:q:cin:cout, tri:n)")
    sub.add_argument("--seed", type=int, default=None,
                     help="RNG seed (default: NETMP_SEED or 0)")
    sub.add_argument("--tol", type=float, default=1e-10)
    sub.add_argument("--max-iter", type=int, default=100_000)
    sub.add_argument("--threads", type=int, default=1,
                     help="reserved; results never depend on it")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", help="output path (atomic write); default stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netmp",
        description="Message passing computations on sparse networks",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("generate", help="write a generated graph as an edge list")
    g.add_argument("spec", help="generator spec kind:args")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out")

    p = sub.add_parser("percolate", help="giant-cluster size via message passing")
    _add_common(p)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--p", type=float)
    grid.add_argument("--p-grid", type=str)
    p.add_argument("--per-node", action="store_true",
                   help="emit per-node probabilities (single --p only)")
    p.add_argument("--no-warm-start", action="store_true")

    t = sub.add_parser("threshold", help="non-backtracking eigenvalue and thresholds")
    _add_common(t)

    i = sub.add_parser("ising", help="magnetization sweep over temperature")
    _add_common(i)
    gridi = i.add_mutually_exclusive_group(required=True)
    gridi.add_argument("--t", type=float)
    gridi.add_argument("--t-grid", type=str)
    i.add_argument("--with-partition", action="store_true",
                   help="add log_Z and free-energy columns")

    s = sub.add_parser("spectrum", help="spectral density over an x grid")
    _add_common(s)
    s.add_argument("--x", required=True, help="grid start:stop:step")
    s.add_argument("--eta", type=float, default=0.01)
    s.add_argument("--damping", type=float, default=0.5)

    c = sub.add_parser("communities", help="SBM belief propagation")
    _add_common(c)
    c.add_argument("--q", type=int, default=None)
    c.add_argument("--cin", type=float, default=None)
    c.add_argument("--cout", type=float, default=None)
    c.add_argument("--truth", action="store_true",
                   help="score overlap against generator labels (sbm gen only)")

    lp = sub.add_parser("loopy-percolate", help="percolation with loop corrections")
    _add_common(lp)
    gridl = lp.add_mutually_exclusive_group(required=True)
    gridl.add_argument("--p", type=float)
    gridl.add_argument("--p-grid", type=str)
    lp.add_argument("--r", type=int, default=4, help="maximum primitive-cycle length")
    lp.add_argument("--mode", default="exact", help="exact or mc:SAMPLES")

    sim = sub.add_parser("simulate", help="direct percolation simulation (oracle)")
    _add_common(sim)
    grids = sim.add_mutually_exclusive_group(required=True)
    grids.add_argument("--p", type=float)
    grids.add_argument("--p-grid", type=str)
    sim.add_argument("--reps", type=int, default=1000)
    sim.add_argument("--per-node", action="store_true")
    return parser


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("NETMP_SEED", "0"))


def _run_generate(args) -> int:
    seed = _resolve_seed(args)
    graph, _, _ = _parse_gen(args.spec, seed)
    _emit(edge_list_text(graph), args.out)
    return EXIT_OK


def _sweep_exit(res: SweepResult) -> int:
    return EXIT_OK if res.all_converged else EXIT_UNCONVERGED


def _run_percolate(args) -> int:
    seed = _resolve_seed(args)
    graph, _, gmeta = _load_graph(args, seed)
    if graph.n == 0:
        raise ValueError("graph has no nodes")
    config = _config_from(args)
    grid = np.asarray([args.p]) if args.p is not None else _parse_grid(args.p_grid)
    res = sweep_percolation(graph, grid, config, warm_start=not args.no_warm_start)
    meta = _meta("percolate", graph, seed, {**gmeta, "tol": args.tol})
    per_node = None
    if args.per_node:
        if grid.shape[0] != 1:
            raise ValueError("--per-node needs a single --p")
        from netmp.percolation import solve_percolation

        sol = solve_percolation(graph, float(grid[0]), config)
        per_node = {"mu": [float(v) for v in sol.node_probabilities]}
    if args.format == "json":
        _emit(_sweep_json(res, meta, per_node), args.out)
    elif per_node is not None:
        _emit(_per_node_csv(meta, ["mu"], [np.asarray(per_node["mu"])]), args.out)
    else:
        _emit(_sweep_csv(res, meta), args.out)
    return _sweep_exit(res)


def _run_threshold(args) -> int:
    seed = _resolve_seed(args)
    graph, _, gmeta = _load_graph(args, seed)
    thr = percolation_threshold(graph, tol=args.tol, max_iter=args.max_iter)
    crit = ising_critical_temperature(graph, tol=args.tol, max_iter=args.max_iter)
    meta = _meta("threshold", graph, seed, gmeta)
    if args.format == "json":
        obj = {
            "meta": meta,
            "series": {
                "lambda": [thr.leading_eigenvalue],
                "p_c": [thr.p_c if thr.has_transition else None],
                "beta_c": [crit.beta_c if crit.has_transition else None],
                "T_c": [crit.t_c if crit.has_transition else None],
            },
        }
        _emit(json.dumps(obj, sort_keys=True, indent=2) + "\n", args.out)
        return EXIT_OK
    lines = [f"lambda {_fmt(thr.leading_eigenvalue)}"]
    if thr.has_transition:
        lines.append(f"p_c {_fmt(thr.p_c)}")
    else:
        lines.append("p_c no transition")
    if crit.has_transition:
        lines.append(f"beta_c {_fmt(crit.beta_c)}")
        lines.append(f"T_c {_fmt(crit.t_c)}")
    else:
        lines.append("beta_c no transition")
        lines.append("T_c no transition")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _run_ising(args) -> int:
    seed = _resolve_seed(args)
    graph, _, gmeta = _load_graph(args, seed)
    config = _config_from(args, init="tilt")
    grid = np.asarray([args.t]) if args.t is not None else _parse_grid(args.t_grid)
    if (grid <= 0).any():
        raise ValueError("temperatures must be positive")
    index = HalfEdgeIndex(graph)
    values, reports, extra = [], [], {"log_z": [], "free_energy": []}
    prev = None
    for t in grid:
        res = solve_ising(graph, IsingParams(1.0 / float(t)), config,
                          index=index, initial=prev)
        prev = res.messages
        values.append(abs(res.magnetization))
        reports.append(res.report)
        extra["log_z"].append(res.log_z)
        extra["free_energy"].append(res.free_energy)
    sweep = SweepResult("T", grid, np.asarray(values), reports, value_name="abs_m")
    meta = _meta("ising", graph, seed, {**gmeta, "tol": args.tol})
    if args.format == "json":
        text = _sweep_json(sweep, meta)
        if args.with_partition:
            obj = json.loads(text)
            obj["series"].update(extra)
            text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
        _emit(text, args.out)
    else:
        if args.with_partition:
            lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(meta.items())]
            lines.append("T,abs_m,log_z,free_energy,converged,iterations,residual")
            for k, (x, y, rep) in enumerate(sweep.rows()):
                f = extra["free_energy"][k]
                lines.append(
                    f"{_fmt(x)},{_fmt(y)},{_fmt(extra['log_z'][k])},"
                    f"{_fmt(f) if f is not None else ''},"
                    f"{_fmt(rep.converged)},{rep.iterations},{_fmt(rep.residual)}"
                )
            _emit("\n".join(lines) + "\n", args.out)
        else:
            _emit(_sweep_csv(sweep, meta), args.out)
    return _sweep_exit(sweep)


def _run_spectrum(args) -> int:
    seed = _resolve_seed(args)
    graph, _, gmeta = _load_graph(args, seed)
    config = _config_from(args)
    params = SpectralParams(_parse_grid(args.x), args.eta)
    res = sweep_spectral_density(graph, params, config)
    meta = _meta("spectrum", graph, seed,
                 {**gmeta, "eta": args.eta, "mass": res.meta["mass"], "tol": args.tol})
    if args.format == "json":
        _emit(_sweep_json(res, meta), args.out)
    else:
        _emit(_sweep_csv(res, meta), args.out)
    return _sweep_exit(res)


def _run_communities(args) -> int:
    seed = _resolve_seed(args)
    graph, truth, gmeta = _load_graph(args, seed)
    q = args.q or gmeta.get("q")
    c_in = args.cin if args.cin is not None else gmeta.get("c_in")
    c_out = args.cout if args.cout is not None else gmeta.get("c_out")
    if q is None or c_in is None or c_out is None:
        raise ValueError("need --q, --cin, --cout (or an sbm generator spec)")
    params = SBMParams.planted(graph.n, c_in, c_out, q)
    config = _config_from(args)
    _, result = sbm_bp(graph, params, config)
    meta_params = {**gmeta, "q": q, "c_in": c_in, "c_out": c_out, "tol": args.tol}
    if args.truth:
        if truth is None:
            raise ValueError("--truth requires an sbm generator spec")
        meta_params["overlap"] = overlap(result.hard_labels, truth, q)
    meta = _meta("communities", graph, seed, meta_params)
    if args.format == "json":
        obj = {
            "meta": meta,
            "per_node": {
                "label": [int(x) for x in result.hard_labels],
                "marginals": [[float(v) for v in row] for row in result.marginals],
            },
            "convergence": [{
                "converged": bool(result.report.converged),
                "iterations": int(result.report.iterations),
                "residual": float(result.report.residual),
            }],
        }
        _emit(json.dumps(obj, sort_keys=True, indent=2) + "\n", args.out)
    else:
        cols = [result.hard_labels] + [result.marginals[:, r] for r in range(q)]
        headers = ["label"] + [f"q{r}" for r in range(q)]
        _emit(_per_node_csv(meta, headers, cols), args.out)
    return EXIT_OK if result.report.converged else EXIT_UNCONVERGED


def _run_loopy(args) -> int:
    seed = _resolve_seed(args)
    graph, _, gmeta = _load_graph(args, seed)
    config = _config_from(args)
    grid = np.asarray([args.p]) if args.p is not None else _parse_grid(args.p_grid)
    mode, samples = args.mode, 10
    if mode.startswith("mc"):
        parts = mode.split(":")
        samples = int(parts[1]) if len(parts) > 1 else 10
        mode = "monte-carlo"
    elif mode != "exact":
        raise ValueError(f"mode must be exact or mc:SAMPLES, got {args.mode!r}")
    res = sweep_loopy_percolation(graph, grid, args.r, config, mode=mode, samples=samples)
    meta = _meta("loopy-percolate", graph, seed,
                 {**gmeta, "r": args.r, "mode": mode, "samples": samples, "tol": args.tol})
    if args.format == "json":
        _emit(_sweep_json(res, meta), args.out)
    else:
        _emit(_sweep_csv(res, meta), args.out)
    return _sweep_exit(res)


def _run_simulate(args) -> int:
    seed = _resolve_seed(args)
    graph, _, gmeta = _load_graph(args, seed)
    grid = np.asarray([args.p]) if args.p is not None else _parse_grid(args.p_grid)
    meta = _meta("simulate", graph, seed, {**gmeta, "reps": args.reps})
    rows = []
    freqs = None
    for p in grid:
        stats = percolation_sim(graph, float(p), args.reps, seed)
        rows.append((float(p), stats.mean_s, stats.stderr))
        freqs = stats.frequencies
    if args.format == "json":
        obj = {
            "meta": meta,
            "grid": {"parameter": "p", "values": [r[0] for r in rows]},
            "series": {"S": [r[1] for r in rows], "stderr": [r[2] for r in rows]},
        }
        if args.per_node and grid.shape[0] == 1:
            obj["per_node"] = {"frequency": [float(v) for v in freqs]}
        _emit(json.dumps(obj, sort_keys=True, indent=2) + "\n", args.out)
    elif args.per_node and grid.shape[0] == 1:
        _emit(_per_node_csv(meta, ["frequency"], [freqs]), args.out)
    else:
        lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(meta.items())]
        lines.append("p,S,stderr")
        lines.extend(f"{_fmt(p)},{_fmt(s)},{_fmt(se)}" for p, s, se in rows)
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_RUNNERS = {
    "generate": _run_generate,
    "percolate": _run_percolate,
    "threshold": _run_threshold,
    "ising": _run_ising,
    "spectrum": _run_spectrum,
    "communities": _run_communities,
    "loopy-percolate": _run_loopy,
    "simulate": _run_simulate,
}


_GRID_FLAGS = ("--x", "--p-grid", "--t-grid")


def _join_grid_flags(argv: list[str]) -> list[str]:
    """Fold `--x -3:3:0.01` into `--x=-3:3:0.01` so argparse accepts it."""
    out = []
    skip = False
    for k, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok in _GRID_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{tok}={argv[k + 1]}")
            skip = True
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_grid_flags(list(sys.argv[1:] if argv is None else argv)))
    try:
        return _RUNNERS[args.subcommand](args)
    except (NetmpError, ValueError, OSError) as exc:
        print(f"netmp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

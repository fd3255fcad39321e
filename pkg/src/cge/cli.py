"""Command-line entry points for the planning pipeline.

Subcommands: gen-env, solve-vrp, build-pg, select-loops, finalize,
validate-fim, bench.  Every command exits 0 on success and 1 with a
stage-tagged message on stderr otherwise.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import bench as bench_mod
from .allocation import finalize as finalize_op
from .candidates import build_ground_set
from .env import generate_random_env, load_env, save_env, shortest_paths
from .fim import correlation_experiment
from .pipeline import StageError
from .posegraph import (build_collab_from_walks, load_posegraph,
                        reduced_weighted_laplacian, save_posegraph)
from .solvers import ALGORITHMS, run_solver
from .vrp import expand_to_walk, solve_vrp, vrp_from_dict, vrp_to_dict


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"[{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cge",
        description="multi-robot graph coverage with loop-edge selection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-env", help="generate a random environment graph")
    p.add_argument("--side", type=float, required=True)
    p.add_argument("--grid-step", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vertex-removal", type=float, default=0.10)
    p.add_argument("--edge-removal", type=float, default=0.03)
    p.add_argument("--noise-sigma", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_env)

    p = sub.add_parser("solve-vrp", help="open-route coverage pathfinding")
    p.add_argument("--env", required=True)
    p.add_argument("--starts", required=True,
                   help="comma-separated start vertex per robot")
    p.add_argument("--time-limit", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_solve_vrp)

    p = sub.add_parser("build-pg", help="build the collaborative pose graph")
    p.add_argument("--env", required=True)
    p.add_argument("--vrp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_pg)

    p = sub.add_parser("select-loops", help="select informative loop edges")
    p.add_argument("--env", required=True)
    p.add_argument("--pg", required=True)
    p.add_argument("--algo", choices=ALGORITHMS, default="sgre")
    p.add_argument("--lazy", action="store_true")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--lambda", dest="lam", type=float, default=0.3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_select_loops)

    p = sub.add_parser("finalize", help="insert selected edges into the paths")
    p.add_argument("--env", required=True)
    p.add_argument("--vrp", required=True)
    p.add_argument("--pg", required=True)
    p.add_argument("--sel", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_finalize)

    p = sub.add_parser("validate-fim",
                       help="correlation of the Laplacian surrogate with "
                            "the full Fisher information")
    p.add_argument("--side", type=float, default=120.0)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--robots", type=int, default=3)
    p.add_argument("--homogeneous", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_validate_fim)

    p = sub.add_parser("bench", help="seeded benchmark batches")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_bench)
    return parser


def _cmd_gen_env(args) -> int:
    env = generate_random_env(
        args.side, grid_step=args.grid_step,
        vertex_removal_frac=args.vertex_removal,
        edge_removal_frac=args.edge_removal,
        coord_noise_sigma=args.noise_sigma, seed=args.seed)
    save_env(env, args.out)
    print(f"wrote {args.out}: {env.n_vertices} vertices, {env.n_edges} edges")
    return 0


def _cmd_solve_vrp(args) -> int:
    env = load_env(args.env)
    starts = [int(s) for s in args.starts.split(",")]
    sol = solve_vrp(env, starts, time_limit_s=args.time_limit, seed=args.seed)
    with open(args.out, "w") as fh:
        json.dump(vrp_to_dict(sol), fh, indent=1)
    print(f"wrote {args.out}: makespan {sol.makespan:.2f} m over "
          f"{len(starts)} robots")
    return 0


def _load_walks(env, vrp_path):
    oracle = shortest_paths(env)
    with open(vrp_path) as fh:
        sol = vrp_from_dict(json.load(fh))
    walks = [expand_to_walk(env, oracle, route, r)
             for r, route in enumerate(sol.routes)]
    return oracle, sol, walks


def _cmd_build_pg(args) -> int:
    env = load_env(args.env)
    _, _, walks = _load_walks(env, args.vrp)
    cpg = build_collab_from_walks(walks)
    save_posegraph(cpg, args.out)
    print(f"wrote {args.out}: {cpg.n_poses} poses, {len(cpg.edges)} edges")
    return 0


def _cmd_select_loops(args) -> int:
    env = load_env(args.env)
    oracle = shortest_paths(env)
    cpg = load_posegraph(args.pg)
    lap = reduced_weighted_laplacian(cpg)
    ground = build_ground_set(cpg, oracle, lap, lam=args.lam)
    result = run_solver(ground, args.algo, seed=args.seed, lazy=args.lazy)
    payload = result.to_dict(ground)
    payload["lambda"] = args.lam
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=1)
    print(f"wrote {args.out}: |S|={ground.total_candidates} "
          f"|valid|={len(ground)} selected={len(result.selected)} "
          f"gain={result.gain:.4f} calls={result.oracle_calls}")
    return 0


def _cmd_finalize(args) -> int:
    env = load_env(args.env)
    oracle, _, walks = _load_walks(env, args.vrp)
    cpg = load_posegraph(args.pg)
    lap = reduced_weighted_laplacian(cpg)
    with open(args.sel) as fh:
        sel = json.load(fh)
    ground = build_ground_set(cpg, oracle, lap, lam=float(sel.get("lambda", 0.3)))
    selected = [ground.candidates[k] for k in sel["selected_indices"]]
    plan = finalize_op(walks, selected, cpg, oracle, ground)
    with open(args.out, "w") as fh:
        json.dump(plan.to_dict(), fh, indent=1)
    print(f"wrote {args.out}: makespan {plan.makespan:.2f} m, "
          f"{len(plan.detours)} detours")
    return 0


def _cmd_validate_fim(args) -> int:
    out = correlation_experiment(side=args.side, trials=args.trials,
                                 seed=args.seed, robots=args.robots,
                                 heterogeneous=not args.homogeneous)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "neg_logdet_laplacian", "neg_logdet_fim"])
        for t, (x, y) in enumerate(out["points"]):
            writer.writerow([t, x, y])
    print(f"wrote {args.out}: spearman={out['spearman']:.4f} "
          f"pearson={out['pearson']:.4f}")
    return 0


def _cmd_bench(args) -> int:
    if args.config:
        cfg = bench_mod.ExperimentConfig.from_json(args.config)
    else:
        cfg = bench_mod.ExperimentConfig()
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    rows = bench_mod.run_benchmark(cfg)
    paths = bench_mod.write_reports(rows, cfg)
    failures = sum(1 for r in rows if r["error"])
    print(f"{len(rows)} rows ({failures} failed) -> {paths['results']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Seeded benchmark batches over random environments and result emission.

Each trial generates one environment, runs the configured selection
algorithms on the same ground set, finalizes plans, and records objective
gains, oracle calls and wall times (selection only).  Aggregated CSVs mirror
the benchmark figures: per-trial objectives sorted by the simple-greedy
value, improvement ratios against plain double greedy, selected-edge counts
across the distance-weight sweep, and mean wall times.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .allocation import finalize
from .candidates import build_ground_set
from .env import generate_random_env, shortest_paths
from .pipeline import derive_seed
from .posegraph import build_collab_from_walks, reduced_weighted_laplacian
from .solvers import ALGORITHMS, LAZY_CAPABLE, run_solver
from .vrp import expand_to_walk, solve_vrp


@dataclass
class ExperimentConfig:
    sizes: list[float] = field(default_factory=lambda: [60.0, 80.0])
    trials: int = 50
    robots: int = 3
    common_start: bool = True
    lambdas: list[float] = field(default_factory=lambda: [0.3])
    algorithms: list[str] = field(
        default_factory=lambda: ["sgre", "dgre", "dgre-order", "dusm"])
    lazy: bool = True
    seed: int = 7
    grid_step: float = 10.0
    vrp_time_limit: float = 5.0
    out_dir: str = "bench_out"
    jobs: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm label {algo!r}")
        if not self.sizes:
            raise ValueError("at least one environment size required")

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        cfg = cls(**data)
        cfg.validate()
        return cfg


def run_trial(cfg: ExperimentConfig, size: float, trial: int) -> list[dict]:
    """All algorithm runs for one (size, trial) instance."""
    env_seed = derive_seed(cfg.seed, int(size), trial, 0)
    env = generate_random_env(size, grid_step=cfg.grid_step, seed=env_seed)
    oracle = shortest_paths(env)
    if cfg.common_start:
        starts = [min(env.vertices)] * cfg.robots
    else:
        rng = np.random.default_rng(derive_seed(cfg.seed, int(size), trial, 1))
        ids = sorted(env.vertices)
        starts = [int(ids[k]) for k in rng.choice(len(ids), size=cfg.robots,
                                                  replace=False)]
    vrp = solve_vrp(env, starts, time_limit_s=cfg.vrp_time_limit,
                    seed=env_seed, oracle=oracle)
    walks = [expand_to_walk(env, oracle, r, i) for i, r in enumerate(vrp.routes)]
    cpg = build_collab_from_walks(walks)
    lap = reduced_weighted_laplacian(cpg)

    rows = []
    for lam in cfg.lambdas:
        ground = build_ground_set(cpg, oracle, lap, lam=lam)
        for algo in cfg.algorithms:
            lazy = cfg.lazy and algo in LAZY_CAPABLE
            solver_seed = derive_seed(cfg.seed, int(size), trial, 2,
                                      ALGORITHMS.index(algo))
            try:
                res = run_solver(ground, algo, seed=solver_seed, lazy=lazy)
                selected = [ground.candidates[k] for k in res.selected]
                plan = finalize(walks, selected, cpg, oracle, ground)
                covered = set()
                for w in plan.walks:
                    covered.update(w.vertices)
                rows.append({
                    "size": size, "trial": trial, "lambda": lam,
                    "algorithm": algo, "lazy": lazy,
                    "seed": solver_seed, "env_seed": env_seed,
                    "objective": res.objective, "gain": res.gain,
                    "oracle_calls": res.oracle_calls,
                    "wall_time_s": res.wall_time_s,
                    "n_candidates": ground.total_candidates,
                    "n_valid": len(ground),
                    "n_selected": len(res.selected),
                    "vrp_makespan": vrp.makespan,
                    "plan_makespan": plan.makespan,
                    "covered": covered >= set(env.vertices),
                    "error": "",
                })
            except Exception as exc:  # noqa: BLE001 - batch keeps going
                rows.append({
                    "size": size, "trial": trial, "lambda": lam,
                    "algorithm": algo, "lazy": lazy,
                    "seed": solver_seed, "env_seed": env_seed,
                    "objective": float("nan"), "gain": float("nan"),
                    "oracle_calls": 0, "wall_time_s": float("nan"),
                    "n_candidates": 0, "n_valid": 0, "n_selected": 0,
                    "vrp_makespan": vrp.makespan,
                    "plan_makespan": float("nan"), "covered": False,
                    "error": f"{type(exc).__name__}: {exc}",
                })
    return rows


def run_benchmark(cfg: ExperimentConfig) -> list[dict]:
    """Every (size, trial) instance, optionally across processes; results
    are merged in (size, trial) order so the batch output is reproducible."""
    cfg.validate()
    keys = [(size, trial) for size in cfg.sizes for trial in range(cfg.trials)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_trial_star, [(cfg, s, t) for s, t in keys]))
    else:
        chunks = [run_trial(cfg, s, t) for s, t in keys]
    rows: list[dict] = []
    for chunk in chunks:
        rows.extend(chunk)
    return rows


def _trial_star(args):
    return run_trial(*args)


def write_reports(rows: list[dict], cfg: ExperimentConfig) -> dict[str, str]:
    """Raw results plus the per-figure CSV files."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {}

    raw = os.path.join(cfg.out_dir, "results.json")
    with open(raw, "w") as fh:
        json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=1)
    paths["results"] = raw

    results_csv = os.path.join(cfg.out_dir, "results.csv")
    _write_csv(results_csv, rows)
    paths["results_csv"] = results_csv

    ok = [r for r in rows if not r["error"]]

    fig4 = []
    for size in cfg.sizes:
        for lam in cfg.lambdas:
            chunk = [r for r in ok if r["size"] == size and r["lambda"] == lam]
            sgre = {r["trial"]: r["gain"] for r in chunk
                    if r["algorithm"] == "sgre"}
            order = sorted(sgre, key=lambda t: sgre[t])
            for rank, trial in enumerate(order):
                for r in chunk:
                    if r["trial"] == trial:
                        fig4.append({"size": size, "lambda": lam,
                                     "rank": rank, "trial": trial,
                                     "algorithm": r["algorithm"],
                                     "gain": r["gain"],
                                     "seed": r["seed"],
                                     "env_seed": r["env_seed"]})
    path = os.path.join(cfg.out_dir, "fig4_objectives.csv")
    _write_csv(path, fig4)
    paths["fig4"] = path

    fig5 = []
    for size in cfg.sizes:
        for lam in cfg.lambdas:
            chunk = [r for r in ok if r["size"] == size and r["lambda"] == lam]
            base = {r["trial"]: r["gain"] for r in chunk
                    if r["algorithm"] == "dgre"}
            for r in chunk:
                if r["algorithm"] == "dgre" or r["trial"] not in base:
                    continue
                denom = abs(base[r["trial"]])
                ratio = (r["gain"] - base[r["trial"]]) / denom if denom > 0 else 0.0
                fig5.append({"size": size, "lambda": lam, "trial": r["trial"],
                             "algorithm": r["algorithm"],
                             "improvement_ratio": ratio,
                             "env_seed": r["env_seed"]})
    path = os.path.join(cfg.out_dir, "fig5_ratios.csv")
    _write_csv(path, fig5)
    paths["fig5"] = path

    fig6 = []
    for size in cfg.sizes:
        for lam in cfg.lambdas:
            for algo in cfg.algorithms:
                chunk = [r for r in ok if r["size"] == size
                         and r["lambda"] == lam and r["algorithm"] == algo]
                if chunk:
                    fig6.append({
                        "size": size, "lambda": lam, "algorithm": algo,
                        "mean_selected": float(np.mean(
                            [r["n_selected"] for r in chunk])),
                        "mean_valid": float(np.mean(
                            [r["n_valid"] for r in chunk])),
                        "trials": len(chunk)})
    path = os.path.join(cfg.out_dir, "fig6_lambda.csv")
    _write_csv(path, fig6)
    paths["fig6"] = path

    table1 = []
    for size in cfg.sizes:
        for algo in cfg.algorithms:
            chunk = [r for r in ok if r["size"] == size
                     and r["algorithm"] == algo]
            if chunk:
                table1.append({
                    "size": size, "algorithm": algo,
                    "lazy": chunk[0]["lazy"],
                    "mean_wall_time_s": float(np.mean(
                        [r["wall_time_s"] for r in chunk])),
                    "mean_oracle_calls": float(np.mean(
                        [r["oracle_calls"] for r in chunk])),
                    "mean_gain": float(np.mean([r["gain"] for r in chunk])),
                    "trials": len(chunk)})
    path = os.path.join(cfg.out_dir, "table1_times.csv")
    _write_csv(path, table1)
    paths["table1"] = path
    return paths


def _write_csv(path: str, rows: list[dict]) -> None:
    if not rows:
        with open(path, "w") as fh:
            fh.write("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

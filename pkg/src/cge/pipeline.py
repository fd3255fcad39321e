"""End-to-end run: environment -> coverage routes -> pose graph -> ground
set -> selection -> final plan, with stage-tagged error propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import FinalPlan, finalize
from .candidates import GroundSet, build_ground_set
from .env import DistanceOracle, EnvGraph, generate_random_env, shortest_paths
from .posegraph import (CollabPoseGraph, ReducedLaplacian,
                        build_collab_from_walks, reduced_weighted_laplacian)
from .solvers import SolverResult, run_solver
from .vrp import VrpSolution, Walk, expand_to_walk, solve_vrp


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineRun:
    env: EnvGraph
    oracle: DistanceOracle
    vrp: VrpSolution
    walks: list[Walk]
    cpg: CollabPoseGraph
    laplacian: ReducedLaplacian
    ground: GroundSet
    result: SolverResult
    plan: FinalPlan


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # noqa: BLE001 - stage label is the contract
        raise StageError(name, exc) from exc


def run_pipeline(
    env: EnvGraph | None = None,
    side: float = 100.0,
    grid_step: float = 10.0,
    robots: int = 3,
    starts: list[int] | None = None,
    lam: float = 0.3,
    algorithm: str = "sgre",
    lazy: bool = True,
    seed: int = 7,
    vrp_time_limit: float = 20.0,
) -> PipelineRun:
    """Run every stage; robots start at the lowest vertex unless starts are
    given explicitly."""
    if env is None:
        env = _stage("gen-env", generate_random_env, side,
                     grid_step=grid_step, seed=seed)
    oracle = _stage("shortest-paths", shortest_paths, env)
    if starts is None:
        starts = [min(env.vertices)] * robots
    vrp = _stage("solve-vrp", solve_vrp, env, starts,
                 time_limit_s=vrp_time_limit, seed=seed, oracle=oracle)
    walks = [_stage("expand-walk", expand_to_walk, env, oracle, route, r)
             for r, route in enumerate(vrp.routes)]
    cpg = _stage("build-pg", build_collab_from_walks, walks)
    lap = _stage("build-pg", reduced_weighted_laplacian, cpg)
    ground = _stage("select-loops", build_ground_set, cpg, oracle, lap, lam)
    result = _stage("select-loops", run_solver, ground, algorithm,
                    seed=seed, lazy=lazy)
    selected = [ground.candidates[k] for k in result.selected]
    plan = _stage("finalize", finalize, walks, selected, cpg, oracle, ground)
    return PipelineRun(env=env, oracle=oracle, vrp=vrp, walks=walks, cpg=cpg,
                       laplacian=lap, ground=ground, result=result, plan=plan)


def derive_seed(*parts: int) -> int:
    """Stable per-trial seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])

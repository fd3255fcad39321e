import numpy as np
import pytest

from cge.candidates import GroundSet, build_ground_set
from cge.env import generate_random_env, shortest_paths
from cge.posegraph import build_collab_from_walks, reduced_weighted_laplacian
from cge.vrp import Walk, expand_to_walk, solve_vrp


def pipeline_instance(side=60, seed=0, robots=3, lam=0.3, vrp_time=5.0):
    """Environment through ground set, returned as a dict of stages."""
    env = generate_random_env(side, seed=seed)
    oracle = shortest_paths(env)
    start = min(env.vertices)
    vrp = solve_vrp(env, [start] * robots, time_limit_s=vrp_time, oracle=oracle)
    walks = [expand_to_walk(env, oracle, r, i) for i, r in enumerate(vrp.routes)]
    cpg = build_collab_from_walks(walks)
    lap = reduced_weighted_laplacian(cpg)
    ground = build_ground_set(cpg, oracle, lap, lam=lam)
    return {"env": env, "oracle": oracle, "vrp": vrp, "walks": walks,
            "cpg": cpg, "lap": lap, "ground": ground}


def truncate_ground(ground: GroundSet, k: int) -> GroundSet:
    """First k candidates of a pruned ground set (keeps alpha and d_max)."""
    return GroundSet(candidates=ground.candidates[:k], alpha=ground.alpha,
                     alpha_min=ground.alpha_min, alpha_max=ground.alpha_max,
                     d_max=ground.d_max,
                     total_candidates=ground.total_candidates,
                     laplacian=ground.laplacian)


def small_ground(seed=0, k=10, side=40, robots=2, lam=0.2) -> GroundSet:
    """Small pruned ground set suitable for brute-force comparison."""
    inst = pipeline_instance(side=side, seed=seed, robots=robots, lam=lam)
    return truncate_ground(inst["ground"], k)


@pytest.fixture(scope="session")
def medium_instance():
    return pipeline_instance(side=60, seed=3, robots=3)


def toy_walks():
    """Two robots sharing a couple of vertices on a hand-built graph."""
    return [
        Walk(robot=0, vertices=[0, 1, 2, 3], length=3.0),
        Walk(robot=1, vertices=[0, 4, 2, 5], length=3.0),
    ]


def spd_matrix(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) * scale
    return a @ a.T + np.eye(n) * (n * scale * 0.5 + 1.0)

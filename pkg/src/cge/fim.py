"""Full Fisher information of the collaborative pose graph and empirical
checks of its Laplacian surrogate: assembled as sum of B B^T kron inv(Sigma)
blocks over non-anchored poses, with pose orientations fixed to identity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .candidates import enumerate_candidates
from .env import generate_random_env, shortest_paths
from .posegraph import (CollabPoseGraph, build_collab_from_walks,
                        dopt_weight, reduced_weighted_laplacian)
from .vrp import expand_to_walk, solve_vrp

# heterogeneous covariance draw: diag(u1, u2, u3) around the defaults
XY_VAR_RANGE = (0.05, 0.2)
THETA_VAR_RANGE = (0.0005, 0.002)


def _inv_spd(cov: np.ndarray) -> np.ndarray:
    if cov.shape != (3, 3) or not np.allclose(cov, cov.T):
        raise ValueError("covariance must be symmetric 3x3")
    if np.any(np.linalg.eigvalsh(cov) <= 0):
        raise ValueError("covariance must be positive definite")
    return np.linalg.inv(cov)


def build_full_fim(
    cpg: CollabPoseGraph,
    covariances: list[np.ndarray],
    extra_edges: list[tuple[int, int]] = (),
    extra_covariances: list[np.ndarray] = (),
) -> np.ndarray:
    """3n x 3n information matrix over the non-anchored poses.

    covariances aligns with cpg.edges; extra_edges (candidate loop edges as
    pose pairs) take extra_covariances.
    """
    if len(covariances) != len(cpg.edges):
        raise ValueError("one covariance per pose-graph edge required")
    if len(extra_edges) != len(extra_covariances):
        raise ValueError("one covariance per extra edge required")
    anchor_set = set(cpg.anchors)
    free = [p for p in range(cpg.n_poses) if p not in anchor_set]
    row = {p: r for r, p in enumerate(free)}
    n = len(free)
    H = np.zeros((3 * n, 3 * n))
    pairs = [(e.i, e.j) for e in cpg.edges] + list(extra_edges)
    covs = list(covariances) + list(extra_covariances)
    for (i, j), cov in zip(pairs, covs):
        info = _inv_spd(cov)
        ri, rj = row.get(i), row.get(j)
        if ri is not None:
            H[3 * ri:3 * ri + 3, 3 * ri:3 * ri + 3] += info
        if rj is not None:
            H[3 * rj:3 * rj + 3, 3 * rj:3 * rj + 3] += info
        if ri is not None and rj is not None:
            H[3 * ri:3 * ri + 3, 3 * rj:3 * rj + 3] -= info
            H[3 * rj:3 * rj + 3, 3 * ri:3 * ri + 3] -= info
    return H


def weighted_laplacian_with_extras(
    cpg: CollabPoseGraph,
    covariances: list[np.ndarray],
    extra_edges: list[tuple[int, int]] = (),
    extra_covariances: list[np.ndarray] = (),
) -> np.ndarray:
    """Reduced Laplacian weighted by the D-optimality of each edge's
    information matrix, over the same edge set as build_full_fim."""
    anchor_set = set(cpg.anchors)
    free = [p for p in range(cpg.n_poses) if p not in anchor_set]
    row = {p: r for r, p in enumerate(free)}
    n = len(free)
    L = np.zeros((n, n))
    pairs = [(e.i, e.j) for e in cpg.edges] + list(extra_edges)
    covs = list(covariances) + list(extra_covariances)
    for (i, j), cov in zip(pairs, covs):
        g = dopt_weight(cov)
        ri, rj = row.get(i), row.get(j)
        if ri is not None:
            L[ri, ri] += g
        if rj is not None:
            L[rj, rj] += g
        if ri is not None and rj is not None:
            L[ri, rj] -= g
            L[rj, ri] -= g
    return L


def _logdet(M: np.ndarray) -> float:
    sign, val = np.linalg.slogdet(M)
    if sign <= 0:
        raise FloatingPointError("matrix is not positive definite")
    return float(val)


@dataclass
class TrialInstance:
    cpg: CollabPoseGraph
    candidates: list
    n_free: int


def _random_instance(side: float, env_seed: int, robots: int = 3,
                     grid_step: float = 10.0,
                     vrp_time_limit: float = 5.0) -> TrialInstance:
    env = generate_random_env(side, grid_step=grid_step, seed=env_seed)
    oracle = shortest_paths(env)
    start = min(env.vertices)
    sol = solve_vrp(env, [start] * robots, time_limit_s=vrp_time_limit,
                    oracle=oracle)
    walks = [expand_to_walk(env, oracle, r, i) for i, r in enumerate(sol.routes)]
    cpg = build_collab_from_walks(walks)
    lap = reduced_weighted_laplacian(cpg)
    cands = enumerate_candidates(cpg, oracle, lap)
    return TrialInstance(cpg=cpg, candidates=cands, n_free=lap.n)


def correlation_experiment(
    side: float = 120.0,
    trials: int = 50,
    seed: int = 7,
    robots: int = 3,
    heterogeneous: bool = True,
    grid_step: float = 10.0,
) -> dict:
    """Scatter of -logdet(L_gamma) against -logdet(FIM) over random pose
    graphs with random loop-edge subsets, plus rank and linear correlation.

    With heterogeneous=False every edge takes the default covariance and the
    two metrics are related exactly through the Kronecker determinant
    identity, so the rank correlation is 1.
    """
    if trials < 2:
        raise ValueError("need at least two trials")
    points = []
    for t in range(trials):
        ss = np.random.SeedSequence([seed, t])
        env_seed = int(ss.generate_state(1)[0])
        rng = np.random.default_rng(ss.spawn(1)[0])
        inst = _random_instance(side, env_seed, robots, grid_step)
        cpg = inst.cpg
        cands = inst.candidates
        k = int(rng.integers(0, min(len(cands), 3 * inst.n_free) + 1))
        chosen = sorted(rng.choice(len(cands), size=k, replace=False)) if k else []
        extra = [(cands[c].i, cands[c].j) for c in chosen]
        m = len(cpg.edges) + len(extra)
        if heterogeneous:
            xy = rng.uniform(*XY_VAR_RANGE, size=(m, 2))
            th = rng.uniform(*THETA_VAR_RANGE, size=(m, 1))
            covs = [np.diag(np.concatenate([xy[e], th[e]])) for e in range(m)]
        else:
            covs = [np.diag([0.1, 0.1, 0.001])] * m
        edge_covs = covs[:len(cpg.edges)]
        extra_covs = covs[len(cpg.edges):]
        L = weighted_laplacian_with_extras(cpg, edge_covs, extra, extra_covs)
        H = build_full_fim(cpg, edge_covs, extra, extra_covs)
        points.append((-_logdet(L), -_logdet(H)))
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    rho = float(stats.spearmanr(xs, ys).statistic)
    r = float(stats.pearsonr(xs, ys).statistic)
    return {"points": points, "spearman": rho, "pearson": r,
            "side": side, "trials": trials, "seed": seed,
            "heterogeneous": heterogeneous}


def kronecker_identity_gap(cpg: CollabPoseGraph, cov: np.ndarray) -> float:
    """Relative gap of logdet(FIM) against the closed form for a single
    shared covariance: d * logdet(L_unweighted) + n * logdet(inv(cov))."""
    covs = [cov] * len(cpg.edges)
    H = build_full_fim(cpg, covs)
    L_unw = reduced_weighted_laplacian(cpg, weighted=False).matrix
    n = L_unw.shape[0]
    expect = 3.0 * _logdet(L_unw) + n * _logdet(np.linalg.inv(cov))
    got = _logdet(H)
    return abs(got - expect) / max(1.0, abs(expect))


def monotone_experiment(
    cpg: CollabPoseGraph,
    edge_sequence: list[tuple[int, int]],
    cov: np.ndarray | None = None,
) -> list[tuple[float, float]]:
    """Per-step (-logdet L_gamma, -logdet FIM) as loop edges are added one
    at a time; both traces are non-increasing."""
    if cov is None:
        cov = np.diag([0.1, 0.1, 0.001])
    base_covs = [e.cov for e in cpg.edges]
    trace = []
    for k in range(len(edge_sequence) + 1):
        extra = list(edge_sequence[:k])
        extra_covs = [cov] * k
        L = weighted_laplacian_with_extras(cpg, base_covs, extra, extra_covs)
        H = build_full_fim(cpg, base_covs, extra, extra_covs)
        trace.append((-_logdet(L), -_logdet(H)))
    return trace

"""Ground set of candidate loop edges: enumeration over non-adjacent pose
pairs, benefit-per-meter calibration of the distance weight alpha, and
pruning of candidates below the threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .env import DistanceOracle
from .objective import CallCounter, EdgeVector, ObjectiveState
from .posegraph import CollabPoseGraph, ReducedLaplacian, dopt_weight

# travel floor for two poses mapped to the same vertex (avoids a zero
# denominator in the benefit-per-meter ratio)
OMEGA_FLOOR = 0.1


class NoCandidatesError(RuntimeError):
    """The pose graph is complete: no loop edge can be proposed."""


@dataclass(frozen=True)
class LoopCandidate:
    """A possible loop-closing action between two non-adjacent poses."""

    i: int
    j: int
    gamma: float
    omega: float
    rows: tuple[int, ...]
    topo_gain0: float  # (1/n) log(1 + gamma * b^T L0^-1 b)

    @property
    def ratio(self) -> float:
        return self.topo_gain0 / (2.0 * self.omega)

    def edge_vector(self, index: int) -> EdgeVector:
        return EdgeVector(rows=self.rows, gamma=self.gamma,
                          cost=2.0 * self.omega, index=index)


@dataclass
class GroundSet:
    """Pruned, deterministically ordered candidate list with the calibrated
    alpha and the positivity constant d_max (fixed before pruning)."""

    candidates: list[LoopCandidate]
    alpha: float
    alpha_min: float
    alpha_max: float
    d_max: float
    total_candidates: int
    laplacian: ReducedLaplacian

    def __len__(self) -> int:
        return len(self.candidates)

    def edge_vectors(self) -> list[EdgeVector]:
        return [c.edge_vector(k) for k, c in enumerate(self.candidates)]

    def objective_state(self, counter: CallCounter | None = None) -> ObjectiveState:
        return ObjectiveState(self.laplacian.matrix, self.alpha, self.d_max,
                              counter=counter)


def enumerate_candidates(
    cpg: CollabPoseGraph,
    oracle: DistanceOracle,
    laplacian: ReducedLaplacian,
) -> list[LoopCandidate]:
    """All pose pairs (i < j) not directly connected in the pose graph.

    Travel distance is the shortest-path distance in the environment graph
    between the mapped vertices (floored for co-located pose pairs); the
    initial topology gain is evaluated in one batch against L0^-1.
    """
    n = laplacian.n
    S = cho_solve(cho_factor(laplacian.matrix, lower=True), np.eye(n))
    gamma = dopt_weight(cpg.edges[0].cov) if cpg.edges else 1.0
    existing = cpg.edge_keys()
    row = laplacian.row_of_pose
    out: list[LoopCandidate] = []
    for i in range(cpg.n_poses):
        vi = cpg.pose_vertex[i]
        ri = row.get(i)
        for j in range(i + 1, cpg.n_poses):
            if (i, j) in existing:
                continue
            vj = cpg.pose_vertex[j]
            omega = oracle.dist(vi, vj) if vi != vj else 0.0
            if omega <= 0.0:
                omega = OMEGA_FLOOR
            rj = row.get(j)
            if ri is not None and rj is not None:
                rows = (ri, rj)
                q = S[ri, ri] + S[rj, rj] - 2.0 * S[ri, rj]
            elif ri is not None or rj is not None:
                k = ri if ri is not None else rj
                rows = (k,)
                q = S[k, k]
            else:
                rows = ()
                q = 0.0
            gain = math.log1p(gamma * q) / n
            out.append(LoopCandidate(i=i, j=j, gamma=gamma, omega=float(omega),
                                     rows=rows, topo_gain0=gain))
    return out


def compute_alpha(candidates: list[LoopCandidate],
                  lam: float = 0.3) -> tuple[float, float, float]:
    """Interpolated benefit-per-meter threshold.

    Returns (alpha_min, alpha_max, alpha) where the bounds are the extreme
    ratios of initial topology gain to round-trip distance over the whole
    candidate set and alpha = alpha_min + lam * (alpha_max - alpha_min).
    """
    if not candidates:
        raise NoCandidatesError("empty candidate set")
    ratios = [c.ratio for c in candidates]
    a_min = min(ratios)
    a_max = max(ratios)
    return a_min, a_max, a_min + lam * (a_max - a_min)


def prune_candidates(
    candidates: list[LoopCandidate],
    alpha: float,
    laplacian: ReducedLaplacian,
    alpha_min: float = float("nan"),
    alpha_max: float = float("nan"),
) -> GroundSet:
    """Keep candidates whose ratio strictly exceeds alpha.

    d_max is fixed from the pre-pruning set; survivors are ordered by
    descending initial marginal at the chosen alpha, ties by pose pair.
    """
    if not candidates:
        raise NoCandidatesError("empty candidate set")
    d_max = 2.0 * max(c.omega for c in candidates) * len(candidates)
    kept = [c for c in candidates if c.ratio > alpha]
    kept.sort(key=lambda c: (-(c.topo_gain0 - alpha * 2.0 * c.omega), c.i, c.j))
    return GroundSet(candidates=kept, alpha=alpha,
                     alpha_min=alpha_min, alpha_max=alpha_max,
                     d_max=d_max, total_candidates=len(candidates),
                     laplacian=laplacian)


def build_ground_set(
    cpg: CollabPoseGraph,
    oracle: DistanceOracle,
    laplacian: ReducedLaplacian,
    lam: float = 0.3,
) -> GroundSet:
    """Enumerate, calibrate alpha and prune in one step."""
    cands = enumerate_candidates(cpg, oracle, laplacian)
    a_min, a_max, alpha = compute_alpha(cands, lam)
    return prune_candidates(cands, alpha, laplacian, a_min, a_max)

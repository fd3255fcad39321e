"""Abstracted pose graphs built from coverage walks, their collaborative
merge with inter-robot closures, and the anchored weighted reduced Laplacian."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .vrp import Walk

DEFAULT_COV = np.diag([0.1, 0.1, 0.001])

ODOMETRY = "odometry"
REVISIT = "revisit"
INTER = "inter-robot"


class SingularLaplacianError(RuntimeError):
    """A connected component of the pose graph has no anchored pose."""


def dopt_weight(cov: np.ndarray) -> float:
    """D-optimality of the information matrix: det(cov^-1)^(1/d)."""
    d = cov.shape[0]
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise ValueError("covariance must be symmetric positive definite")
    return float(np.exp(-logdet / d))


@dataclass
class PoseEdge:
    i: int
    j: int
    kind: str
    cov: np.ndarray
    gamma: float

    def key(self) -> tuple[int, int]:
        return (min(self.i, self.j), max(self.i, self.j))


@dataclass
class RobotPoseGraph:
    """One pose per distinct vertex of a walk, in first-visit order."""

    robot: int
    pose_vertices: list[int]
    edges: list[tuple[int, int, str]]


def build_abstracted(walk: Walk, robot: int | None = None) -> RobotPoseGraph:
    """Pose graph of a single walk.

    A new pose is created on the first visit of each vertex; traversals
    between already-known poses become revisit edges; duplicate pose pairs
    are never added twice.
    """
    if not walk.vertices:
        raise ValueError("empty walk")
    rid = walk.robot if robot is None else robot
    pose_of: dict[int, int] = {}
    pose_vertices: list[int] = []
    edges: list[tuple[int, int, str]] = []
    seen: set[tuple[int, int]] = set()
    prev = None
    for v in walk.vertices:
        is_new = v not in pose_of
        if is_new:
            pose_of[v] = len(pose_vertices)
            pose_vertices.append(v)
        if prev is not None and prev != v:
            pa, pb = pose_of[prev], pose_of[v]
            key = (min(pa, pb), max(pa, pb))
            if key not in seen:
                seen.add(key)
                edges.append((key[0], key[1], ODOMETRY if is_new else REVISIT))
        prev = v
    return RobotPoseGraph(robot=rid, pose_vertices=pose_vertices, edges=edges)


@dataclass
class CollabPoseGraph:
    """Merged multi-robot pose graph.

    pose_robot / pose_vertex implement the pose -> robot and pose -> vertex
    mappings; anchors are each robot's first pose.
    """

    pose_robot: list[int]
    pose_vertex: list[int]
    edges: list[PoseEdge]
    anchors: list[int]

    _edge_keys: set[tuple[int, int]] = field(default=None, repr=False)

    @property
    def n_poses(self) -> int:
        return len(self.pose_robot)

    @property
    def n_free(self) -> int:
        return self.n_poses - len(self.anchors)

    def edge_keys(self) -> set[tuple[int, int]]:
        if self._edge_keys is None:
            self._edge_keys = {e.key() for e in self.edges}
        return self._edge_keys

    def is_connected(self) -> bool:
        n = self.n_poses
        if n == 0:
            return False
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            ri, rj = find(e.i), find(e.j)
            if ri != rj:
                parent[ri] = rj
        return len({find(i) for i in range(n)}) == 1

    def components(self) -> list[set[int]]:
        n = self.n_poses
        adj = [[] for _ in range(n)]
        for e in self.edges:
            adj[e.i].append(e.j)
            adj[e.j].append(e.i)
        seen = [False] * n
        comps = []
        for s in range(n):
            if seen[s]:
                continue
            comp = {s}
            seen[s] = True
            stack = [s]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.add(w)
                        stack.append(w)
            comps.append(comp)
        return comps

    def validate(self) -> None:
        pairs = set()
        for p in range(self.n_poses):
            rv = (self.pose_robot[p], self.pose_vertex[p])
            if rv in pairs:
                raise ValueError(f"duplicate pose for robot/vertex {rv}")
            pairs.add(rv)
        keys = set()
        for e in self.edges:
            if e.i == e.j:
                raise ValueError(f"self edge at pose {e.i}")
            if e.key() in keys:
                raise ValueError(f"duplicate edge {e.key()}")
            keys.add(e.key())
            if e.gamma <= 0:
                raise ValueError(f"edge {e.key()} has non-positive weight")


def merge_collaborative(
    graphs: list[RobotPoseGraph],
    default_cov: np.ndarray = DEFAULT_COV,
) -> CollabPoseGraph:
    """Disjoint union of per-robot graphs plus pairwise inter-robot closures
    at every vertex visited by two or more robots."""
    if not graphs:
        raise ValueError("at least one robot pose graph is required")
    gamma = dopt_weight(default_cov)
    pose_robot: list[int] = []
    pose_vertex: list[int] = []
    edges: list[PoseEdge] = []
    anchors: list[int] = []
    offsets = []
    for g in graphs:
        offsets.append(len(pose_robot))
        anchors.append(len(pose_robot))
        pose_robot.extend([g.robot] * len(g.pose_vertices))
        pose_vertex.extend(g.pose_vertices)
    for g, off in zip(graphs, offsets):
        for (i, j, kind) in g.edges:
            edges.append(PoseEdge(off + i, off + j, kind, default_cov, gamma))

    by_vertex: dict[int, list[int]] = {}
    for p, v in enumerate(pose_vertex):
        by_vertex.setdefault(v, []).append(p)
    for v in sorted(by_vertex):
        group = by_vertex[v]
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                edges.append(PoseEdge(group[a], group[b], INTER, default_cov, gamma))

    cpg = CollabPoseGraph(pose_robot=pose_robot, pose_vertex=pose_vertex,
                          edges=edges, anchors=anchors)
    cpg.validate()
    return cpg


@dataclass
class ReducedLaplacian:
    """Weighted Laplacian with all anchored rows/columns removed."""

    matrix: np.ndarray
    row_of_pose: dict[int, int]
    anchors: list[int]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def reduced_weighted_laplacian(
    cpg: CollabPoseGraph, weighted: bool = True
) -> ReducedLaplacian:
    """L = sum over edges of gamma * b b^T restricted to non-anchored poses.

    Raises SingularLaplacianError if some connected component has no anchor
    (the matrix would be singular).
    """
    anchor_set = set(cpg.anchors)
    for comp in cpg.components():
        if not comp & anchor_set:
            raise SingularLaplacianError(
                f"component without anchor: poses {sorted(comp)[:6]}...")
    free = [p for p in range(cpg.n_poses) if p not in anchor_set]
    row_of_pose = {p: r for r, p in enumerate(free)}
    n = len(free)
    L = np.zeros((n, n))
    for e in cpg.edges:
        g = e.gamma if weighted else 1.0
        ri = row_of_pose.get(e.i)
        rj = row_of_pose.get(e.j)
        if ri is not None:
            L[ri, ri] += g
        if rj is not None:
            L[rj, rj] += g
        if ri is not None and rj is not None:
            L[ri, rj] -= g
            L[rj, ri] -= g
    return ReducedLaplacian(matrix=L, row_of_pose=row_of_pose,
                            anchors=list(cpg.anchors))


def build_collab_from_walks(
    walks: list[Walk], default_cov: np.ndarray = DEFAULT_COV
) -> CollabPoseGraph:
    return merge_collaborative([build_abstracted(w) for w in walks], default_cov)


def posegraph_to_dict(cpg: CollabPoseGraph) -> dict:
    return {
        "poses": [
            {"id": p, "robot": cpg.pose_robot[p], "vertex": cpg.pose_vertex[p]}
            for p in range(cpg.n_poses)
        ],
        "anchors": list(cpg.anchors),
        "edges": [
            {"i": e.i, "j": e.j, "kind": e.kind, "gamma": e.gamma,
             "cov": [[float(x) for x in row] for row in e.cov]}
            for e in cpg.edges
        ],
    }


def posegraph_from_dict(data: dict) -> CollabPoseGraph:
    n = len(data["poses"])
    pose_robot = [0] * n
    pose_vertex = [0] * n
    for p in data["poses"]:
        pose_robot[p["id"]] = int(p["robot"])
        pose_vertex[p["id"]] = int(p["vertex"])
    edges = [
        PoseEdge(int(e["i"]), int(e["j"]), e["kind"],
                 np.array(e["cov"], dtype=float), float(e["gamma"]))
        for e in data["edges"]
    ]
    cpg = CollabPoseGraph(pose_robot=pose_robot, pose_vertex=pose_vertex,
                          edges=edges, anchors=[int(a) for a in data["anchors"]])
    cpg.validate()
    return cpg


def save_posegraph(cpg: CollabPoseGraph, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(posegraph_to_dict(cpg), fh, indent=1)


def load_posegraph(path: str) -> CollabPoseGraph:
    with open(path) as fh:
        return posegraph_from_dict(json.load(fh))

"""Metric 2D exploration graphs: random generation, validation, JSON I/O,
and an all-pairs shortest-path oracle with path reconstruction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra


class GenerationError(RuntimeError):
    """Raised when random removal cannot keep the graph connected."""


@dataclass
class EnvGraph:
    """Connected metric graph over 2D points.

    vertices maps id -> (x, y) in meters, edges maps the sorted pair
    (u, v) -> positive length in meters.
    """

    vertices: dict[int, tuple[float, float]]
    edges: dict[tuple[int, int], float]
    seed: int = 0
    side: float = 0.0

    def __post_init__(self):
        self._adj: dict[int, list[int]] | None = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> dict[int, list[int]]:
        if self._adj is None:
            adj = {v: [] for v in self.vertices}
            for (u, v) in self.edges:
                adj[u].append(v)
                adj[v].append(u)
            for v in adj:
                adj[v].sort()
            self._adj = adj
        return self._adj

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def edge_length(self, u: int, v: int) -> float:
        return self.edges[(min(u, v), max(u, v))]

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        return _is_connected(set(self.vertices), self.edges.keys())

    def validate(self) -> None:
        """Check the structural invariants, raising ValueError on violation."""
        for (u, v), w in self.edges.items():
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if u > v:
                raise ValueError(f"edge key ({u},{v}) not sorted")
            if u not in self.vertices or v not in self.vertices:
                raise ValueError(f"edge ({u},{v}) references missing vertex")
            if not (w > 0.0 and math.isfinite(w)):
                raise ValueError(f"edge ({u},{v}) has invalid length {w}")
        if not self.is_connected():
            raise ValueError("graph is not connected")


def _is_connected(vertices: set[int], edges) -> bool:
    if not vertices:
        return False
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for (u, v) in edges:
        if u in adj and v in adj:
            adj[u].append(v)
            adj[v].append(u)
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(vertices)


def generate_random_env(
    side_meters: float,
    grid_step: float = 10.0,
    vertex_removal_frac: float = 0.10,
    edge_removal_frac: float = 0.03,
    coord_noise_sigma: float = 2.0,
    seed: int = 0,
) -> EnvGraph:
    """Random grid-derived environment.

    Starts from a 4-adjacent (side/step + 1)^2 grid, removes
    floor(vertex_removal_frac * |V|) vertices and then
    floor(edge_removal_frac * |E_remaining|) edges, rejecting removals
    that disconnect the graph, then jitters coordinates with N(0, sigma^2)
    and recomputes edge lengths from the noisy endpoints.
    """
    if side_meters < 2 * grid_step:
        raise ValueError("side_meters must be at least 2 * grid_step")
    m = int(round(side_meters / grid_step)) + 1
    rng = np.random.default_rng(seed)

    coords = {r * m + c: (c * grid_step, r * grid_step)
              for r in range(m) for c in range(m)}
    edges: set[tuple[int, int]] = set()
    for r in range(m):
        for c in range(m):
            vid = r * m + c
            if c + 1 < m:
                edges.add((vid, vid + 1))
            if r + 1 < m:
                edges.add((vid, vid + m))

    alive = set(coords)
    n_remove_v = int(len(alive) * vertex_removal_frac)
    _remove_vertices(rng, alive, edges, n_remove_v)
    n_remove_e = int(len(edges) * edge_removal_frac)
    _remove_edges(rng, alive, edges, n_remove_e)

    vertices: dict[int, tuple[float, float]] = {}
    for vid in sorted(alive):
        x, y = coords[vid]
        dx, dy = rng.normal(0.0, coord_noise_sigma, size=2)
        vertices[vid] = (float(x + dx), float(y + dy))
    edge_len = {
        (u, v): math.dist(vertices[u], vertices[v]) for u, v in sorted(edges)
    }
    env = EnvGraph(vertices=vertices, edges=edge_len, seed=seed, side=side_meters)
    env.validate()
    return env


def _remove_vertices(rng, alive: set[int], edges: set[tuple[int, int]], count: int):
    budget = 100 * count
    removed = 0
    while removed < count:
        if budget <= 0:
            raise GenerationError("vertex removal retry budget exhausted")
        budget -= 1
        cand = int(rng.choice(sorted(alive)))
        rest = alive - {cand}
        rest_edges = {e for e in edges if cand not in e}
        if _is_connected(rest, rest_edges):
            alive.discard(cand)
            edges.intersection_update(rest_edges)
            removed += 1


def _remove_edges(rng, alive: set[int], edges: set[tuple[int, int]], count: int):
    budget = 100 * count
    removed = 0
    while removed < count:
        if budget <= 0:
            raise GenerationError("edge removal retry budget exhausted")
        budget -= 1
        pool = sorted(edges)
        cand = pool[int(rng.integers(len(pool)))]
        if _is_connected(alive, edges - {cand}):
            edges.discard(cand)
            removed += 1


@dataclass
class DistanceOracle:
    """All-pairs shortest-path distances over an EnvGraph with predecessors
    for path reconstruction."""

    ids: list[int]
    index: dict[int, int]
    dist_matrix: np.ndarray
    predecessors: np.ndarray

    def dist(self, u: int, v: int) -> float:
        return float(self.dist_matrix[self.index[u], self.index[v]])

    def path(self, u: int, v: int) -> list[int]:
        """Vertex-id walk from u to v along a shortest path."""
        iu, iv = self.index[u], self.index[v]
        if iu == iv:
            return [u]
        out = [iv]
        cur = iv
        while cur != iu:
            cur = int(self.predecessors[iu, cur])
            if cur < 0:
                raise ValueError(f"no path from {u} to {v}")
            out.append(cur)
        out.reverse()
        return [self.ids[i] for i in out]


def shortest_paths(env: EnvGraph) -> DistanceOracle:
    """Dijkstra from every vertex; the graph is connected by invariant."""
    ids = sorted(env.vertices)
    index = {vid: i for i, vid in enumerate(ids)}
    n = len(ids)
    rows, cols, vals = [], [], []
    for (u, v), w in env.edges.items():
        rows.append(index[u])
        cols.append(index[v])
        vals.append(w)
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    dist, pred = dijkstra(graph, directed=False, return_predecessors=True)
    return DistanceOracle(ids=ids, index=index, dist_matrix=dist, predecessors=pred)


def env_to_dict(env: EnvGraph) -> dict:
    return {
        "seed": env.seed,
        "side": env.side,
        "vertices": [
            {"id": vid, "x": env.vertices[vid][0], "y": env.vertices[vid][1]}
            for vid in sorted(env.vertices)
        ],
        "edges": [
            {"u": u, "v": v, "w": env.edges[(u, v)]}
            for (u, v) in sorted(env.edges)
        ],
    }


def env_from_dict(data: dict) -> EnvGraph:
    vertices = {int(v["id"]): (float(v["x"]), float(v["y"])) for v in data["vertices"]}
    edges = {}
    for e in data["edges"]:
        u, v = int(e["u"]), int(e["v"])
        edges[(min(u, v), max(u, v))] = float(e["w"])
    env = EnvGraph(vertices=vertices, edges=edges,
                   seed=int(data.get("seed", 0)), side=float(data.get("side", 0.0)))
    env.validate()
    return env


def save_env(env: EnvGraph, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(env_to_dict(env), fh, indent=1)


def load_env(path: str) -> EnvGraph:
    with open(path) as fh:
        return env_from_dict(json.load(fh))

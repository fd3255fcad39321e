"""Stage-1 coverage pathfinding: open-route min-makespan heuristic over the
shortest-path metric closure, plus expansion of routes onto the graph."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .env import DistanceOracle, EnvGraph, shortest_paths

_EPS = 1e-9


@dataclass
class VrpSolution:
    routes: list[list[int]]
    lengths: list[float]
    starts: list[int]
    seed: int = 0

    @property
    def makespan(self) -> float:
        return max(self.lengths)

    @property
    def total(self) -> float:
        return sum(self.lengths)


@dataclass
class Walk:
    """Vertex sequence realizable in the graph: consecutive pairs are edges."""

    robot: int
    vertices: list[int]
    length: float


def solve_vrp(
    env: EnvGraph,
    starts: list[int],
    time_limit_s: float = 20.0,
    seed: int = 0,
    oracle: DistanceOracle | None = None,
) -> VrpSolution:
    """Open-route coverage of all vertices from fixed starts.

    Construction assigns the nearest unassigned vertex to the currently
    shortest route (balanced nearest-neighbor), then local search applies
    intra-route 2-opt and inter-route relocate/swap moves, accepting a move
    only if it strictly improves (makespan, total length) lexicographically.
    Deterministic: all ties break on the lowest index.
    """
    if not starts:
        raise ValueError("at least one robot start is required")
    for s in starts:
        if s not in env.vertices:
            raise ValueError(f"start vertex {s} not in graph")
    if oracle is None:
        oracle = shortest_paths(env)
    deadline = time.monotonic() + time_limit_s

    idx = oracle.index
    D = oracle.dist_matrix
    routes = [[s] for s in starts]
    lengths = [0.0 for _ in starts]
    unassigned = sorted(set(env.vertices) - set(starts))

    while unassigned:
        r = min(range(len(routes)), key=lambda k: (lengths[k], k))
        last = idx[routes[r][-1]]
        best = min(unassigned, key=lambda v: (D[last, idx[v]], v))
        routes[r].append(best)
        lengths[r] += float(D[last, idx[best]])
        unassigned.remove(best)

    _local_search(routes, lengths, idx, D, deadline)
    return VrpSolution(routes=routes, lengths=lengths, starts=list(starts), seed=seed)


def _route_length(route, idx, D) -> float:
    return float(sum(D[idx[a], idx[b]] for a, b in zip(route, route[1:])))


def _local_search(routes, lengths, idx, D, deadline) -> None:
    improved = True
    while improved and time.monotonic() < deadline:
        improved = (
            _two_opt_pass(routes, lengths, idx, D)
            or _relocate_pass(routes, lengths, idx, D)
            or _swap_pass(routes, lengths, idx, D)
        )


def _two_opt_pass(routes, lengths, idx, D) -> bool:
    """Reverse a segment of one route; start vertices stay pinned."""
    any_improved = False
    for r, route in enumerate(routes):
        n = len(route)
        improved = True
        while improved:
            improved = False
            for i in range(1, n - 1):
                a = idx[route[i - 1]]
                for j in range(i + 1, n):
                    ri, rj = idx[route[i]], idx[route[j]]
                    delta = D[a, rj] - D[a, ri]
                    if j + 1 < n:
                        nxt = idx[route[j + 1]]
                        delta += D[ri, nxt] - D[rj, nxt]
                    if delta < -_EPS:
                        route[i:j + 1] = reversed(route[i:j + 1])
                        lengths[r] += delta
                        improved = True
                        any_improved = True
                        break
                if improved:
                    break
    return any_improved


def _lex_better(new_mk, new_tot, old_mk, old_tot) -> bool:
    if new_mk < old_mk - _EPS:
        return True
    return new_mk < old_mk + _EPS and new_tot < old_tot - _EPS


def _relocate_pass(routes, lengths, idx, D) -> bool:
    makespan = max(lengths)
    total = sum(lengths)
    for r1 in range(len(routes)):
        route1 = routes[r1]
        for p1 in range(1, len(route1)):
            v = route1[p1]
            iv = idx[v]
            prv = idx[route1[p1 - 1]]
            gain = -D[prv, iv]
            if p1 + 1 < len(route1):
                nxt = idx[route1[p1 + 1]]
                gain += D[prv, nxt] - D[iv, nxt]
            for r2 in range(len(routes)):
                if r2 == r1:
                    continue
                route2 = routes[r2]
                for p2 in range(1, len(route2) + 1):
                    u = idx[route2[p2 - 1]]
                    add = D[u, iv]
                    if p2 < len(route2):
                        w = idx[route2[p2]]
                        add += D[iv, w] - D[u, w]
                    new1 = lengths[r1] + gain
                    new2 = lengths[r2] + add
                    new_mk = max(
                        new1, new2,
                        max((lengths[k] for k in range(len(routes))
                             if k not in (r1, r2)), default=0.0),
                    )
                    new_tot = total + gain + add
                    if _lex_better(new_mk, new_tot, makespan, total):
                        route2.insert(p2, route1.pop(p1))
                        lengths[r1] = new1
                        lengths[r2] = new2
                        return True
    return False


def _swap_pass(routes, lengths, idx, D) -> bool:
    makespan = max(lengths)
    total = sum(lengths)
    for r1 in range(len(routes)):
        route1 = routes[r1]
        for r2 in range(r1 + 1, len(routes)):
            route2 = routes[r2]
            for p1 in range(1, len(route1)):
                for p2 in range(1, len(route2)):
                    new_r1 = route1[:p1] + [route2[p2]] + route1[p1 + 1:]
                    new_r2 = route2[:p2] + [route1[p1]] + route2[p2 + 1:]
                    new1 = _route_length(new_r1, idx, D)
                    new2 = _route_length(new_r2, idx, D)
                    new_mk = max(
                        new1, new2,
                        max((lengths[k] for k in range(len(routes))
                             if k not in (r1, r2)), default=0.0),
                    )
                    new_tot = total - lengths[r1] - lengths[r2] + new1 + new2
                    if _lex_better(new_mk, new_tot, makespan, total):
                        routes[r1] = new_r1
                        routes[r2] = new_r2
                        lengths[r1] = new1
                        lengths[r2] = new2
                        return True
    return False


def expand_to_walk(env: EnvGraph, oracle: DistanceOracle, route: list[int],
                   robot: int = 0) -> Walk:
    """Replace each metric-closure hop by its reconstructed shortest path."""
    for v in route:
        if v not in env.vertices:
            raise ValueError(f"route vertex {v} not in graph")
    if not route:
        raise ValueError("empty route")
    walk = [route[0]]
    length = 0.0
    for a, b in zip(route, route[1:]):
        seg = oracle.path(a, b)
        walk.extend(seg[1:])
        length += oracle.dist(a, b)
    return Walk(robot=robot, vertices=walk, length=length)


def vrp_to_dict(sol: VrpSolution) -> dict:
    return {
        "seed": sol.seed,
        "starts": sol.starts,
        "makespan": sol.makespan,
        "routes": [
            {"robot": r, "route": route, "length": sol.lengths[r]}
            for r, route in enumerate(sol.routes)
        ],
    }


def vrp_from_dict(data: dict) -> VrpSolution:
    routes = [None] * len(data["routes"])
    lengths = [0.0] * len(data["routes"])
    for item in data["routes"]:
        routes[item["robot"]] = [int(v) for v in item["route"]]
        lengths[item["robot"]] = float(item["length"])
    return VrpSolution(routes=routes, lengths=lengths,
                       starts=[int(s) for s in data["starts"]],
                       seed=int(data.get("seed", 0)))

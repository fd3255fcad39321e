"""Insertion of selected loop edges into the coverage walks.

Intra-robot edges become go-and-return detours spliced at the robot's own
pose vertex; inter-robot edges are first assigned to one of their two
robots by an exact min-makespan branch-and-bound, then spliced the same
way.  Every detour costs 2 * omega.
"""

from __future__ import annotations

from dataclasses import dataclass

from .candidates import GroundSet, LoopCandidate
from .env import DistanceOracle
from .posegraph import CollabPoseGraph
from .vrp import Walk


@dataclass
class Detour:
    robot: int
    at_vertex: int
    to_vertex: int
    omega: float
    edge: tuple[int, int]


@dataclass
class FinalPlan:
    walks: list[Walk]
    base_lengths: list[float]
    lengths: list[float]
    detours: list[Detour]
    allocation: dict[tuple[int, int], int]

    @property
    def makespan(self) -> float:
        return max(self.lengths)

    def to_dict(self) -> dict:
        return {
            "makespan": self.makespan,
            "robots": [
                {
                    "robot": w.robot,
                    "walk": w.vertices,
                    "length": self.lengths[r],
                    "base_length": self.base_lengths[r],
                    "detours": [
                        {"at_vertex": d.at_vertex, "to_vertex": d.to_vertex,
                         "omega": d.omega, "edge": list(d.edge)}
                        for d in self.detours if d.robot == w.robot
                    ],
                }
                for r, w in enumerate(self.walks)
            ],
            "allocation": [
                {"edge": list(edge), "robot": robot}
                for edge, robot in sorted(self.allocation.items())
            ],
        }


def allocate_inter(
    inter: list[tuple[float, int, int]],
    base_lengths: list[float],
) -> tuple[list[int], float]:
    """Exact min-makespan assignment of inter-robot detours.

    inter holds (detour_cost, robot_a, robot_b) per edge; the result picks
    one robot per edge.  Depth-first branch and bound, pruned by the larger
    of the current maximum and an average-load relaxation over the involved
    robots; first-found optimum wins ties, which makes the assignment
    vector lexicographically smallest (robot_a preferred).
    """
    loads = list(base_lengths)
    k = len(inter)
    best_choice: list[int] = [0] * k
    best_val = float("inf")
    if k == 0:
        return [], max(loads, default=0.0)

    suffix_cost = [0.0] * (k + 1)
    for t in range(k - 1, -1, -1):
        suffix_cost[t] = suffix_cost[t + 1] + inter[t][0]
    involved = sorted({r for _, a, b in inter for r in (a, b)})

    def bound(t: int) -> float:
        cur = max(loads)
        avg = (sum(loads[r] for r in involved) + suffix_cost[t]) / len(involved)
        return max(cur, avg)

    choice = [0] * k

    def dfs(t: int) -> None:
        nonlocal best_val
        if bound(t) >= best_val - 1e-12:
            return
        if t == k:
            val = max(loads)
            if val < best_val - 1e-12:
                best_val = val
                best_choice[:] = choice
            return
        cost, ra, rb = inter[t]
        for pick, robot in ((0, ra), (1, rb)):
            choice[t] = pick
            loads[robot] += cost
            dfs(t + 1)
            loads[robot] -= cost
        choice[t] = 0

    dfs(0)
    return best_choice, best_val


def _splice(walk: Walk, insertions: list[tuple[int, list[int]]]) -> list[int]:
    """Insert detour paths after the given positions of the original walk."""
    by_pos: dict[int, list[int]] = {}
    for pos, path in insertions:
        by_pos.setdefault(pos, []).extend(path)
    out: list[int] = []
    for pos, v in enumerate(walk.vertices):
        out.append(v)
        if pos in by_pos:
            out.extend(by_pos[pos])
    return out


def insert_intra(walks: list[Walk], cand: LoopCandidate, cpg: CollabPoseGraph,
                 oracle: DistanceOracle) -> list[Walk]:
    """Splice a single intra-robot detour, returning new walks.

    The later pose's vertex hosts the go-and-return to the earlier pose's
    vertex; the walk length grows by exactly 2 * omega.
    """
    robot = cpg.pose_robot[cand.j]
    if cpg.pose_robot[cand.i] != robot:
        raise ValueError(f"edge ({cand.i},{cand.j}) is not intra-robot")
    v_at = cpg.pose_vertex[cand.j]
    v_to = cpg.pose_vertex[cand.i]
    out = []
    for w in walks:
        if w.robot != robot:
            out.append(w)
            continue
        if v_at not in w.vertices:
            raise ValueError(f"pose vertex {v_at} is not on robot {robot}'s walk")
        pos = w.vertices.index(v_at)
        path = [] if v_at == v_to else (
            oracle.path(v_at, v_to)[1:] + oracle.path(v_to, v_at)[1:])
        out.append(Walk(robot=robot, vertices=_splice(w, [(pos, path)]),
                        length=w.length + 2.0 * cand.omega))
    return out


def finalize(
    walks: list[Walk],
    selected: list[LoopCandidate],
    cpg: CollabPoseGraph,
    oracle: DistanceOracle,
    ground: GroundSet | None = None,
) -> FinalPlan:
    """Apply every selected loop edge to its robot's walk.

    Intra edges go straight in; inter edges are assigned by the exact
    min-makespan allocation first (with intra detours already counted in
    the base lengths, mirroring the two-step epilogue).
    """
    walk_of = {w.robot: w for w in walks}
    base = {w.robot: w.length for w in walks}
    lengths = dict(base)

    intra: list[LoopCandidate] = []
    inter: list[LoopCandidate] = []
    for cand in selected:
        ri = cpg.pose_robot[cand.i]
        rj = cpg.pose_robot[cand.j]
        (intra if ri == rj else inter).append(cand)

    detours: list[Detour] = []
    insertions: dict[int, list[tuple[int, list[int]]]] = {w.robot: [] for w in walks}

    def schedule(cand: LoopCandidate, robot: int, own: int) -> None:
        other = cand.j if own == cand.i else cand.i
        v_at = cpg.pose_vertex[own]
        v_to = cpg.pose_vertex[other]
        walk = walk_of[robot]
        if v_at not in walk.vertices:
            raise ValueError(
                f"pose vertex {v_at} is not on robot {robot}'s walk")
        pos = walk.vertices.index(v_at)
        if v_at == v_to:
            path: list[int] = []
        else:
            out = oracle.path(v_at, v_to)
            back = oracle.path(v_to, v_at)
            path = out[1:] + back[1:]
        insertions[robot].append((pos, path))
        lengths[robot] += 2.0 * cand.omega
        detours.append(Detour(robot=robot, at_vertex=v_at, to_vertex=v_to,
                              omega=cand.omega, edge=(cand.i, cand.j)))

    allocation: dict[tuple[int, int], int] = {}
    for cand in intra:
        # the later pose hosts the detour: go back to the earlier vertex
        robot = cpg.pose_robot[cand.j]
        schedule(cand, robot, own=cand.j)
        allocation[(cand.i, cand.j)] = robot

    base_for_milp = [0.0] * len(walks)
    for w in walks:
        base_for_milp[w.robot] = lengths[w.robot]
    items = [(2.0 * c.omega, cpg.pose_robot[c.i], cpg.pose_robot[c.j])
             for c in inter]
    choice, _ = allocate_inter(items, base_for_milp)
    for cand, pick in zip(inter, choice):
        own = cand.i if pick == 0 else cand.j
        robot = cpg.pose_robot[own]
        schedule(cand, robot, own=own)
        allocation[(cand.i, cand.j)] = robot

    final_walks = []
    final_lengths = []
    base_lengths = []
    for w in sorted(walks, key=lambda w: w.robot):
        vertices = _splice(w, insertions[w.robot])
        final_walks.append(Walk(robot=w.robot, vertices=vertices,
                                length=lengths[w.robot]))
        final_lengths.append(lengths[w.robot])
        base_lengths.append(base[w.robot])

    covered = set()
    for w in final_walks:
        covered.update(w.vertices)
    original = set()
    for w in walks:
        original.update(w.vertices)
    if not original <= covered:
        raise RuntimeError("coverage lost during loop-edge insertion")

    return FinalPlan(walks=final_walks, base_lengths=base_lengths,
                     lengths=final_lengths, detours=detours,
                     allocation=allocation)

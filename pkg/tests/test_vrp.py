import pytest

from cge.env import EnvGraph, generate_random_env, shortest_paths
from cge.vrp import expand_to_walk, solve_vrp, vrp_from_dict, vrp_to_dict


def _path_graph():
    return EnvGraph(vertices={0: (0, 0), 1: (1, 0), 2: (2, 0)},
                    edges={(0, 1): 1.0, (1, 2): 1.0})


def _star_graph():
    return EnvGraph(vertices={0: (0, 0), 1: (2, 0), 2: (-3, 0)},
                    edges={(0, 1): 2.0, (0, 2): 3.0})


def test_single_robot_path_graph():
    env = _path_graph()
    sol = solve_vrp(env, [0], time_limit_s=1)
    assert sol.routes == [[0, 1, 2]]
    assert sol.makespan == pytest.approx(2.0)


def test_two_robots_star_split():
    env = _star_graph()
    sol = solve_vrp(env, [0, 0], time_limit_s=1)
    leaves = {tuple(r) for r in sol.routes}
    assert leaves == {(0, 1), (0, 2)}
    assert sol.makespan == pytest.approx(3.0)


def test_empty_starts_rejected():
    with pytest.raises(ValueError):
        solve_vrp(_path_graph(), [])


def test_unknown_start_rejected():
    with pytest.raises(ValueError):
        solve_vrp(_path_graph(), [99])


def test_coverage_and_multi_robot_speedup():
    env = generate_random_env(60, vertex_removal_frac=0.0,
                              edge_removal_frac=0.0, coord_noise_sigma=0.0,
                              seed=0)
    oracle = shortest_paths(env)
    solo = solve_vrp(env, [0], time_limit_s=3, oracle=oracle)
    team = solve_vrp(env, [0, 0, 0], time_limit_s=3, oracle=oracle)
    covered = set()
    for route in team.routes:
        covered.update(route)
    assert covered == set(env.vertices)
    assert team.makespan <= solo.makespan + 1e-9


def test_deterministic_given_seed():
    env = generate_random_env(80, seed=4)
    a = solve_vrp(env, [min(env.vertices)] * 3, time_limit_s=3, seed=1)
    b = solve_vrp(env, [min(env.vertices)] * 3, time_limit_s=3, seed=1)
    assert a.routes == b.routes
    assert a.lengths == b.lengths


def test_route_lengths_consistent_with_oracle():
    env = generate_random_env(60, seed=8)
    oracle = shortest_paths(env)
    sol = solve_vrp(env, [min(env.vertices)] * 2, time_limit_s=3, oracle=oracle)
    for route, length in zip(sol.routes, sol.lengths):
        total = sum(oracle.dist(a, b) for a, b in zip(route, route[1:]))
        assert total == pytest.approx(length, rel=1e-9)


def test_expand_forced_detour():
    env = EnvGraph(vertices={0: (0, 0), 1: (1, 0), 2: (2, 0)},
                   edges={(0, 1): 1.0, (1, 2): 1.0})
    oracle = shortest_paths(env)
    walk = expand_to_walk(env, oracle, [0, 2])
    assert walk.vertices == [0, 1, 2]
    assert walk.length == pytest.approx(2.0)


def test_expand_single_vertex():
    env = _path_graph()
    oracle = shortest_paths(env)
    walk = expand_to_walk(env, oracle, [1])
    assert walk.vertices == [1]
    assert walk.length == 0.0


def test_walks_are_realizable_and_match_distances():
    env = generate_random_env(80, seed=12)
    oracle = shortest_paths(env)
    sol = solve_vrp(env, [min(env.vertices)] * 3, time_limit_s=3, oracle=oracle)
    covered = set()
    for r, route in enumerate(sol.routes):
        walk = expand_to_walk(env, oracle, route, r)
        covered.update(walk.vertices)
        for a, b in zip(walk.vertices, walk.vertices[1:]):
            assert env.has_edge(a, b)
        expect = sum(oracle.dist(a, b) for a, b in zip(route, route[1:]))
        assert walk.length == pytest.approx(expect, rel=1e-9)
    assert covered >= set(env.vertices)


def test_vrp_json_roundtrip():
    env = generate_random_env(60, seed=1)
    sol = solve_vrp(env, [min(env.vertices)] * 2, time_limit_s=2)
    again = vrp_from_dict(vrp_to_dict(sol))
    assert again.routes == sol.routes
    assert again.lengths == sol.lengths
    assert again.starts == sol.starts

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cge.env import (EnvGraph, env_from_dict, env_to_dict,
                     generate_random_env, shortest_paths)


def test_grid_counts_60m():
    env = generate_random_env(60, seed=11)
    # 7x7 grid minus floor(0.1 * 49) = 4 vertices
    assert env.n_vertices == 49 - 4
    assert env.is_connected()


def test_grid_counts_120m():
    env = generate_random_env(120, seed=11)
    assert env.n_vertices == 169 - 16


def test_no_perturbation_gives_exact_grid():
    env = generate_random_env(60, vertex_removal_frac=0.0,
                              edge_removal_frac=0.0, coord_noise_sigma=0.0,
                              seed=0)
    assert env.n_vertices == 49
    assert env.n_edges == 2 * 7 * 6
    assert all(abs(w - 10.0) < 1e-12 for w in env.edges.values())


def test_seed_reproducibility_bitwise():
    a = json.dumps(env_to_dict(generate_random_env(80, seed=5)))
    b = json.dumps(env_to_dict(generate_random_env(80, seed=5)))
    assert a == b


def test_side_too_small_rejected():
    with pytest.raises(ValueError):
        generate_random_env(15, grid_step=10)


def test_roundtrip_json():
    env = generate_random_env(60, seed=2)
    again = env_from_dict(env_to_dict(env))
    assert again.vertices == env.vertices
    assert again.edges == env.edges


def _triangle():
    return EnvGraph(
        vertices={0: (0.0, 0.0), 1: (3.0, 0.0), 2: (3.0, 4.0)},
        edges={(0, 1): 3.0, (1, 2): 4.0, (0, 2): 10.0})


def test_shortest_path_prefers_detour():
    oracle = shortest_paths(_triangle())
    assert oracle.dist(0, 2) == pytest.approx(7.0)
    assert oracle.path(0, 2) == [0, 1, 2]


def test_zero_self_distance():
    oracle = shortest_paths(_triangle())
    for v in (0, 1, 2):
        assert oracle.dist(v, v) == 0.0
        assert oracle.path(v, v) == [v]


def test_grid_corner_to_corner():
    env = generate_random_env(60, vertex_removal_frac=0.0,
                              edge_removal_frac=0.0, coord_noise_sigma=0.0,
                              seed=0)
    oracle = shortest_paths(env)
    assert oracle.dist(0, 48) == pytest.approx(120.0)


def test_path_length_matches_distance():
    env = generate_random_env(80, seed=9)
    oracle = shortest_paths(env)
    ids = sorted(env.vertices)
    for u, v in [(ids[0], ids[-1]), (ids[3], ids[17]), (ids[5], ids[5])]:
        path = oracle.path(u, v)
        total = sum(env.edge_length(a, b) for a, b in zip(path, path[1:]))
        assert total == pytest.approx(oracle.dist(u, v), rel=1e-9)
        for a, b in zip(path, path[1:]):
            assert env.has_edge(a, b)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), side=st.sampled_from([60, 80, 100]))
def test_oracle_metric_properties(seed, side):
    import numpy as np

    env = generate_random_env(side, seed=seed)
    oracle = shortest_paths(env)
    D = oracle.dist_matrix
    assert np.allclose(D, D.T, atol=1e-9)
    assert (D.diagonal() == 0).all()
    # direct edges can never beat the shortest path
    for (u, v), w in env.edges.items():
        assert D[oracle.index[u], oracle.index[v]] <= w + 1e-9
    # spot-check the triangle inequality
    n = D.shape[0]
    rngseed = (seed * 7919 + 13) % n
    for i in range(0, n, 7):
        j = (i + rngseed) % n
        k = (i + 2 * rngseed + 1) % n
        assert D[i, k] <= D[i, j] + D[j, k] + 1e-9


def test_validate_catches_disconnection():
    bad = EnvGraph(vertices={0: (0, 0), 1: (1, 0), 2: (9, 9)},
                   edges={(0, 1): 1.0})
    with pytest.raises(ValueError):
        bad.validate()


def test_validate_catches_bad_length():
    bad = EnvGraph(vertices={0: (0, 0), 1: (1, 0)},
                   edges={(0, 1): math.inf})
    with pytest.raises(ValueError):
        bad.validate()

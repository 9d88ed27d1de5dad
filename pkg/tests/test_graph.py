from itertools import combinations

import numpy as np
import pytest

from facar import (
    CostError,
    DegenerateVariableError,
    ParameterError,
    build_graph,
    enumerate_neighborhoods,
    verify_enum_bound,
)


def brute_force_neighborhoods(neighbors, p, m):
    """All subsets of {0..p-1}: keep those containing j, of size <= m, whose
    induced subgraph is connected."""

    def connected(subset):
        subset = set(subset)
        start = next(iter(subset))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in neighbors[v]:
                if w in subset and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == subset

    out = []
    for j in range(p):
        sets = []
        for size in range(1, m + 1):
            for combo in combinations(range(p), size):
                if j in combo and connected(combo):
                    sets.append(tuple(sorted(combo)))
        out.append(tuple(sorted(sets)))
    return tuple(out)


def test_build_graph_simple():
    g = np.array([[1.0, 0.6, 0.1], [0.6, 1.0, 0.2], [0.1, 0.2, 1.0]])
    graph = build_graph(g, 0.5)
    assert graph.edge_set() == {(0, 1)}
    assert graph.max_degree == 1


def test_build_graph_identity_empty():
    graph = build_graph(np.eye(5), 0.5)
    assert graph.edge_set() == set()
    assert graph.max_degree == 0


def test_build_graph_normalization():
    g = np.array([[4.0, 1.2], [1.2, 1.0]])
    assert build_graph(g, 0.5).edge_set() == {(0, 1)}  # 1.2 / 2 = 0.6 > 0.5
    assert build_graph(g, 0.6).edge_set() == set()  # strict inequality at 0.6


def test_build_graph_threshold_strict():
    g = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert build_graph(g, 0.5).edge_set() == set()


def test_build_graph_degenerate():
    g = np.eye(3)
    g[1, 1] = 0.0
    with pytest.raises(DegenerateVariableError, match="variable 1"):
        build_graph(g, 0.5)
    graph = build_graph(g, 0.5, drop_degenerate=True)
    assert graph.dropped == {1}
    assert graph.edge_set() == set()


def test_edge_monotonicity_in_delta():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((20, 10))
    g = a.T @ a / 20
    deltas = [0.1, 0.3, 0.5, 0.7, 0.9]
    edge_sets = [build_graph(g, d).edge_set() for d in deltas]
    for low, high in zip(edge_sets, edge_sets[1:]):
        assert high <= low


def test_enumerate_path_graph():
    # path 0-1 plus isolated 2, m=2
    g = np.eye(3)
    g[0, 1] = g[1, 0] = 0.9
    hoods = enumerate_neighborhoods(build_graph(g, 0.5), 2)
    assert hoods.for_node(0) == ((0,), (0, 1))
    assert hoods.for_node(1) == ((0, 1), (1,))
    assert hoods.for_node(2) == ((2,),)


def test_enumerate_triangle():
    g = np.full((3, 3), 0.9)
    np.fill_diagonal(g, 1.0)
    hoods = enumerate_neighborhoods(build_graph(g, 0.5), 3)
    assert set(hoods.for_node(0)) == {(0,), (0, 1), (0, 2), (0, 1, 2)}


def test_enumerate_m1_singletons():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((15, 8))
    hoods = enumerate_neighborhoods(build_graph(a.T @ a / 15, 0.3), 1)
    assert all(hoods.for_node(j) == ((j,),) for j in range(8))


def test_enumeration_matches_brute_force():
    rng = np.random.default_rng(2)
    for trial in range(40):
        p = int(rng.integers(3, 13))
        m = int(rng.integers(1, 5))
        density = rng.uniform(0.1, 0.6)
        adj = rng.random((p, p)) < density
        adj = np.triu(adj, 1)
        adj = adj | adj.T
        gram = np.where(adj, 0.8, 0.0) + np.eye(p)
        graph = build_graph(gram, 0.5)
        hoods = enumerate_neighborhoods(graph, m)
        neighbors = [set(nb) for nb in graph.neighbors]
        assert hoods.sets == brute_force_neighborhoods(neighbors, p, m)


def test_neighborhoods_sorted_and_anchored():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((25, 12))
    graph = build_graph(a.T @ a / 25, 0.2)
    hoods = enumerate_neighborhoods(graph, 3)
    for j in range(12):
        for subset in hoods.for_node(j):
            assert j in subset
            assert list(subset) == sorted(subset)
            assert len(subset) <= 3


def test_enum_bound_empty_graph():
    hoods = enumerate_neighborhoods(build_graph(np.eye(6), 0.5), 3)
    assert verify_enum_bound(hoods, build_graph(np.eye(6), 0.5))


def test_enum_bound_triangle_count():
    g = np.full((3, 3), 0.9)
    np.fill_diagonal(g, 1.0)
    graph = build_graph(g, 0.5)
    hoods = enumerate_neighborhoods(graph, 2)
    # 3 singletons + each node in 2 pairs = 9 anchored sets
    assert hoods.total_count == 9
    assert verify_enum_bound(hoods, graph)


def test_enum_bound_random_ar_designs():
    from facar import CovSpec, materialize_cov, sample_design

    sigma = materialize_cov(CovSpec("autoregressive", p=15, rho=0.6))
    for seed in range(100):
        X = sample_design(sigma, 40, seed=seed)
        graph = build_graph(X.T @ X / 40, 0.35)
        hoods = enumerate_neighborhoods(graph, 3)
        assert verify_enum_bound(hoods, graph)


def test_degree_guard():
    g = np.full((60, 60), 0.9)
    np.fill_diagonal(g, 1.0)
    graph = build_graph(g, 0.5)
    with pytest.raises(CostError):
        enumerate_neighborhoods(graph, 3)
    enumerate_neighborhoods(graph, 2)  # m=2 always allowed


def test_bad_inputs():
    with pytest.raises(ParameterError):
        build_graph(np.eye(3), 0.0)
    with pytest.raises(ParameterError):
        build_graph(np.eye(3), 1.0)
    with pytest.raises(ParameterError):
        enumerate_neighborhoods(build_graph(np.eye(3), 0.5), 0)

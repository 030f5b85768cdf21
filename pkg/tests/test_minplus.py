import pytest

from clique_steiner.engine import Engine
from clique_steiner.graph import INF, WeightedGraph, generate_graph
from clique_steiner.minplus import (
    distributed_apsp,
    iterated_squaring,
    minplus_product,
    next_cube,
    routing_walk,
    squaring_iterations,
    weight_matrix,
)
from clique_steiner.oracles import floyd_warshall


def identity_matrix(n):
    return [[0 if i == j else INF for j in range(n)] for i in range(n)]


def test_product_with_identity_is_identity_operation():
    g = generate_graph("random-connected", 6, seed=2, terminal_count=2)
    A = weight_matrix(g)
    C, _ = minplus_product(A, identity_matrix(6))
    assert C == A


def test_product_triangle_witness():
    # brute force over the only useful intermediate: 0-1 (1) then 1-2 (2)
    g = WeightedGraph(3, {(0, 1): 1, (1, 2): 2, (0, 2): 4}, [0])
    C, Q = minplus_product(weight_matrix(g), weight_matrix(g))
    assert C[0][2] == 3
    assert Q[0][2] == 1


def test_squaring_converged_matrix_is_fixpoint():
    g = generate_graph("random-connected", 7, seed=5, terminal_count=2)
    D, _ = iterated_squaring(weight_matrix(g))
    C, _ = minplus_product(D, D)
    assert C == D


def test_witness_reevaluation_reproduces_entry():
    g = generate_graph("random-connected", 8, seed=9, terminal_count=2)
    A = weight_matrix(g)
    C, Q = minplus_product(A, A)
    for u in range(8):
        for v in range(8):
            if Q[u][v] is not None:
                w = Q[u][v]
                assert C[u][v] == A[u][w] + A[w][v]


def test_iterated_squaring_path_routing():
    g = generate_graph("path", 3, seed=1, terminal_count=1, weight_range=(1, 1))
    D, R = iterated_squaring(weight_matrix(g))
    assert D[0][2] == 2
    assert R[0][2] == 1


def test_single_node():
    D, R = iterated_squaring([[0]])
    assert D == [[0]]
    assert R == [[None]]
    assert squaring_iterations(1) == 0


@pytest.mark.parametrize("seed", range(30, 42))
def test_iterated_squaring_matches_floyd_warshall(seed):
    g = generate_graph("random-connected", 4 + seed % 6, seed=seed, terminal_count=2)
    D, R = iterated_squaring(weight_matrix(g))
    assert D == floyd_warshall(g)


def test_entries_never_increase_across_squarings():
    g = generate_graph("random-connected", 9, seed=11, terminal_count=2)
    M = weight_matrix(g)
    for _ in range(squaring_iterations(9)):
        C, _ = minplus_product(M, M)
        for u in range(9):
            for v in range(9):
                assert C[u][v] <= M[u][v]
        M = C


@pytest.mark.parametrize("seed", range(60, 68))
def test_routing_walks_accumulate_exact_distances(seed):
    g = generate_graph("random-connected", 5 + seed % 6, seed=seed, terminal_count=2)
    W = weight_matrix(g)
    D, R = iterated_squaring(W)
    for u in range(g.n):
        for v in range(g.n):
            if u == v:
                continue
            path = routing_walk(D, R, W, u, v)
            assert len(path) <= g.n
            total = sum(g.weight(a, b) for a, b in zip(path, path[1:]))
            assert total == D[u][v]


def test_next_cube():
    assert [next_cube(k) for k in (1, 2, 8, 9, 27, 28, 64)] == [1, 8, 8, 27, 27, 64, 64]


@pytest.mark.parametrize("n,seed", [(5, 3), (8, 4), (10, 5), (12, 6), (20, 7), (27, 8)])
def test_distributed_matches_local(n, seed):
    g = generate_graph("random-connected", n, seed=seed, terminal_count=2)
    D, R, metrics = distributed_apsp(g, Engine(max_rounds=100_000))
    D_local, R_local = iterated_squaring(weight_matrix(g))
    assert D == floyd_warshall(g)
    assert D == [row[:] for row in D_local]
    assert R == R_local
    assert metrics.messages_sent > 0


def test_distributed_complete_graph_converges_in_first_squaring():
    g = generate_graph("complete", 8, seed=1, terminal_count=2, weight_range=(1, 1))
    W = weight_matrix(g)
    C, _ = minplus_product(W, W)
    assert all(C[u][v] == 1 for u in range(8) for v in range(8) if u != v)
    C2, _ = minplus_product(C, C)
    assert C2 == C
    D, _, _ = distributed_apsp(g, Engine(max_rounds=100_000))
    assert D == C


def test_distributed_round_envelope_constant_is_recorded():
    import math

    observed = {}
    for n, seed in ((8, 1), (27, 2)):
        g = generate_graph("random-connected", n, seed=seed, terminal_count=2)
        _, _, metrics = distributed_apsp(g, Engine(max_rounds=100_000))
        np_ = next_cube(n)
        envelope = np_ ** (1 / 3) * math.ceil(math.log2(np_))
        observed[n] = metrics.rounds_elapsed / envelope
    # recorded, not pinned a priori: the fitted constant stays moderate
    assert max(observed.values()) < 8, observed

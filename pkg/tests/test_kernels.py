import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from meshfwd import kernels
from meshfwd.kernels import _pykernels

try:
    from meshfwd.kernels import _ckernels
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python")]
BACKENDS.append(
    pytest.param(
        _ckernels,
        id="cython",
        marks=pytest.mark.skipif(_ckernels is None, reason="extension not built"),
    )
)


def random_adj(rng, n, p):
    adj = {i: set() for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                adj[i].add(j)
                adj[j].add(i)
    return adj


def oracle_first_hops(adj, src):
    """Lowest-id neighbour of src lying on some shortest path, by enumeration."""
    g = nx.Graph()
    g.add_nodes_from(adj)
    g.add_edges_from((u, v) for u, vs in adj.items() for v in vs)
    dist = nx.single_source_shortest_path_length(g, src)
    out = {}
    for d in dist:
        if d == src:
            continue
        to_d = nx.single_source_shortest_path_length(g, d)
        out[d] = min(v for v in adj[src] if to_d.get(v) == dist[d] - 1)
    return dist, out


@pytest.mark.parametrize("impl", BACKENDS)
def test_bfs_routes_matches_enumeration(impl):
    rng = random.Random(7)
    for _ in range(60):
        n = rng.randint(1, 14)
        adj = random_adj(rng, n, rng.uniform(0.1, 0.6))
        ids, indptr, indices = kernels.csr(adj)
        src = rng.randrange(n)
        dist, first = impl.bfs_routes(indptr, indices, src)
        want_dist, want_first = oracle_first_hops(adj, src)
        for v in range(n):
            assert dist[v] == want_dist.get(v, -1)
            if v != src and v in want_dist:
                assert first[v] == want_first[v]
            else:
                assert first[v] == -1


@pytest.mark.parametrize("impl", BACKENDS)
def test_all_pairs_hops_matches_networkx(impl):
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randint(1, 15)
        adj = random_adj(rng, n, 0.25)
        _, indptr, indices = kernels.csr(adj)
        rows = impl.all_pairs_hops(indptr, indices)
        g = nx.Graph()
        g.add_nodes_from(adj)
        g.add_edges_from((u, v) for u, vs in adj.items() for v in vs)
        want = dict(nx.all_pairs_shortest_path_length(g))
        for u in range(n):
            for v in range(n):
                assert rows[u][v] == want[u].get(v, -1)


@pytest.mark.parametrize("impl", BACKENDS)
def test_swrr_trace(impl):
    credits = [0.0, 0.0]
    picks = [impl.swrr_pick(credits, [2.0, 1.0]) for _ in range(3)]
    assert picks == [0, 1, 0]
    assert credits == [0.0, 0.0]


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize(
    "sizes,expect", [([700, 500, 400], 2), ([512], 1), ([1472], 1), ([1473], 0), ([], 0)]
)
def test_greedy_pack(impl, sizes, expect):
    assert impl.greedy_pack(sizes, 28, 1500) == expect


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
@settings(max_examples=200, deadline=None)
@given(
    weights=st.lists(st.integers(1, 9), min_size=1, max_size=5),
    steps=st.integers(1, 50),
    sizes=st.lists(st.integers(1, 800), max_size=10),
)
def test_backends_agree(weights, steps, sizes):
    w = [float(x) for x in weights]
    a, b = [0.0] * len(w), [0.0] * len(w)
    for _ in range(steps):
        assert _pykernels.swrr_pick(a, w) == _ckernels.swrr_pick(b, w)
    assert a == b
    assert _pykernels.greedy_pack(sizes, 28, 1500) == _ckernels.greedy_pack(sizes, 28, 1500)


def test_csr_layout():
    ids, indptr, indices = kernels.csr({5: {9}, 9: {5, 12}})
    assert ids == [5, 9, 12]
    assert indptr.tolist() == [0, 1, 3, 3]
    assert indices.dtype == np.int64
    assert indices.tolist() == [1, 0, 2]


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_env_forces_fallback():
    import os
    import subprocess
    import sys

    env = {**os.environ, "MESHFWD_PURE_PYTHON": "1"}
    out = subprocess.run(
        [sys.executable, "-c", "from meshfwd import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"

import math
import random

import networkx as nx
import pytest

from meshfwd.net import NodeSpec, RadioSpec, build_topology


def random_connected_nodes(rng: random.Random, n: int, range_m: float = 100.0, channels=(1,)):
    """Grow a connected unit-disk layout: each new node lands within range of an old one."""
    pts = [(0.0, 0.0)]
    while len(pts) < n:
        ox, oy = rng.choice(pts)
        r = rng.uniform(0.3, 0.999) * range_m
        a = rng.uniform(0, 2 * math.pi)
        pts.append((ox + r * math.cos(a), oy + r * math.sin(a)))
    radios = tuple(RadioSpec(c) for c in channels)
    return [NodeSpec(i, p, radios) for i, p in enumerate(pts)]


def nx_graph(topo) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(topo.nodes)
    for link in topo.links:
        if link.up:
            g.add_edge(link.a, link.b)
    return g


def bfs_oracle(topo) -> dict[int, dict[int, int]]:
    return {u: dict(d) for u, d in nx.all_pairs_shortest_path_length(nx_graph(topo))}


@pytest.fixture
def line3():
    nodes = [NodeSpec(i, (100.0 * i, 0.0), (RadioSpec(1),)) for i in range(3)]
    return build_topology(nodes, 120.0)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance(request):
    """Collects one PASS/FAIL line per acceptance criterion."""
    return request.config.stash.setdefault(_ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

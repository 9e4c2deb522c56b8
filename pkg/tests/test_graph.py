import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddgraphs.graph import (
    Acyclic,
    Certificate,
    DiameterBudgetExceeded,
    Disconnected,
    NotBipartite,
    SelfLoop,
    VertexOutOfRange,
    bfs_distances,
    bipartite_moore_bound,
    bipartition,
    build_graph,
    certify,
    degree_stats,
    diameter,
    diameter_bfs_count,
    disjoint_shortest_paths,
    eccentricities,
    girth,
    moore_bound,
)


def from_nx(G):
    G = nx.convert_node_labels_to_integers(G)
    return build_graph(list(G.edges()), G.number_of_nodes())


def cycle(n):
    return build_graph([(i, (i + 1) % n) for i in range(n)], n)


def complete(n):
    return build_graph([(i, j) for i in range(n) for j in range(i + 1, n)], n)


def test_build_graph_examples():
    g = complete(3)
    assert g.size == 3 and list(g.degrees) == [2, 2, 2]
    g = build_graph([], 5)
    assert g.order == 5 and g.size == 0
    g = build_graph([(0, 1), (1, 0)], 2)
    assert g.size == 1
    with pytest.raises(VertexOutOfRange):
        build_graph([(0, 5)], 5)
    with pytest.raises(SelfLoop):
        build_graph([(2, 2)], 3)


def test_adjacency_sorted_and_symmetric():
    rng = np.random.default_rng(1)
    e = rng.integers(0, 40, size=(200, 2))
    e = e[e[:, 0] != e[:, 1]]
    g = build_graph(e, 40)
    for v in range(40):
        row = g.neighbors(v)
        assert (np.diff(row) > 0).all()
        assert all(g.has_edge(int(w), v) for w in row)


def test_bfs_examples():
    g = build_graph([(0, 1), (1, 2)], 3)
    assert list(bfs_distances(g, 0)) == [0, 1, 2]
    g = build_graph([(0, 1)], 3)
    assert bfs_distances(g, 0)[2] == 3  # sentinel = order


def test_diameter_examples():
    assert diameter(complete(4)) == (1, "exact")
    assert diameter(complete(4), "bounded")[0] == 1
    with pytest.raises(Disconnected):
        diameter(build_graph([(0, 1)], 3))
    with pytest.raises(Disconnected):
        diameter(build_graph([(0, 1)], 3), "bounded")


def test_girth_examples():
    assert girth(complete(4)) == 3
    assert girth(cycle(7)) == 7
    with pytest.raises(Acyclic):
        girth(build_graph([(0, 1), (1, 2)], 3))


def test_bipartition_examples():
    a, b = bipartition(cycle(6))
    assert (len(a), len(b)) == (3, 3) and 0 in a
    with pytest.raises(NotBipartite) as exc:
        bipartition(complete(3))
    assert len(exc.value.cycle) % 2 == 1


def test_disjoint_paths_examples():
    assert disjoint_shortest_paths(cycle(6), 0, 3) == 2
    assert disjoint_shortest_paths(complete(4), 0, 1) == 1
    assert disjoint_shortest_paths(nx_grid(), 0, 8) == 2


def nx_grid():
    return from_nx(nx.grid_2d_graph(3, 3))


def test_degree_stats():
    assert degree_stats(complete(5))[:2] == (4, 4)
    star = build_graph([(0, i) for i in range(1, 5)], 5)
    lo, hi, hist = degree_stats(star)
    assert (lo, hi, hist) == (1, 4, {1: 4, 4: 1})


def test_moore_bounds():
    assert moore_bound(3, 2) == 10  # Petersen
    assert moore_bound(7, 2) == 50  # Hoffman-Singleton
    assert bipartite_moore_bound(3, 3) == 14  # Heawood
    assert bipartite_moore_bound(3, 6) == 126
    assert moore_bound(2, 3) == 7 and bipartite_moore_bound(2, 3) == 6


def random_connected(n, p, seed):
    G = nx.gnp_random_graph(n, p, seed=seed)
    # chain the components so the graph is connected
    comps = [min(c) for c in nx.connected_components(G)]
    G.add_edges_from(zip(comps, comps[1:]))
    return G


@given(st.integers(2, 60), st.floats(0.02, 0.4), st.integers(0, 10_000))
def test_diameter_modes_agree_with_networkx(n, p, seed):
    G = random_connected(n, p, seed)
    g = from_nx(G)
    exact = diameter(g)[0]
    assert exact == nx.diameter(G)
    assert diameter(g, "bounded", budget=10**6)[0] == exact
    ecc = eccentricities(g)
    assert list(ecc) == [nx.eccentricity(G, v) for v in range(n)]


@given(st.integers(3, 40), st.floats(0.05, 0.5), st.integers(0, 10_000))
def test_girth_matches_networkx(n, p, seed):
    G = random_connected(n, p, seed)
    g = from_nx(G)
    want = nx.girth(G)
    if want == float("inf"):
        with pytest.raises(Acyclic):
            girth(g)
    else:
        assert girth(g) == want


@given(st.integers(2, 30), st.floats(0.05, 0.5), st.integers(0, 10_000))
def test_disjoint_paths_against_brute_force(n, p, seed):
    G = random_connected(n, p, seed)
    g = from_nx(G)
    u, v = 0, n - 1
    d = nx.shortest_path_length(G, u, v)
    # oracle: Menger on the shortest-path DAG restricted to length-d paths
    H = nx.DiGraph()
    du = nx.single_source_shortest_path_length(G, u)
    dv = nx.single_source_shortest_path_length(G, v)
    for a, b in G.edges():
        for x, y in ((a, b), (b, a)):
            if du[x] + 1 + dv[y] == d:
                H.add_edge(x, y)
    want = 1 if d == 1 else len(list(nx.node_disjoint_paths(H, u, v))) if H.has_node(u) else 0
    assert disjoint_shortest_paths(g, u, v) == want


def test_bounded_budget_exhaustion_reports_bounds():
    g = cycle(40)
    with pytest.raises(DiameterBudgetExceeded) as exc:
        diameter(g, "bounded", budget=6)
    e = exc.value
    assert e.lower <= 20 <= e.upper and e.bfs_runs == 6
    value, runs = diameter_bfs_count(g, 10**6)
    assert value == 20 and runs <= 40


def test_certificate_json_roundtrip():
    cert = certify(cycle(8))
    data = json.loads(cert.dumps())
    assert set(data) == {"order", "min_degree", "max_degree", "bipartite", "girth", "diameter",
                         "diameter_method", "elapsed_ms"}
    assert (data["order"], data["girth"], data["diameter"], data["bipartite"]) == (8, 8, 4, True)
    back = Certificate.from_json(data)
    assert back.diameter == 4 and back.diameter_method == "exact"


def test_certify_fallback_to_exact():
    with pytest.raises(DiameterBudgetExceeded):
        certify(cycle(40), "bounded", budget=3)
    cert = certify(cycle(40), "bounded", budget=3, fallback_exact=True)
    assert cert.diameter == 20 and cert.diameter_method == "exact" and "3 BFS" in cert.note


def test_labels():
    g = build_graph([(0, 1)], 2, np.array([1, 2]), np.array([0, 0]))
    assert g.label(0) == "point0" and g.label(1) == "line0"
    assert cycle(3).label(2) == "v2"

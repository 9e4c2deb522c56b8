import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddgraphs.formats import (
    FORMATS,
    FormatUnsupported,
    dumps,
    format_for_path,
    from_graph6,
    loads,
    read_graph,
    to_dimacs,
    to_edgelist,
    to_graph6,
    write_graph,
)
from ddgraphs.graph import build_graph
from ddgraphs.moore import build_Hq

K3 = build_graph([(0, 1), (0, 2), (1, 2)], 3)


def test_k3_graph6():
    assert to_graph6(K3) == "Bw"
    assert nx.to_graph6_bytes(nx.complete_graph(3), header=False).strip() == b"Bw"


def test_k3_dimacs():
    assert to_dimacs(K3).splitlines() == ["p edge 3 3", "e 1 2", "e 1 3", "e 2 3"]


def test_edgelist_layout():
    lines = to_edgelist(K3).splitlines()
    assert lines == ["# vertices 3", "0 1", "0 2", "1 2"]


@pytest.mark.parametrize("fmt", FORMATS)
def test_h2_roundtrip(fmt):
    g = build_Hq(2)
    assert loads(dumps(g, fmt), fmt).same_as(g)


def test_graph6_against_networkx_decoder():
    g = build_Hq(2)
    G = nx.from_graph6_bytes(to_graph6(g).encode())
    assert sorted(map(tuple, g.edges().tolist())) == sorted(tuple(sorted(e)) for e in G.edges())


@given(st.integers(0, 140), st.floats(0, 0.3), st.integers(0, 1000))
def test_roundtrip_random(n, p, seed):
    G = nx.gnp_random_graph(n, p, seed=seed)
    g = build_graph(list(G.edges()), n)
    for fmt in FORMATS:
        assert loads(dumps(g, fmt), fmt).same_as(g)
    assert to_graph6(g).encode() == nx.to_graph6_bytes(G, header=False).strip()


def test_large_order_header():
    g = build_graph([(0, 99)], 100)
    text = to_graph6(g)
    assert text[0] == "~"
    assert from_graph6(text).same_as(g)


def test_unsupported(tmp_path):
    with pytest.raises(FormatUnsupported):
        dumps(K3, "gml")
    with pytest.raises(FormatUnsupported):
        format_for_path("x.gml")
    with pytest.raises(FormatUnsupported):
        from_graph6(":Fa@x^")  # sparse6


def test_file_helpers(tmp_path):
    g = build_Hq(2)
    for name in ("h.g6", "h.dimacs", "h.edges"):
        write_graph(g, tmp_path / name)
        assert read_graph(tmp_path / name).same_as(g)

from __future__ import annotations

from georec.data import ingest
from georec.graph import NodeRef, build_graph

from helpers import city, ev


def line_dataset(n_users: int, context: str = "g"):
    events = [ev(f"u{k:04d}", f"i{k:04d}", 0.0, 0.0) for k in range(n_users)]
    return ingest(events, [city(context, -1, -1, 1, 1)])


def test_empty_dataset_has_no_nodes():
    g = build_graph(ingest([], [city("g", -1, -1, 1, 1)]))
    assert g.nodes() == []
    assert g.neighbors(NodeRef(0, 0)) == []


def test_three_users_two_neighbors_each():
    d = line_dataset(3)
    g = build_graph(d)
    ctx = d.context_of("g")
    assert len(g.nodes()) == 3
    for u in range(3):
        nbrs = g.neighbors(NodeRef(u, ctx))
        assert len(nbrs) == 2
        assert NodeRef(u, ctx) not in nbrs


def test_many_users_neighbor_count():
    d = line_dataset(1062)
    g = build_graph(d)
    ctx = d.context_of("g")
    assert len(g.neighbors(NodeRef(0, ctx))) == 1061


def test_single_user_has_no_neighbors():
    d = line_dataset(1)
    g = build_graph(d)
    assert g.neighbors(NodeRef(0, d.context_of("g"))) == []


def test_unknown_context_yields_no_neighbors():
    d = line_dataset(3)
    g = build_graph(d)
    assert g.neighbors(NodeRef(0, 999)) == []


def test_cold_query_sees_every_resident(toy_dataset):
    g = build_graph(toy_dataset)
    rio = toy_dataset.context_of("rio")
    residents = toy_dataset.context_users(rio)
    cold = g.neighbors(NodeRef(-1, rio))
    assert len(cold) == len(residents)
    assert {v.user for v in cold} == residents


def test_nodes_partition_by_context(toy_dataset):
    d = toy_dataset
    g = build_graph(d)
    rio, sp = d.context_of("rio"), d.context_of("sp")
    by_ctx = {rio: set(), sp: set()}
    for v in g.nodes():
        by_ctx[v.context].add(v)
    assert set(g.context_nodes(rio)) == by_ctx[rio]
    assert set(g.context_nodes(sp)) == by_ctx[sp]
    assert len(g.nodes()) == len(by_ctx[rio]) + len(by_ctx[sp])


def test_same_user_across_contexts_is_two_nodes(toy_dataset):
    d = toy_dataset
    g = build_graph(d)
    a = d.users.get("a")
    rio, sp = d.context_of("rio"), d.context_of("sp")
    assert NodeRef(a, rio) in g.nodes()
    assert NodeRef(a, sp) in g.nodes()
    assert NodeRef(a, sp) not in g.neighbors(NodeRef(a, rio))


def test_adjacency_is_symmetric(small_synth):
    d, _ = small_synth
    g = build_graph(d)
    for v in g.nodes():
        for v2 in g.neighbors(v):
            assert v in g.neighbors(v2)


def test_neighbors_are_sorted_and_stable(toy_dataset):
    g = build_graph(toy_dataset)
    rio = toy_dataset.context_of("rio")
    nbrs = g.neighbors(NodeRef(0, rio))
    assert nbrs == sorted(nbrs, key=lambda v: (v.user, v.context))
    assert nbrs == g.neighbors(NodeRef(0, rio))

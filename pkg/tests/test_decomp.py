import itertools

import pytest
from hypothesis import given, settings

from homind.canon import canonical_key, graphs_up_to
from homind.errors import CapabilityError, ValidationError
from homind.graph import (Graph, clique, contract_edge, delete_edge, delete_vertex, grid, grid_vertex, path,
                          is_connected)
from homind.decomp import (ConstructionTree, PebbleForestCover, TreeDecomposition, convert, decide_membership,
                           enumerate_class, is_nice, make_nice, measure, search_ctree, search_guarded_unlabelled,
                           search_pfc, search_td, treedepth, treewidth, verify, witness_from_json)

from strategies import graphs


def grid_2x5_decomposition():
    """Path decomposition of grid(2,5) with triangle-shaped bags."""
    c = lambda i, j: grid_vertex(2, 5, i, j)
    bags = [
        {c(1, 2), c(1, 1), c(2, 1)}, {c(1, 2), c(2, 2), c(2, 1)}, {c(1, 3), c(1, 2), c(2, 2)},
        {c(1, 3), c(2, 3), c(2, 2)}, {c(1, 3), c(2, 3)}, {c(1, 3), c(2, 3), c(2, 4)},
        {c(1, 3), c(1, 4), c(2, 4)}, {c(1, 4), c(2, 4), c(2, 5)}, {c(1, 4), c(1, 5), c(2, 5)},
    ]
    parent = [1, 2, 3, 4, None, 4, 5, 6, 7]
    return TreeDecomposition(parent, bags, 4)


def grid_2x7_forest_cover():
    """Forest cover of grid(2,7); a(r, c) is the cell in row r+1, column c+1."""
    a = lambda r, c: grid_vertex(2, 7, r + 1, c + 1)
    up = {
        a(0, 3): None, a(1, 3): a(0, 3), a(0, 1): a(1, 3), a(0, 5): a(1, 3),
        a(1, 1): a(0, 1), a(0, 0): a(1, 1), a(1, 0): a(0, 0), a(0, 2): a(1, 1), a(1, 2): a(0, 2),
        a(1, 5): a(0, 5), a(0, 6): a(1, 5), a(1, 6): a(0, 6), a(0, 4): a(1, 5), a(1, 4): a(0, 4),
    }
    return up


def min_pebbles(g, parent):
    """Chromatic number of the pebble conflict graph, by plain backtracking."""
    anc = {}
    for v in parent:
        chain, x = [], parent[v]
        while x is not None:
            chain.append(x)
            x = parent[x]
        anc[v] = chain
    conflict = {v: set() for v in parent}
    for a, b in g.edges:
        u, v = (a, b) if a in anc[b] else (b, a)
        assert u in anc[v]
        for x in [v] + anc[v][: anc[v].index(u)]:
            conflict[u].add(x)
            conflict[x].add(u)
    order = sorted(parent, key=lambda v: len(anc[v]))
    for k in range(1, len(order) + 1):
        col = {}

        def go(i):
            if i == len(order):
                return True
            v = order[i]
            for c in range(k):
                if all(col.get(w) != c for w in conflict[v]):
                    col[v] = c
                    if go(i + 1):
                        return True
                    del col[v]
            return False

        if go(0):
            return k, {v: c + 1 for v, c in col.items()}


def test_grid_2x5_decomposition():
    g = grid(2, 5)
    td = grid_2x5_decomposition()
    assert verify(g, td).ok
    m = measure(td)
    # the bags hold three vertices, so the width equals the treewidth of the grid
    assert m["width"] == 2 == treewidth(g)
    assert verify(g, td, k=3).ok and not verify(g, td, k=2).ok


def test_grid_2x7_forest_cover():
    g = grid(2, 7)
    parent = grid_2x7_forest_cover()
    k, pebbles = min_pebbles(g, parent)
    w = PebbleForestCover(parent, pebbles)
    assert measure(w)["depth"] == 6
    assert verify(g, w, k, 6).ok
    assert not verify(g, PebbleForestCover(parent, {v: (p if p < k else 1) for v, p in pebbles.items()})).ok


def test_grid_2x7_construction_tree():
    g = grid(2, 7)
    w = search_ctree(g, 4, 6)
    assert w is not None and verify(g, w, 4, 6).ok
    assert w.elimination_depth() <= 6
    td = convert(g, w, "td")
    assert verify(g, td, 4, 6).ok and measure(td)["width"] <= 3
    pfc = convert(g, td, "pfc")
    assert verify(g, pfc, 4, 6).ok
    assert verify(g, convert(g, pfc, "td"), 4, 6).ok


def test_grid_2x7_guarded_tree():
    found = search_guarded_unlabelled(grid(2, 7), 3, 7)
    assert found is not None
    lab, w = found
    assert len(lab.labels) == 1 and w.guarded
    assert verify(lab, w, 3, 7, guarded=True).ok


def test_path_decomposition_of_p3():
    td = TreeDecomposition([None, 0], [{0, 1}, {1, 2}])
    m = measure(td)
    assert (m["width"], m["depth"]) == (1, 3)


def test_make_nice_single_bag():
    td = TreeDecomposition([None], [{0, 1, 2}])
    nice = make_nice(td)
    assert is_nice(nice) and verify(clique(3), nice).ok
    assert len(nice) == 7
    assert measure(nice)["depth"] == 3 and measure(nice)["width"] == 2
    again = make_nice(nice)
    assert is_nice(again) and measure(again)["depth"] == 3


@settings(max_examples=40)
@given(graphs(min_n=1, max_n=6))
def test_make_nice_keeps_measures(g):
    td = search_td(g)
    nice = make_nice(td)
    assert is_nice(nice) and verify(g, nice).ok
    a, b = measure(td), measure(nice)
    assert (a["width"], a["depth"]) == (b["width"], b["depth"])


def test_violation_reports():
    g = path(3)
    bad = PebbleForestCover({0: None, 1: 0, 2: 1}, {0: 1, 1: 2, 2: 2})
    rep = verify(g, bad)
    assert not rep.ok and "1-2" in rep.reason
    rep = verify(path(3), TreeDecomposition([None, 0], [{0, 1}, {2}]))
    assert not rep.ok and "1-2" in rep.reason
    rep = verify(path(3), TreeDecomposition([None, 0, 1], [{0, 1}, {2}, {1, 2}]))
    assert not rep.ok


def test_membership_examples():
    p7 = path(7)
    ok, w = decide_membership(p7, 2, 4)
    assert ok and verify(p7, w, 2, 4).ok
    assert not decide_membership(p7, 2, 3)[0]
    assert decide_membership(p7, 2, 4, method="game")[0]
    assert not decide_membership(p7, 2, 3, method="game")[0]
    for g in (clique(4), grid(2, 3), path(5)):
        assert decide_membership(g, g.n, g.n)[0]
    for q in (1, 2, 3, 5, None):
        assert not decide_membership(clique(3), 2, q)[0]
    with pytest.raises(CapabilityError):
        decide_membership(path(12), 2, 4)


def test_k1_and_empty():
    k1 = Graph(1)
    assert decide_membership(k1, 1, 1)[0]
    assert not decide_membership(k1, 1, 0)[0]
    assert decide_membership(Graph(0), 1, 0)[0]
    for target in ("td", "pfc", "ctree"):
        w = convert(k1, search_pfc(k1, 1, 1), target)
        assert verify(k1, w, 1, 1).ok


def test_enumerate_small_class():
    cls = enumerate_class(3, 2, 2)
    keys = {canonical_key(g) for g in cls}
    assert canonical_key(Graph(1)) in keys and canonical_key(clique(2)) in keys
    # P3 rooted at its middle vertex has height 2 with two pebbles
    assert canonical_key(path(3)) in keys
    assert canonical_key(clique(3)) not in keys
    for g in cls:
        assert decide_membership(g, 2, 2)[0]


def test_enumerate_monotone_and_td_classes():
    keys = lambda *a: {canonical_key(g) for g in enumerate_class(*a)}
    for k, q in itertools.product((1, 2, 3), (1, 2, 3)):
        base = keys(5, k, q)
        assert base <= keys(5, k + 1, q) & keys(5, k, q + 1)
        assert base <= keys(6, k, q)
    for q in (1, 2, 3):
        assert keys(5, q, q) == {canonical_key(g) for g in graphs_up_to(5) if treedepth(g) <= q}
    with pytest.raises(CapabilityError):
        enumerate_class(8, 2, 2)


def test_classes_inside_width_and_depth():
    for k, q in itertools.product((1, 2, 3), (1, 2, 3, 4)):
        for g in enumerate_class(6, k, q):
            assert treewidth(g) <= k - 1 and treedepth(g) <= q


def test_minor_closure():
    for k, q in ((2, 2), (2, 3), (3, 3)):
        for g in enumerate_class(6, k, q):
            minors = [delete_vertex(g, v) for v in range(g.n)]
            minors += [delete_edge(g, e) for e in g.edges] + [contract_edge(g, e) for e in g.edges]
            for h in minors:
                assert decide_membership(h, k, q)[0]


def test_conversions_never_increase_measures():
    for g in graphs_up_to(6):
        if not g.n or not is_connected(g):
            continue
        for k, q in ((2, 3), (3, 3), (3, 4)):
            ok, w = decide_membership(g, k, q)
            if not ok:
                continue
            for target in ("td", "ctree", "pfc"):
                out = convert(g, w, target)
                assert verify(g, out, k, q).ok
                back = convert(g, out, "pfc")
                assert verify(g, back, k, q).ok


def test_convert_rejects_invalid_source():
    with pytest.raises(ValidationError):
        convert(path(3), TreeDecomposition([None], [{0, 1}]), "pfc")


def test_witness_json_round_trip():
    g = grid(2, 3)
    _, w = decide_membership(g, 3, 4)
    for target in ("td", "pfc", "ctree"):
        x = convert(g, w, target)
        y = witness_from_json(x.to_json())
        assert verify(g, y, 3, 4).ok and measure(y) == measure(x)


def test_guarded_trees():
    lab = Graph(3, [(0, 1), (1, 2)], {1: 0})
    w = search_ctree(lab, 2, 2, guarded=True)
    assert w is not None and verify(lab, w, 2, 2, guarded=True).ok
    assert isinstance(ConstructionTree.from_json(w.to_json()), ConstructionTree)
    # a label with no labelled neighbour cannot go, so isolated K1 plus label fails
    assert search_ctree(Graph(2, [], {1: 0}), 2, 5, guarded=True) is None

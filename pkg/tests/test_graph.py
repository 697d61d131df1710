import json
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from homind.canon import canonical_key, graphs_up_to
from homind.errors import LabelRangeError, LoopError, ParseError, ValidationError
from homind.graph import (
    Graph, clique, codec, compose, connected_components, contract_edge, cycle, decode_text,
    delete_edge, delete_vertex, disjoint_union, encode_text, from_json, generate, glue, glue_product,
    grid, grid_cell, grid_vertex, induced_subgraph, is_connected, path, relabel, remove_label,
    set_label, to_json,
)

from strategies import graphs


def edge12(a=0, b=1):
    return Graph(2, [(0, 1)], {1: a, 2: b}, 2)


# ---- codecs

def test_decode_labelled_edge():
    g = decode_text("n=2; e=0-1; l=1:0,2:1")
    assert g.n == 2 and g.edges == {(0, 1)} and g.labels == {1: 0, 2: 1}


def test_loop_rejected():
    with pytest.raises(LoopError):
        decode_text("n=1; e=0-0")


@pytest.mark.parametrize("text,line,col", [
    ("n=2; e=0-x", 1, 10),
    ("n=2;\nq=1", 2, 1),
])
def test_parse_error_position(text, line, col):
    with pytest.raises(ParseError) as exc:
        decode_text(text)
    assert (exc.value.line, exc.value.column) == (line, col)


def test_label_out_of_range():
    with pytest.raises(ValidationError):
        decode_text("n=2; l=1:5")
    with pytest.raises(LabelRangeError):
        set_label(edge12(), 3, 0)


GOLDEN = ["n=0", "n=1", "n=2; e=0-1; l=1:0,2:1", "n=3; e=0-1,1-2; l=2:1", "n=4; e=0-1,0-2,0-3",
          "n=2; l=1:0; k=3"]


@pytest.mark.parametrize("text", GOLDEN)
def test_text_round_trip(text):
    assert encode_text(decode_text(text)) == text


@given(graphs(max_n=6, labels=3))
def test_codecs_round_trip(g):
    assert codec("decode", codec("encode", g)) == g
    assert from_json(to_json(g)) == g
    assert codec("decode", json.dumps(to_json(g))) == g


# ---- glue product

def test_glue_two_edges_makes_path():
    a = Graph(2, [(0, 1)], {1: 0, 2: 1}, 3)
    b = Graph(2, [(0, 1)], {2: 0, 3: 1}, 3)
    p = glue_product(a, b)
    assert p.n == 3 and p.m == 2
    assert p.has_edge(p.labels[1], p.labels[2]) and p.has_edge(p.labels[2], p.labels[3])


def test_glue_with_swapped_labels_stays_simple():
    p, loop = glue(edge12(0, 1), edge12(1, 0))
    assert p.n == 2 and p.m == 1 and not loop


def test_glue_idempotent_on_labelled_part():
    f = Graph(3, [(0, 1), (1, 2)], {1: 0, 2: 1}, 2)
    sub = Graph(2, [(0, 1)], {1: 0, 2: 1}, 2)
    assert glue_product(f, sub) == f


def test_glue_merging_adjacent_labels_drops_loop():
    a = Graph(2, [(0, 1)], {1: 0, 2: 1}, 2)
    b = Graph(1, [], {1: 0, 2: 0}, 2)
    p, loop = glue(a, b)
    assert p.n == 1 and p.m == 0 and loop


def small_labelled():
    out = []
    for g in graphs_up_to(3):
        for a in range(-1, g.n):
            for b in range(-1, g.n):
                lab = {}
                if a >= 0:
                    lab[1] = a
                if b >= 0:
                    lab[2] = b
                out.append(Graph(g.n, g.edges, lab, 2))
    return out


def test_glue_commutative_up_to_iso():
    gs = small_labelled()
    for a in gs[::3]:
        for b in gs[::2]:
            assert canonical_key(glue_product(a, b)) == canonical_key(glue_product(b, a))


@given(st.data())
def test_glue_associative_up_to_iso(data):
    gs = small_labelled()
    a, b, c = (data.draw(st.sampled_from(gs)) for _ in range(3))
    left = glue_product(glue_product(a, b), c)
    right = glue_product(a, glue_product(b, c))
    assert canonical_key(left) == canonical_key(right)


# ---- relabelling and minors

def test_remove_then_set():
    g = edge12()
    assert remove_label(g, 1).labels == {2: 1}
    assert set_label(remove_label(g, 1), 1, 0) == g
    assert relabel(relabel(g, "set", 1, 1), "set", 1, 0) == g


def test_contractions():
    p3 = path(3)
    assert canonical_key(contract_edge(p3, (0, 1))) == canonical_key(path(2))
    k3 = clique(3)
    for e in k3.edges:
        assert canonical_key(contract_edge(k3, e)) == canonical_key(clique(2))
    with pytest.raises(ValidationError):
        contract_edge(p3, (0, 2))


def test_contract_keeps_union_of_labels():
    g = Graph(3, [(0, 1), (1, 2)], {1: 0, 2: 1}, 2)
    c = contract_edge(g, (0, 1))
    assert c.labels[1] == c.labels[2]


def _spanning_tree(g):
    seen, tree, stack = {0}, [], [0]
    while stack:
        u = stack.pop()
        for v in g.neighbours(u):
            if v not in seen:
                seen.add(v)
                tree.append((u, v))
                stack.append(v)
    return tree


def test_contracting_spanning_tree_gives_k1():
    for g in graphs_up_to(6):
        if g.n == 0 or not is_connected(g):
            continue
        # contract tree edges one at a time, tracking the vertex renaming
        cur = g
        names = list(range(g.n))
        for u, v in _spanning_tree(g):
            a, b = names[u], names[v]
            if a == b:
                continue
            cur = contract_edge(cur, (a, b))
            lo, hi = min(a, b), max(a, b)
            names = [lo if x == hi else (x - 1 if x > hi else x) for x in names]
        assert cur.n == 1 and cur.m == 0


@given(graphs(min_n=1, max_n=6, labels=2))
def test_minor_operations_stay_simple(g):
    outs = [delete_vertex(g, 0)] + [contract_edge(g, e) for e in g.edges] + [delete_edge(g, e) for e in g.edges]
    for h in outs:
        assert all(u != v and 0 <= u < h.n and 0 <= v < h.n for u, v in h.edges)
        assert len(h.labels) <= len(g.labels)


def test_disjoint_union_and_components():
    two = compose(clique(3), clique(3))
    assert (two.n, two.m, len(connected_components(two))) == (6, 6, 2)
    assert [len(c) for c in connected_components(path(7))] == [7]
    g = grid(2, 5)
    col3 = [grid_vertex(2, 5, i, 3) for i in (1, 2)]
    sub, _ = induced_subgraph(g, [v for v in range(g.n) if v not in col3])
    assert sorted(len(c) for c in connected_components(sub)) == [4, 4]
    with pytest.raises(ValidationError):
        disjoint_union(edge12(), edge12())


# ---- generators

def test_grid_counts_closed_form():
    for h in range(1, 9):
        for l in range(1, 9):
            g = grid(h, l)
            assert g.n == h * l
            assert g.m == h * (l - 1) + l * (h - 1)


def test_grid_adjacency_rule():
    h, l = 3, 4
    g = grid(h, l)
    for a in range(g.n):
        for b in range(g.n):
            (i, j), (i2, j2) = grid_cell(l, a), grid_cell(l, b)
            rule = (abs(i - i2) == 1) != (abs(j - j2) == 1) and (i == i2 or j == j2)
            assert g.has_edge(a, b) == rule


def test_generator_examples():
    assert (grid(2, 5).n, grid(2, 5).m) == (10, 13)
    assert path(1).n == 1 and path(1).m == 0
    assert canonical_key(grid(1, 6)) == canonical_key(path(6))
    assert path(5).m == 4 and cycle(5).m == 5
    assert generate("clique", 4).m == 6
    for bad in (lambda: path(0), lambda: grid(0, 3), lambda: generate("wheel", 4)):
        with pytest.raises(ValidationError):
            bad()


def test_permuted_graph_equal_after_codec():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    for p in permutations(range(4)):
        h = Graph(4, [(p[u], p[v]) for u, v in g.edges])
        assert canonical_key(h) == canonical_key(g)

import random
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from homind.canon import canonical_form, canonical_key, graphs_on, is_isomorphic
from homind.errors import CapabilityError
from homind.graph import Graph, clique, cycle, disjoint_union, path

from strategies import graphs


def permuted(g, p):
    return Graph(g.n, [(p[u], p[v]) for u, v in g.edges], {l: p[v] for l, v in g.labels.items()}, g.arity)


def brute_iso(a, b):
    if a.n != b.n or a.m != b.m or a.labels.keys() != b.labels.keys():
        return False
    for p in permutations(range(a.n)):
        if all(b.has_edge(p[u], p[v]) for u, v in a.edges) and all(p[v] == b.labels[l] for l, v in a.labels.items()):
            return True
    return False


def test_counts_of_graphs_per_order():
    # OEIS A000088
    assert [len(graphs_on(n)) for n in range(8)] == [1, 1, 2, 4, 11, 34, 156, 1044]


def test_four_vertex_forms_distinct_and_complete():
    forms = {canonical_form(g) for g in graphs_on(4)}
    assert len(forms) == 11
    # every labelled graph on 4 vertices maps to one of them
    seen = set()
    for mask in range(1 << 6):
        pairs = [(u, v) for u in range(4) for v in range(u + 1, 4)]
        seen.add(canonical_form(Graph(4, [e for i, e in enumerate(pairs) if mask >> i & 1])))
    assert seen == forms


def test_examples():
    c4 = cycle(4)
    assert canonical_form(c4) == canonical_form(permuted(c4, [2, 0, 3, 1]))
    assert canonical_form(cycle(6)) != canonical_form(disjoint_union(clique(3), clique(3)))


def test_bound():
    with pytest.raises(CapabilityError):
        canonical_form(path(10))
    assert canonical_form(path(10), limit=10)


@given(graphs(max_n=6, labels=2), st.randoms(use_true_random=False))
def test_key_invariant_under_relabelling(g, rnd):
    p = list(range(g.n))
    rnd.shuffle(p)
    assert canonical_key(permuted(g, p)) == canonical_key(g)


@given(graphs(max_n=5, labels=1), graphs(max_n=5, labels=1))
def test_key_matches_brute_force_isomorphism(a, b):
    assert (canonical_key(a) == canonical_key(b)) == brute_iso(a, b)


def test_regular_graphs_separated():
    # same degree sequence, not isomorphic
    a = cycle(6)
    b = disjoint_union(clique(3), clique(3))
    assert not is_isomorphic(a, b)
    rng = random.Random(3)
    p = list(range(6))
    rng.shuffle(p)
    assert is_isomorphic(a, permuted(a, p))

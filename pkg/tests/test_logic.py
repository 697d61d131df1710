import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from homind.canon import graphs_up_to
from homind.decomp import decide_membership, search_ctree
from homind.errors import ValidationError
from homind.games import bijective_pebble_game
from homind.graph import Graph, clique, cycle, disjoint_union, path, set_label
from homind.hom import PreconditionError, hom_count, qg_eval
from homind.logic import (Bottom, CountExists, Edge, Eq, ExistsExactly, Not, Or, And, Top, distinguishing_formula,
                          distinguishing_graph, evaluate, fragment_check, from_json, is_guarded, parse_sexpr,
                          random_formula, synth_formula, synth_qg, to_json, to_sexpr)


def labelled(g, **labels):
    return Graph(g.n, g.edges, {int(k[1:]): v for k, v in labels.items()})


def all_labellings(n_max, labels):
    for g in graphs_up_to(n_max):
        if not g.n:
            continue
        for asg in itertools.product(range(g.n), repeat=len(labels)):
            yield Graph(g.n, g.edges, dict(zip(labels, asg)), max(labels, default=0))


# evaluation


def test_evaluate_examples():
    e = Edge(1, 2)
    assert evaluate(e, Graph(2, [(0, 1)], {1: 0, 2: 1})).value
    assert not evaluate(e, Graph(2, [], {1: 0, 2: 1})).value
    three = CountExists(3, 1, Eq(1, 1))
    assert not evaluate(three, clique(2)) and evaluate(three, clique(3))
    deg2 = ExistsExactly(2, 1, Edge(1, 2))
    assert evaluate(deg2, Graph(3, [(0, 1), (1, 2)], {2: 1})).value
    assert not evaluate(deg2, Graph(3, [(0, 1), (1, 2)], {2: 0})).value
    v = evaluate(Edge(1, 2), Graph(2, [(0, 1)], {1: 1, 2: 0}))
    assert v.interpretation == {1: 1, 2: 0}


def test_unassigned_free_variable():
    with pytest.raises(PreconditionError):
        evaluate(Edge(1, 2), Graph(2, [(0, 1)], {1: 0}))


def test_counting_is_exact_against_brute_force():
    rng = random.Random(7)
    for _ in range(150):
        f = random_formula(rng, 2, 2, free=())
        for g in graphs_up_to(4):
            if not g.n:
                continue
            assert evaluate(f, g).value == _brute(f, g, {})


def _brute(f, g, env):
    op, a = f.op, f.args
    if op == "top":
        return True
    if op == "bottom":
        return False
    if op == "eq":
        return env[a[0]] == env[a[1]]
    if op == "edge":
        return g.has_edge(env[a[0]], env[a[1]])
    if op == "not":
        return not _brute(a[0], g, env)
    if op == "or":
        return any(_brute(x, g, env) for x in a)
    if op == "and":
        return all(_brute(x, g, env) for x in a)
    t, x, body = a
    return sum(_brute(body, g, {**env, x: v}) for v in range(g.n)) >= t


# syntax


def test_fragment_examples():
    info = fragment_check(Edge(1, 2))
    assert info.qr == 0
    info = fragment_check(CountExists(2, 1, Edge(1, 2)))
    assert info.qr == 1 and info.variables == (1, 2) and info.free == (2,)
    assert info.in_ckq(2, 1) and not info.in_ckq(1, 1) and not info.in_ckq(2, 0)
    assert is_guarded(CountExists(1, 2, And(Edge(1, 2), Eq(2, 2))))
    assert not is_guarded(CountExists(1, 2, Eq(2, 2)))
    assert fragment_check(Or(Edge(1, 2), CountExists(1, 3, Eq(3, 3)))).qr == 1


def test_connective_normalisation():
    assert Not(Not(Edge(1, 2))) is Edge(1, 2)
    assert And(Top, Edge(1, 2)) is Edge(1, 2)
    assert And() is Top and Or() is Bottom
    assert ExistsExactly(0, 1, Eq(1, 1)) is Not(CountExists(1, 1, Eq(1, 1)))


def test_sexpr_examples():
    f = parse_sexpr("(geq 2 x1 (and (E x1 x2) (not (eq x1 x2))))")
    assert f is CountExists(2, 1, And(Edge(1, 2), Not(Eq(1, 2))))
    assert parse_sexpr("(exactly 2 x1 (E x1 x2))") is ExistsExactly(2, 1, Edge(1, 2))
    assert parse_sexpr("true") is Top


@pytest.mark.parametrize("text", ["(E x1)", "(geq x1 x1 true)", "(foo x1 x2)", "(not true true)", "(E x1 x2",
                                  "(E x0 x1)", "true false", "(geq 0 x1 true)"])
def test_sexpr_errors(text):
    with pytest.raises(ValidationError):
        parse_sexpr(text)


def test_json_errors():
    with pytest.raises(ValidationError):
        from_json({"op": "geq", "t": 1})
    with pytest.raises(ValidationError):
        from_json({"op": "xor"})


@given(st.randoms(use_true_random=False), st.integers(1, 3), st.integers(0, 3))
def test_text_and_json_round_trip(rnd, k, q):
    f = random_formula(rnd, k, q, size=6)
    assert parse_sexpr(to_sexpr(f)) is f
    assert from_json(to_json(f)) is f
    assert fragment_check(f).in_ckq(k, q)


# formulas from construction trees


def test_synth_formula_edge():
    f = Graph(2, [(0, 1)], {1: 0, 2: 1})
    w = search_ctree(f)
    assert synth_formula(f, w, 1) is Edge(1, 2)
    assert synth_formula(f, w, 0) is Not(Edge(1, 2))
    assert synth_formula(f, w, 2) is Bottom


def test_synth_formula_degree():
    f = Graph(2, [(0, 1)], {1: 0}, 2)
    w = search_ctree(f, 2, 1)
    phi = synth_formula(f, w, 2)
    assert phi.qr == 1 == w.elimination_depth()
    for v in range(3):
        assert evaluate(phi, set_label(clique(3), 1, v)).value


PATTERNS = [
    Graph(1), clique(2), path(3), clique(3), Graph(2),
    Graph(1, (), {1: 0}), Graph(2, [(0, 1)], {1: 0}, 2), Graph(3, [(0, 1), (1, 2)], {1: 0}, 2),
    Graph(3, [(0, 1), (1, 2)], {1: 1}, 2), Graph(3, [(0, 1), (1, 2), (0, 2)], {1: 0, 2: 1}),
]


@pytest.mark.parametrize("f", PATTERNS, ids=str)
def test_synth_formula_is_exact_on_small_graphs(f):
    k = max(1, f.arity)
    while (w := search_ctree(f.with_arity(k), k)) is None:
        k += 1
    labs = sorted(f.labels)
    targets = list(all_labellings(4, labs))
    counts = {g: hom_count(f, g) for g in targets}
    for m in sorted(set(counts.values()) | {0, 1, 2, 5}):
        phi = synth_formula(f.with_arity(k), w, m)
        info = fragment_check(phi)
        assert info.in_ckq(k, w.elimination_depth())
        assert set(info.free) <= set(labs)
        for g, c in counts.items():
            assert evaluate(phi, g).value == (c == m), (m, g)


def test_synth_formula_guarded():
    f = Graph(3, [(0, 1), (1, 2)], {1: 0}, 2)
    w = search_ctree(f, 2, 2, guarded=True)
    assert w is not None
    for m in range(4):
        phi = synth_formula(f, w, m, guarded=True)
        assert is_guarded(phi) and fragment_check(phi).in_gckq(2, 2)
        for g in all_labellings(4, [1]):
            assert evaluate(phi, g).value == (hom_count(f, g) == m)


def test_synth_formula_rejects_foreign_tree():
    with pytest.raises(ValidationError):
        synth_formula(clique(3), search_ctree(path(3)), 1)


# quantum graphs from formulas


def test_synth_qg_atoms():
    a = synth_qg(Eq(1, 1), 3)
    assert [(c, g.n, g.labels) for c, g in a.terms] == [(1, 1, {1: 0})]
    for g in all_labellings(3, [1]):
        assert qg_eval(a, g) == 1
    e = synth_qg(Edge(1, 2), 3)
    for g in all_labellings(3, [1, 2]):
        if g.n == 3:
            assert qg_eval(e, g) == g.has_edge(g.labels[1], g.labels[2])
    assert len(synth_qg(Edge(1, 1), 3)) == 0


@settings(max_examples=12)
@given(st.randoms(use_true_random=False), st.sampled_from([2, 3, 4]))
def test_synth_qg_models_formula(rnd, n):
    f = random_formula(rnd, 2, 2, size=4, free=())
    a = synth_qg(f, n, k=2, q=2)
    for g in graphs_up_to(n):
        if g.n == n:
            val = qg_eval(a, g)
            assert val in (0, 1) and val == evaluate(f, g).value
    for _, term in a.terms:
        assert search_ctree(term, 2, 2) is not None


def test_synth_qg_with_free_variable():
    f = CountExists(2, 2, Edge(1, 2))
    a = synth_qg(f, 3)
    for g in all_labellings(3, [1]):
        if g.n == 3:
            assert qg_eval(a, g) == evaluate(f, g).value


def test_synth_qg_guarded_terms():
    f = CountExists(1, 2, And(Edge(1, 2), CountExists(2, 1, Edge(2, 1))))
    a = synth_qg(f, 3, guarded=True)
    for g in all_labellings(3, [1]):
        if g.n == 3:
            assert qg_eval(a, g) == evaluate(f, g).value
    for _, term in a.terms:
        assert search_ctree(term, 2, 2, guarded=True) is not None


def test_synth_qg_rejects_wrong_fragment():
    with pytest.raises(ValidationError):
        synth_qg(CountExists(1, 3, Eq(3, 3)), 3, k=2, q=1)


# distinguishing


def test_distinguishing_c6_two_triangles():
    c6, tt = cycle(6), disjoint_union(clique(3), clique(3))
    d = distinguishing_graph(c6, tt, 3, 3)
    assert d.status == "distinguished"
    a, b = hom_count(d.graph, c6), hom_count(d.graph, tt)
    assert (a, b) == d.counts and a != b
    assert decide_membership(d.graph, 3, 3)[0]
    assert hom_count(clique(3), d.graph) > 0


def test_distinguishing_equal_and_equivalent():
    assert distinguishing_graph(path(4), path(4), 2, 2).status == "equivalent"
    c6, tt = cycle(6), disjoint_union(clique(3), clique(3))
    assert distinguishing_graph(c6, tt, 2, 2).status == "equivalent"
    assert distinguishing_formula(c6, tt, 2, 3) is None


def test_distinguishing_sizes():
    d = distinguishing_graph(path(3), path(4), 2, 2)
    assert d.status == "distinguished" and d.graph.n == 1


def test_type_refinement_agrees_with_game():
    gs = [g for g in graphs_up_to(4) if g.n == 4]
    for g, h in itertools.combinations(gs, 2):
        for k, q in ((1, 2), (2, 1), (2, 2), (3, 2)):
            phi = distinguishing_formula(g, h, k, q)
            dup = bijective_pebble_game(g, h, k, q) == "duplicator"
            assert (phi is None) == dup
            if phi is not None:
                assert fragment_check(phi).in_ckq(k, q)
                assert evaluate(phi, g).value != evaluate(phi, h).value


def test_equivalent_pair_has_equal_class_counts():
    from homind.decomp import enumerate_class

    c6, tt = cycle(6), disjoint_union(clique(3), clique(3))
    assert bijective_pebble_game(c6, tt, 2, 2) == "duplicator"
    for f in enumerate_class(6, 2, 2):
        assert hom_count(f, c6) == hom_count(f, tt)

import itertools
import math

import pytest

from homind.canon import graphs_up_to
from homind.cfi import cfi_pair
from homind.decomp import measure, verify
from homind.errors import CapabilityError, ValidationError
from homind.games import (COPS, ROBBER, Strategy, bijective_pebble_game, ckq_equivalent, cq_equivalent,
                          equivalence_suite, gc_equivalent_bounded, scripted_strategy, simulate, solve_cr,
                          strategy_to_td)
from homind.graph import (Graph, clique, components_of_mask, cycle, delete_edge, disjoint_union, grid,
                          grid_vertex, is_connected, path)
from homind.logic import _Model, battery, evaluate

SMALL = [g for g in graphs_up_to(6) if g.n]


def test_path_law_p5():
    for q in range(1, 6):
        assert (solve_cr(path(5), 2, q).winner == ROBBER) == (q <= 2)


def test_path_law_up_to_nine():
    for l in range(2, 10):
        for q in range(1, l + 1):
            assert (solve_cr(path(l), 2, q).winner == ROBBER) == (q <= math.ceil((l - 1) / 2))


def test_trivial_games():
    res = solve_cr(Graph(1), 1, 1)
    assert res.winner == COPS and res.rounds == 1
    assert solve_cr(Graph(1), 1, 0).winner == ROBBER
    with pytest.raises(CapabilityError):
        solve_cr(path(41), 2, 3)
    with pytest.raises(ValidationError):
        solve_cr(path(3), 2, -1)


def test_grid_2x5_robber_wins_non_monotone():
    for q in (1, 2):
        assert solve_cr(grid(2, 5), 3, q, monotone=False).winner == ROBBER


def test_monotone_win_implies_non_monotone_win():
    for g in SMALL:
        for k, q in itertools.product(range(1, 5), repeat=2):
            if solve_cr(g, k, q).winner == COPS:
                assert solve_cr(g, k, q, monotone=False).winner == COPS


def test_robber_antitone():
    for g in SMALL[::3]:
        for mono in (True, False):
            table = {(k, q): solve_cr(g, k, q, mono).winner == ROBBER for k in range(1, 5) for q in range(1, 6)}
            for (k, q), robber in table.items():
                if not robber:
                    assert not table.get((k + 1, q), False) and not table.get((k, q + 1), False)


def test_strategy_to_td_examples():
    res = solve_cr(path(7), 2, 4)
    td = strategy_to_td(path(7), res.strategy)
    assert verify(path(7), td, 2, 4).ok
    assert measure(td)["width"] == 1 and measure(td)["depth"] <= 4
    k2 = clique(2)
    td = strategy_to_td(k2, solve_cr(k2, 2, 2).strategy)
    assert (measure(td)["width"], measure(td)["depth"]) == (1, 2)


def test_strategy_to_td_on_small_members():
    for g in SMALL:
        if not is_connected(g):
            continue
        for k, q in itertools.product(range(1, 5), repeat=2):
            res = solve_cr(g, k, q)
            if res.winner == COPS:
                assert verify(g, strategy_to_td(g, res.strategy, k, q), k, q).ok


def test_strategy_to_td_rejects_robber_and_non_monotone():
    with pytest.raises(ValidationError):
        strategy_to_td(path(5), solve_cr(path(5), 2, 2).strategy)
    with pytest.raises(ValidationError):
        strategy_to_td(path(5), solve_cr(path(5), 2, 3, monotone=False).strategy)


def test_scripted_path_walk():
    st = scripted_strategy("cop_binary_split", 5)
    out = simulate(path(5), 2, 3, cops=st, robber="adversarial")
    assert out.winner == COPS and out.rounds <= 3


def test_optimal_play_on_p5():
    out = simulate(path(5), 2, 3)
    assert out.winner == COPS
    assert simulate(path(5), 2, 2).winner == ROBBER


def test_largest_component_survives_on_grid():
    rob = scripted_strategy("robber_largest_component", 2, 6)
    out = simulate(grid(2, 6), 3, 3, cops="optimal", robber=rob, monotone=False)
    assert out.winner == ROBBER


def test_diagonal_sweep_on_grid():
    sweep = scripted_strategy("cop_diagonal_sweep", 4, 8)
    out = simulate(grid(4, 8), 5, 13, cops=sweep, robber="adversarial")
    assert out.winner == COPS and out.rounds <= 13


def test_scripted_argument_errors():
    with pytest.raises(ValidationError):
        scripted_strategy("robber_largest_component", 3)
    with pytest.raises(ValidationError):
        scripted_strategy("teleport", 3)
    with pytest.raises(ValidationError):
        simulate(path(4), 2, 3, cops=scripted_strategy("cop_binary_split", 5))


class _Lifter:
    """Places a cop on 1, then moves it to 2, which frees vertex 1 for the robber."""

    def cop(self, s, c, r):
        if s == 0:
            return 1 << 1
        if s == 1 << 1:
            return 1 << 2
        low = c & -c
        return s | low if s.bit_count() < 2 else (s & ~(s & -s)) | low


def test_illegal_monotone_move_rejected():
    bad = Strategy(COPS, "lifter", _Lifter)
    with pytest.raises(ValidationError, match="monoton"):
        simulate(path(3), 2, 3, cops=bad, robber="adversarial")
    # the same move is fine in the non-monotone game
    out = simulate(path(3), 2, 5, cops=bad, robber="adversarial", monotone=False)
    assert out.transcript[1]["cops"] == [2]


def test_transcript_is_replayable():
    out = simulate(path(5), 2, 3)
    prev = set()
    for row in out.transcript:
        cops = set(row["cops"])
        assert len(cops - prev) <= 1
        prev = cops


# grid structure


def _grid_components(h, l, x):
    g = grid(h, l)
    free = ((1 << g.n) - 1) & ~sum(1 << v for v in x)
    return components_of_mask(g.adj, free)


def _good(h, l, comp):
    return any(all(comp >> grid_vertex(h, l, i, j) & 1 for i in range(1, h + 1)) for j in range(1, l + 1))


@pytest.mark.parametrize("h,l", [(2, 4), (2, 5), (2, 6), (3, 5), (3, 6)])
def test_grid_separators(h, l):
    n = h * l
    small = (h - 1) * (h + 2) / 2
    for size in range(h + 2):
        for x in itertools.combinations(range(n), size):
            comps = _grid_components(h, l, x)
            good = [c for c in comps if _good(h, l, c)]
            if h < l - 1:
                assert good
            if len(good) == 2:
                rest = [c for c in comps if c not in good]
                assert len(rest) <= 1 and all(c.bit_count() == 1 for c in rest)
            assert len(good) <= 2
            if h < l - 2:
                assert all(_good(h, l, c) for c in comps if c.bit_count() > small)


# bijective pebble game


def test_identical_graphs():
    for g in (cycle(5), grid(2, 3), path(4)):
        for k, q in itertools.product((1, 2, 3), (1, 2, 3)):
            assert bijective_pebble_game(g, g, k, q) == "duplicator"
        assert cq_equivalent(g, g, 2)


def test_c6_and_two_triangles():
    c6, tt = cycle(6), disjoint_union(clique(3), clique(3))
    for q in range(1, 5):
        assert bijective_pebble_game(c6, tt, 2, q) == "duplicator"
    assert bijective_pebble_game(c6, tt, 3, 3) == "spoiler"


def test_size_mismatch_and_bad_pebbles():
    assert bijective_pebble_game(path(3), path(4), 2, 1) == "spoiler"
    with pytest.raises(ValidationError):
        bijective_pebble_game(path(3), path(3), 2, 1, {3: (0, 0)})


def test_cfi_pair_of_p7():
    g0, g1 = cfi_pair(path(7))
    assert ckq_equivalent(g0, g1, 2, 3)


def _profiles(gs, k, q, n):
    fs = battery(k, q, n)
    out = {}
    for g in gs:
        m = _Model(g.adj, g.n)
        out[g] = tuple(evaluate(f, g, m).value for f in fs)
    return out


@pytest.mark.parametrize("k,q", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_game_matches_sentence_battery(k, q):
    gs = [g for g in graphs_up_to(4) if g.n]
    prof = _profiles(gs, k, q, 4)
    for g, h in itertools.combinations(gs, 2):
        assert (bijective_pebble_game(g, h, k, q) == "duplicator") == (prof[g] == prof[h])


def test_game_matches_sentence_battery_on_five_vertices():
    gs = [g for g in graphs_up_to(5) if g.n == 5]
    prof = _profiles(gs, 2, 2, 5)
    equivalent = 0
    for g, h in itertools.combinations(gs, 2):
        dup = bijective_pebble_game(g, h, 2, 2) == "duplicator"
        equivalent += dup
        assert dup == (prof[g] == prof[h])
    assert equivalent > 0


# guarded equivalence


def test_guarded_triangle_vs_path():
    k3 = clique(3)
    v = gc_equivalent_bounded(k3, delete_edge(k3, (0, 1)), 2, 1, max_f=2)
    assert v.distinguished and v.witness is not None
    assert not gc_equivalent_bounded(k3, k3, 2, 2, max_f=4).distinguished


def test_equivalence_suite():
    d = equivalence_suite(cycle(6), disjoint_union(clique(3), clique(3)), 2, 2, max_f=4)
    assert d["ckq_equivalent"] and d["cq_equivalent"]
    assert not d["gc_equivalent_bounded"]["distinguished"]

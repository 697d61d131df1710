"""Desk-scale acceptance checks, shared by the test suite and ``homind accept``."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Callable

from .graph import Graph, grid, is_connected, path


@dataclass
class Criterion:
    number: int
    name: str
    budget: float  # seconds
    passed: bool = False
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number:2d} {self.name}: {self.seconds:.1f}s (budget {self.budget:.0f}s) {self.detail}"


def brute_hom(f: Graph, g: Graph) -> int:
    """Homomorphisms by trying every map; labels must be respected."""
    total = 0
    for m in itertools.product(range(g.n), repeat=f.n):
        if any(l not in g.labels or m[v] != g.labels[l] for l, v in f.labels.items()):
            continue
        if all(g.has_edge(m[a], m[b]) for a, b in f.edges):
            total += 1
    return total


def _connected_up_to(n: int) -> list[Graph]:
    from .canon import graphs_up_to

    return [g for g in graphs_up_to(n) if g.n > 0 and is_connected(g)]


# ---------------------------------------------------------------- 1


def hom_oracle() -> tuple[bool, dict]:
    from .canon import graphs_up_to
    from .hom import hom_count

    fs = graphs_up_to(4)
    gs = graphs_up_to(5)
    pairs = bad = 0
    for f in fs:
        fl = [f] + [Graph(f.n, f.edges, {1: v}, 1) for v in range(f.n)]
        for g in gs:
            gl = [g] + [Graph(g.n, g.edges, {1: v}, 1) for v in range(g.n)]
            for a in fl:
                for b in gl[1:] if a.labels else [g]:
                    pairs += 1
                    bad += hom_count(a, b) != brute_hom(a, b)
    return bad == 0, {"pairs": pairs, "mismatches": bad}


# ---------------------------------------------------------------- 2


def three_witnesses() -> tuple[bool, dict]:
    from .decomp import convert, decide_membership, verify

    graphs = _connected_up_to(6)
    cases = disagreements = failed_trips = 0
    for g in graphs:
        for k in range(1, 5):
            for q in range(1, 5):
                cases += 1
                verdicts = []
                wits = []
                for s in ("ctree", "td", "pfc"):
                    ok, w = decide_membership(g, k, q, search=s)
                    verdicts.append(ok)
                    if ok:
                        wits.append(w)
                ok, w = decide_membership(g, k, q, method="game")
                verdicts.append(ok)
                if ok:
                    wits.append(w)
                if len(set(verdicts)) != 1:
                    disagreements += 1
                for w in wits:
                    if not verify(g, w, k, q).ok:
                        failed_trips += 1
                    for target in ("td", "pfc", "ctree"):
                        if not verify(g, convert(g, w, target), k, q).ok:
                            failed_trips += 1
    return disagreements == 0 and failed_trips == 0, {
        "graphs": len(graphs), "cases": cases, "disagreements": disagreements, "failed_round_trips": failed_trips}


# ---------------------------------------------------------------- 3


def path_law() -> tuple[bool, dict]:
    from .games import ROBBER, solve_cr

    wrong = []
    for l in range(2, 10):
        threshold = l // 2  # ceil((l - 1) / 2)
        for q in range(0, l + 2):
            for mono in (True, False):
                robber = solve_cr(path(l), 2, q, monotone=mono).winner == ROBBER
                if robber != (q <= threshold):
                    wrong.append((l, q, mono))
    return not wrong, {"violations": wrong}


# ---------------------------------------------------------------- 4


def grid_lower_bound() -> tuple[bool, dict]:
    from .games import ROBBER, scripted_strategy, simulate, solve_cr

    rows = []
    ok = True
    for h, l in ((2, 5), (2, 6), (2, 7), (3, 6)):
        g = grid(h, l)
        top = h * (l - h + 2) // 4
        for q in range(0, top + 1):
            solver = solve_cr(g, h + 1, q, monotone=False).winner == ROBBER
            robber = scripted_strategy("robber_largest_component", h, l)
            played = simulate(g, h + 1, q, cops="optimal", robber=robber, monotone=False).winner == ROBBER
            ok &= solver and played
        rows.append((h, l, top))
    return ok, {"grids (h, l, max q)": rows}


# ---------------------------------------------------------------- 5


def grid_upper_bound() -> tuple[bool, dict]:
    from .games import COPS, scripted_strategy, simulate

    st = scripted_strategy("cop_diagonal_sweep", 4, 8)
    out = simulate(grid(4, 8), 5, 13, cops=st, robber="adversarial")
    return out.winner == COPS and out.rounds <= 13, {"winner": out.winner, "capture_round": out.rounds}


# ---------------------------------------------------------------- 6


def syntactic_separation() -> tuple[bool, dict]:
    from .decomp import decide_membership
    from .games import COPS, ROBBER, solve_cr

    p7 = path(7)
    tw1 = decide_membership(p7, 2, None)[0]
    td3 = decide_membership(p7, None, 3)[0]
    lose3 = solve_cr(p7, 2, 3, monotone=True).winner == ROBBER
    win4 = solve_cr(p7, 2, 4, monotone=True).winner == COPS
    d = {"in TW1": tw1, "in TD3": td3, "robber wins (2,3)": lose3, "cops win (2,4)": win4}
    return all(d.values()), d


# ---------------------------------------------------------------- 7


def logic_round_trip() -> tuple[bool, dict]:
    from .canon import graphs_on
    from .decomp import decide_membership, enumerate_class
    from .games import bijective_pebble_game
    from .hom import hom_count
    from .logic import distinguishing_graph, evaluate, fragment_check, synth_formula

    k = q = 2
    fam = enumerate_class(6, k, q)
    gs = graphs_on(4)
    prof = {g: tuple(hom_count(f, g) for f in fam) for g in gs}
    pairs = mismatched = certified = 0
    problems = []
    for g, h in itertools.combinations(gs, 2):
        pairs += 1
        dup = bijective_pebble_game(g, h, k, q) == "duplicator"
        agree = prof[g] == prof[h]
        if dup != agree:
            mismatched += 1
            continue
        if agree:
            continue
        # graph to sentence
        f = next(f for f in fam if hom_count(f, g) != hom_count(f, h))
        _, w = decide_membership(f, k, q, search="ctree")
        m = hom_count(f, g)
        phi = synth_formula(f, w, m, max_size=4)
        ok1 = (evaluate(phi, g).value and not evaluate(phi, h).value
               and fragment_check(phi).in_ckq(k, q))
        # sentence to graph
        d = distinguishing_graph(g, h, k, q)
        ok2 = (d.status == "distinguished" and hom_count(d.graph, g) != hom_count(d.graph, h)
               and decide_membership(d.graph, k, q)[0])
        if ok1 and ok2:
            certified += 1
        else:
            problems.append((repr(g), repr(h), ok1, ok2))
    distinct = sum(1 for a, b in itertools.combinations(gs, 2) if prof[a] != prof[b])
    ok = mismatched == 0 and certified == distinct and not problems
    return ok, {"pairs": pairs, "class size": len(fam), "verdict mismatches": mismatched,
                "distinguished": distinct, "certified both ways": certified, "problems": problems}


# ---------------------------------------------------------------- 8


def qg_soundness(seed: int = 2024, count: int = 50) -> tuple[bool, dict]:
    from .canon import graphs_on
    from .decomp import search_ctree
    from .hom import qg_eval
    from .logic import evaluate, fragment_check, random_formula, synth_qg

    rng = random.Random(seed)
    formulas = []
    while len(formulas) < count:
        f = random_formula(rng, 2, 2, size=12)
        if f.qr >= 1 and f not in formulas and fragment_check(f).in_ckq(2, 2):
            formulas.append(f)
    wrong = outside = evals = 0
    member: dict = {}
    for f in formulas:
        for n in (2, 3, 4):
            qg = synth_qg(f, n, k=2, q=2)
            for _, t in qg.terms:
                if t not in member:
                    member[t] = search_ctree(t, 2, 2) is not None
                outside += not member[t]
            for g in graphs_on(n):
                for asg in itertools.product(range(n), repeat=len(f.free)):
                    lg = Graph(n, g.edges, dict(zip(f.free, asg)), 2)
                    evals += 1
                    wrong += qg_eval(qg, lg) != int(evaluate(f, lg).value)
    return wrong == 0 and outside == 0, {"formulas": len(formulas), "evaluations": evals, "wrong": wrong,
                                         "distinct terms": len(member), "terms outside class": outside}


# ---------------------------------------------------------------- 9


def one_labelled_up_to(n: int) -> list[Graph]:
    from .canon import canonical_key, graphs_up_to

    out, seen = [], set()
    for g in graphs_up_to(n):
        for v in range(g.n):
            lg = Graph(g.n, g.edges, {1: v}, 2)
            key = canonical_key(lg)
            if key not in seen:
                seen.add(key)
                out.append(lg)
    return out


def guarded_correspondence() -> tuple[bool, dict]:
    from .games import gc_equivalent_bounded
    from .logic import _Model, battery, fragment_check

    k = q = 2
    bat = battery(k, q, 4, free=(1,), guarded=True)
    in_fragment = all(fragment_check(f).in_gckq(k, q) for f in bat)
    gs = one_labelled_up_to(4)
    prof = {}
    for g in gs:
        m = _Model(g.adj, g.n)
        env = {1: g.labels[1]}
        prof[g] = tuple(m.ev(f, env) for f in bat)
    pairs = mismatched = equivalent = 0
    for a, b in itertools.combinations(gs, 2):
        pairs += 1
        hom_agree = not gc_equivalent_bounded(a, b, k, q, 5).distinguished
        logic_agree = prof[a] == prof[b]
        mismatched += hom_agree != logic_agree
        equivalent += hom_agree
    return mismatched == 0 and in_fragment, {"graphs": len(gs), "pairs": pairs, "battery": len(bat),
                                            "equivalent pairs": equivalent, "mismatches": mismatched}


# ---------------------------------------------------------------- 10


def cfi_parity(max_base: int = 6, max_f: int = 5, key_base: int = 4) -> tuple[bool, dict]:
    """Isomorphism is certified by explicit twist maps (even U) and by hom(base, .) (odd U).

    Canonical keys give a second route on bases with at most ``key_base`` vertices.
    """
    from .canon import canonical_key, graphs_up_to
    from .cfi import base_path, cfi_build, is_isomorphism, twist_iso
    from .hom import hom_count

    fs = graphs_up_to(max_f)
    bases = _connected_up_to(max_base)
    iso_bad = hom_bad = key_bad = dom_bad = graphs = 0
    for b in bases:
        even = cfi_build(b).graph
        odd = cfi_build(b, {0}).graph
        h0 = hom_count(b, even)
        key0 = canonical_key(even) if b.n <= key_base else None
        for r in range(0, 3):
            for U in itertools.combinations(range(b.n), r):
                gu = cfi_build(b, U).graph
                graphs += 1
                hu = hom_count(b, gu)
                hom_bad += (hu == h0) != (r % 2 == 0)
                if r == 1:
                    # G_{0} -> G_{u}; G_{0} differs from G_empty in hom(base, .)
                    m = twist_iso(b, 0, U[0], base_path(b, 0, U[0]), {0})
                    iso_bad += not is_isomorphism(odd, gu, m) or hu == h0
                elif r == 2:
                    m = twist_iso(b, U[0], U[1], base_path(b, U[0], U[1]), ())
                    iso_bad += not is_isomorphism(even, gu, m)
                if key0 is not None:
                    key_bad += (canonical_key(gu) == key0) != (r % 2 == 0)
        for f in fs:
            dom_bad += hom_count(f, even) < hom_count(f, odd)
    ok = iso_bad == hom_bad == key_bad == dom_bad == 0
    return ok, {"bases": len(bases), "cfi graphs": graphs, "iso violations": iso_bad,
                "hom violations": hom_bad, "key violations": key_bad, "dominance violations": dom_bad}


# ---------------------------------------------------------------- 11


def semantic_separation() -> tuple[bool, dict]:
    from .cfi import cfi_pair
    from .decomp import decide_membership
    from .games import bijective_pebble_game
    from .hom import hom_count

    p7 = path(7)
    g0, g1 = cfi_pair(p7)
    dup = bijective_pebble_game(g0, g1, 2, 3) == "duplicator"
    a, b = hom_count(p7, g0), hom_count(p7, g1)
    tw1 = decide_membership(p7, 2, None)[0]
    td3 = decide_membership(p7, None, 3)[0]
    d = {"duplicator (2,3)": dup, "hom": (a, b), "in TW1": tw1, "in TD3": td3}
    return dup and a != b and tw1 and td3, d


# ---------------------------------------------------------------- 12


def td_closure() -> tuple[bool, dict]:
    from .cfi import witness_pair
    from .games import cq_equivalent
    from .hom import hom_count

    p4 = path(4)
    g, h = witness_pair(p4, 2)
    a, b = hom_count(p4, g), hom_count(p4, h)
    eq = cq_equivalent(g, h, 2)
    return a > b and eq, {"hom": (a, b), "C2 equivalent": eq, "sizes": (g.n, h.n)}


CRITERIA: list[tuple[int, str, float, Callable[[], tuple[bool, dict]]]] = [
    (1, "hom oracle equivalence", 60, hom_oracle),
    (2, "three-witness agreement", 600, three_witnesses),
    (3, "path game law", 30, path_law),
    (4, "grid lower bound", 600, grid_lower_bound),
    (5, "grid upper bound", 300, grid_upper_bound),
    (6, "syntactic separation", 10, syntactic_separation),
    (7, "logic round trip", 900, logic_round_trip),
    (8, "quantum graph soundness", 600, qg_soundness),
    (9, "guarded correspondence", 900, guarded_correspondence),
    (10, "CFI parity and dominance", 600, cfi_parity),
    (11, "semantic separation", 120, semantic_separation),
    (12, "TD closure instance", 120, td_closure),
]


def run(number: int) -> Criterion:
    for num, name, budget, fn in CRITERIA:
        if num == number:
            c = Criterion(num, name, budget)
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # reported as a failure line, not a crash
                ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
            c.seconds = time.perf_counter() - t0
            c.passed = ok and c.seconds <= budget
            c.detail = detail
            return c
    raise KeyError(number)


def run_all(numbers=None, threads: int = 1) -> list[Criterion]:
    nums = [c[0] for c in CRITERIA] if numbers is None else list(numbers)
    if threads <= 1:
        return [run(n) for n in nums]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(run, nums))

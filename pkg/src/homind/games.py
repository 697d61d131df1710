"""Round-bounded cops-and-robber games and the bijective pebble game.

Cops live on ``G`` plus a separate clique ``K`` of ``k`` vertices; a cop
position is stored as the bitmask of cops standing on ``G`` (the others sit
on ``K``).  The robber is tracked by his component.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .errors import ValidationError, check_bound
from .graph import Graph, bits, components_of_mask, grid, grid_cell, grid_vertex, path, set_label

sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))

COPS = "cops"
ROBBER = "robber"


def _nbr(adj: Sequence[int], mask: int) -> int:
    out = 0
    for v in bits(mask):
        out |= adj[v]
    return out & ~mask


def _component_containing(adj: Sequence[int], allowed: int, seed: int) -> int:
    comp = seed & allowed
    frontier = comp
    while frontier:
        grow = _nbr(adj, frontier) & allowed & ~comp
        comp |= grow
        frontier = grow
    return comp


def _largest(comps: Sequence[int]) -> int:
    return min(comps, key=lambda c: (-c.bit_count(), (c & -c).bit_length()))


class _Arena:
    """Move generation and legality shared by the solver and the simulator."""

    def __init__(self, g: Graph, k: int, monotone: bool):
        if k < 1:
            raise ValidationError("at least one cop is needed")
        self.g = g
        self.adj = g.adj
        self.n = g.n
        self.full = (1 << g.n) - 1
        self.k = k
        self.monotone = monotone

    def region(self, s: int, s2: int, c: int) -> int:
        """Vertices the robber can reach while the cops that stay put block him."""
        return _component_containing(self.adj, self.full & ~(s & s2), c)

    def moves(self, s: int, c: int) -> list[int]:
        """Cop positions reachable in one round, placements near the robber first."""
        out: list[int] = []
        seen = set()
        near = c | _nbr(self.adj, c)
        lifts: list[int | None] = []
        if s.bit_count() < self.k:
            lifts.append(None)
        for x in bits(s):
            if self.monotone and self.adj[x] & c:
                continue
            lifts.append(x)
        for x in lifts:
            base = s if x is None else s & ~(1 << x)
            cand = [v for v in range(self.n) if not base >> v & 1 and v != x]
            cand.sort(key=lambda v: (not c >> v & 1, not near >> v & 1, -(self.adj[v] & c).bit_count(), v))
            for v in cand:
                s2 = base | (1 << v)
                if s2 not in seen:
                    seen.add(s2)
                    out.append(s2)
            if x is not None and base not in seen:
                seen.add(base)
                out.append(base)
        return out

    def check_move(self, s: int, c: int, s2: int) -> None:
        if s2 & ~self.full:
            raise ValidationError("cop placed outside the graph")
        if s2.bit_count() > self.k:
            raise ValidationError(f"more than {self.k} cops on the graph")
        lifted = s & ~s2
        placed = s2 & ~s
        if lifted.bit_count() > 1 or placed.bit_count() > 1 or (not lifted and not placed):
            raise ValidationError("exactly one cop must move each round (|X ∩ X'| = k-1)")
        if not lifted and s.bit_count() >= self.k:
            raise ValidationError("no cop left on the clique to bring in")
        if self.monotone and lifted and _nbr(self.adj, c) & lifted:
            raise ValidationError("monotonicity violated: lifting this cop enlarges the robber's component")

    def outcome(self, s: int, c: int, s2: int) -> tuple[int, list[int]]:
        r = self.region(s, s2, c)
        return r, components_of_mask(self.adj, r & ~s2)


class _Solver(_Arena):
    def __init__(self, g: Graph, k: int, monotone: bool):
        super().__init__(g, k, monotone)
        self.won: dict[tuple[int, int], int] = {}   # smallest budget known to win
        self.lost: dict[tuple[int, int], int] = {}  # largest budget known to lose

    def win(self, s: int, c: int, r: int) -> bool:
        if r <= 0:
            return False
        key = (s, c)
        if self.won.get(key, 1 << 30) <= r:
            return True
        if self.lost.get(key, -1) >= r:
            return False
        res = False
        for s2 in self.moves(s, c):
            reg, comps = self.outcome(s, c, s2)
            if not comps or all(self.win(s2, d, r - 1) for d in sorted(comps, key=lambda m: -m.bit_count())):
                res = True
                break
        if res:
            self.won[key] = min(self.won.get(key, 1 << 30), r)
        else:
            self.lost[key] = max(self.lost.get(key, -1), r)
        return res

    def best_move(self, s: int, c: int, r: int) -> int | None:
        """A winning move using as few rounds as possible, or None."""
        if not self.win(s, c, r):
            return None
        for budget in range(1, r + 1):
            if self.win(s, c, budget):
                break
        for s2 in self.moves(s, c):
            _, comps = self.outcome(s, c, s2)
            if all(self.win(s2, d, budget - 1) for d in comps):
                return s2
        raise AssertionError("winning state without winning move")

    def escape(self, s: int, c: int, r: int, s2: int) -> int | None:
        """A component that survives ``r - 1`` more rounds, or None."""
        _, comps = self.outcome(s, c, s2)
        for d in sorted(comps, key=lambda m: (-m.bit_count(), m)):
            if not self.win(s2, d, r - 1):
                return d
        return None


# ---------------------------------------------------------------- strategies


class Strategy:
    """A strategy for one side, queried through fresh controllers.

    Controllers may keep private state between rounds (scripted sweeps do);
    every answer given is recorded in ``table``.
    """

    def __init__(self, side: str, name: str, factory: Callable[[], object], *, stateless: bool = False,
                 graph: Graph | None = None, k: int | None = None, monotone: bool = True):
        if side not in (COPS, ROBBER):
            raise ValidationError(f"unknown side {side!r}")
        self.side = side
        self.name = name
        self.factory = factory
        self.stateless = stateless
        self.graph = graph
        self.k = k
        self.monotone = monotone
        self.table: dict = {}

    def controller(self):
        return self.factory()

    def to_json(self) -> dict:
        rows = []
        for key, val in sorted(self.table.items(), key=lambda kv: repr(kv[0])):
            if self.side == COPS:
                s, c, r = key
                rows.append({"cops": bits(s), "robber": bits(c), "rounds_left": r, "move": bits(val)})
            else:
                if key[0] == "start":
                    rows.append({"start": True, "choice": bits(val)})
                else:
                    s, c, r, s2 = key
                    rows.append({"cops": bits(s), "robber": bits(c), "rounds_left": r, "new_cops": bits(s2), "choice": bits(val)})
        return {"side": self.side, "name": self.name, "moves": rows}

    def __repr__(self) -> str:
        return f"Strategy({self.side}, {self.name})"


class _SolverCops:
    def __init__(self, solver: _Solver, table: dict):
        self.solver = solver
        self.table = table

    def cop(self, s: int, c: int, r: int) -> int:
        mv = self.solver.best_move(s, c, r)
        if mv is None:
            # no winning move: make any legal one
            mv = self.solver.moves(s, c)[0]
        self.table[(s, c, r)] = mv
        return mv


class _SolverRobber:
    def __init__(self, solver: _Solver, q: int, table: dict):
        self.solver = solver
        self.q = q
        self.table = table

    def start(self, comps: list[int]) -> int:
        pick = next((d for d in sorted(comps, key=lambda m: (-m.bit_count(), m)) if not self.solver.win(0, d, self.q)), None)
        pick = _largest(comps) if pick is None else pick
        self.table[("start",)] = pick
        return pick

    def reply(self, s: int, c: int, r: int, s2: int, comps: list[int]) -> int:
        d = self.solver.escape(s, c, r, s2)
        d = _largest(comps) if d is None else d
        self.table[(s, c, r, s2)] = d
        return d


@dataclass
class GameResult:
    winner: str
    strategy: Strategy
    rounds: int | None = None

    def __iter__(self):
        yield self.winner
        yield self.strategy


def solve_cr(g: Graph, k: int, q: int, monotone: bool = True, limit: int = 40) -> GameResult:
    """Exact value of the q-round game with k cops, and a strategy for the winner.

    ``rounds`` is the least number of rounds the cops need when they win.
    """
    check_bound(g.n, limit, "solve_cr")
    if q < 0:
        raise ValidationError("round budget must be non-negative")
    solver = _Solver(g, k, monotone)
    comps = components_of_mask(g.adj, solver.full)
    cops_win = all(solver.win(0, c, q) for c in comps)
    if cops_win:
        need = 0
        for c in comps:
            b = 1
            while not solver.win(0, c, b):
                b += 1
            need = max(need, b)
        st = Strategy(COPS, "optimal", None, stateless=True, graph=g, k=k, monotone=monotone)
        st.factory = lambda: _SolverCops(solver, st.table)
        return GameResult(COPS, st, need)
    st = Strategy(ROBBER, "optimal", None, stateless=True, graph=g, k=k, monotone=monotone)
    st.factory = lambda: _SolverRobber(solver, q, st.table)
    return GameResult(ROBBER, st, None)


def strategy_to_td(g: Graph, strategy: Strategy, k: int | None = None, q: int | None = None):
    """Tree decomposition read off a winning monotone cop strategy.

    Every placement inside the robber's component opens a node whose bag is
    that vertex together with the cops guarding the component.
    """
    from .decomp import TreeDecomposition, verify

    if strategy.side != COPS:
        raise ValidationError("expected a cop strategy")
    if not strategy.monotone:
        raise ValidationError("only monotone strategies describe decompositions")
    k = strategy.k if k is None else k
    arena = _Arena(g, k, True)
    ctrl = strategy.controller()
    parent: list[int | None] = [None]
    bags: list[list[int]] = [[]]
    horizon = q if q is not None else g.n * (k + 1) + 1
    stack = [(0, c, horizon, 0) for c in components_of_mask(g.adj, arena.full)]
    while stack:
        s, c, r, node = stack.pop()
        while True:
            if r <= 0:
                raise ValidationError("strategy does not capture the robber in time")
            s2 = ctrl.cop(s, c, r)
            arena.check_move(s, c, s2)
            placed = s2 & ~s
            if placed & c:
                break
            s, r = s2, r - 1
        bag = bits(_nbr(g.adj, c) | placed)
        parent.append(node)
        bags.append(bag)
        me = len(bags) - 1
        rest = c & ~placed
        for d in components_of_mask(g.adj, rest):
            stack.append((s2, d, r - 1, me))
    td = TreeDecomposition(parent, bags, 0)
    rep = verify(g, td, k, q)
    if not rep.ok:
        raise ValidationError(f"strategy does not yield a decomposition: {rep.reason}")
    return td


# ---------------------------------------------------------------- scripted strategies


class _LargestComponent:
    def __init__(self, table: dict):
        self.table = table

    def start(self, comps: list[int]) -> int:
        d = _largest(comps)
        self.table[("start",)] = d
        return d

    def reply(self, s: int, c: int, r: int, s2: int, comps: list[int]) -> int:
        d = _largest(comps)
        self.table[(s, c, r, s2)] = d
        return d


class _PathWalk:
    """Cop in the middle, then step towards the robber until he is cornered."""

    def __init__(self, g: Graph, k: int, table: dict):
        self.adj = g.adj
        self.k = k
        self.table = table

    def _lift(self, s: int, c: int, avoid: int) -> int:
        if s.bit_count() < self.k:
            return s
        for x in bits(s):
            if not self.adj[x] & (c | avoid):
                return s & ~(1 << x)
        raise ValidationError("no cop can be lifted without releasing the robber")

    def cop(self, s: int, c: int, r: int) -> int:
        vs = bits(c)
        if len(vs) == 1:
            mv = self._lift(s, c, 0) | c
        else:
            guards = _nbr(self.adj, c) & s
            if not guards:
                v = vs[(len(vs) - 1) // 2]
            else:
                g0 = bits(guards)[0]
                v = bits(self.adj[g0] & c)[0]
            mv = self._lift(s, c, 0) | (1 << v)
        self.table[(s, c, r)] = mv
        return mv


class _DiagonalSweep:
    """Diagonal cut across the grid followed by a staircase sweep of one side."""

    def __init__(self, g: Graph, h: int, l: int, k: int, table: dict):
        self.g = g
        self.h, self.l, self.k = h, l, k
        self.adj = g.adj
        self.table = table
        self.c0 = l // 2 - h // 2
        self.step = 0
        self.flip = False
        self.i = self.j = 0
        self.fallback: _Solver | None = None

    def cell(self, i: int, j: int) -> int | None:
        if self.flip:
            i, j = self.h + 1 - i, self.l + 1 - j
        if 1 <= i <= self.h and 1 <= j <= self.l:
            return grid_vertex(self.h, self.l, i, j)
        return None

    def _free_lift(self, s: int, c: int) -> int | None:
        if s.bit_count() < self.k:
            return s
        for x in bits(s):
            if not self.adj[x] & c:
                return s & ~(1 << x)
        return None

    def _shift(self, s: int, c: int, src: tuple[int, int], dst: tuple[int, int]) -> int | None:
        a, b = self.cell(*src), self.cell(*dst)
        if a is None or b is None or not s >> a & 1 or s >> b & 1 or self.adj[a] & c:
            return None
        return (s & ~(1 << a)) | (1 << b)

    def _planned(self, s: int, c: int) -> int | None:
        h, c0 = self.h, self.c0
        if c.bit_count() == 1:
            base = self._free_lift(s, c)
            return None if base is None else base | c
        self.step += 1
        if self.step <= h:
            v = self.cell(self.step, c0 + self.step)
            base = s if s.bit_count() < self.k else None
            return None if v is None or base is None or s >> v & 1 else base | (1 << v)
        if self.step == h + 1:
            right = any(j > c0 + i for i, j in (grid_cell(self.l, v) for v in bits(c)))
            self.flip = right
            self.i, self.j = h, c0 + 1
            v = self.cell(h, c0 + h - 2)
            base = self._free_lift(s, c)
            return None if v is None or base is None or s >> v & 1 else base | (1 << v)
        i, j = self.i, self.j
        if i > 1:
            mv = self._shift(s, c, (i, j + i - 1), (i - 1, max(1, j + i - 4)))
            self.i = i - 1
            return mv
        mv = self._shift(s, c, (1, j), (h, j + h - 5))
        self.j, self.i = j - 2, h
        return mv

    def cop(self, s: int, c: int, r: int) -> int:
        mv = self._planned(s, c)
        if mv is None:
            # the pattern does not apply here: play an exact best move instead
            if self.fallback is None:
                self.fallback = _Solver(self.g, self.k, True)
            mv = self.fallback.best_move(s, c, r)
            if mv is None:
                mv = self.fallback.moves(s, c)[0]
        self.table[(s, c, r)] = mv
        return mv


def scripted_strategy(kind: str, *params: int, k: int | None = None) -> Strategy:
    """Named scripted strategies.

    ``robber_largest_component`` takes a graph-free parameter list (h, l) and
    plays on grid(h, l); ``cop_diagonal_sweep`` takes (h, l) and uses h+1 cops;
    ``cop_binary_split`` takes (l,) and uses 2 cops on path(l).
    """
    if kind == "robber_largest_component":
        if len(params) != 2:
            raise ValidationError("robber_largest_component needs grid parameters h, l")
        g = grid(*params)
        st = Strategy(ROBBER, kind, None, stateless=True, graph=g, k=k)
        st.factory = lambda: _LargestComponent(st.table)
        return st
    if kind == "cop_diagonal_sweep":
        if len(params) != 2:
            raise ValidationError("cop_diagonal_sweep needs grid parameters h, l")
        h, l = params
        kk = h + 1 if k is None else k
        g = grid(h, l)
        st = Strategy(COPS, kind, None, graph=g, k=kk, monotone=True)
        st.factory = lambda: _DiagonalSweep(g, h, l, kk, st.table)
        return st
    if kind == "cop_binary_split":
        if len(params) != 1:
            raise ValidationError("cop_binary_split needs the path length")
        g = path(params[0])
        kk = 2 if k is None else k
        st = Strategy(COPS, kind, None, stateless=True, graph=g, k=kk, monotone=True)
        st.factory = lambda: _PathWalk(g, kk, st.table)
        return st
    raise ValidationError(f"unknown scripted strategy {kind!r}")


@dataclass
class Outcome:
    winner: str
    rounds: int
    transcript: list[dict] = field(default_factory=list)


def _entry(rnd: int, s2: int, d: int | None) -> dict:
    return {"round": rnd, "cops": bits(s2), "robber": None if d is None else bits(d)}


def simulate(g: Graph, k: int, q: int, cops: Strategy | str = "optimal", robber: Strategy | str = "adversarial",
             monotone: bool = True) -> Outcome:
    """Play the game; an "optimal"/"adversarial" side answers by exhaustive best response.

    ``rounds`` is the capture round, or the number of rounds survived.
    """
    for st, side in ((cops, COPS), (robber, ROBBER)):
        if isinstance(st, Strategy):
            if st.side != side:
                raise ValidationError(f"expected a {side} strategy, got {st.side}")
            if st.graph is not None and st.graph != g.unlabelled() and st.graph != g:
                raise ValidationError("strategy was built for a different graph")
        elif st not in ("optimal", "adversarial"):
            raise ValidationError(f"unknown strategy {st!r}")
    arena = _Arena(g, k, monotone)
    comps0 = components_of_mask(g.adj, arena.full)
    if not comps0:
        return Outcome(COPS, 0, [])
    if not isinstance(cops, Strategy) and not isinstance(robber, Strategy):
        res = solve_cr(g, k, q, monotone)
        cops, robber = (res.strategy, None) if res.winner == COPS else (None, res.strategy)
        solver = res.strategy.factory().solver
        if cops is None:
            cops = Strategy(COPS, "optimal", lambda: _SolverCops(solver, {}), stateless=True)
        else:
            robber = Strategy(ROBBER, "optimal", lambda: _SolverRobber(solver, q, {}), stateless=True)
    if isinstance(cops, Strategy) and isinstance(robber, Strategy):
        return _play(arena, q, cops.controller(), robber.controller(), comps0)
    if isinstance(cops, Strategy):
        return _adversarial_robber(arena, q, cops.controller(), comps0)
    return _adversarial_cops(arena, q, robber, comps0)


def _play(arena: _Arena, q: int, cc, rc, comps0: list[int]) -> Outcome:
    c = rc.start(comps0)
    if c not in comps0:
        raise ValidationError("robber must start in a component of the graph")
    s = 0
    log = []
    for rnd in range(1, q + 1):
        s2 = cc.cop(s, c, q - rnd + 1)
        arena.check_move(s, c, s2)
        _, comps = arena.outcome(s, c, s2)
        if not comps:
            log.append(_entry(rnd, s2, None))
            return Outcome(COPS, rnd, log)
        d = rc.reply(s, c, q - rnd + 1, s2, comps)
        if d not in comps:
            raise ValidationError("robber must move to a component he can reach")
        log.append(_entry(rnd, s2, d))
        s, c = s2, d
    return Outcome(ROBBER, q, log)


def _adversarial_robber(arena: _Arena, q: int, cc, comps0: list[int]) -> Outcome:
    """Robber explores every reply; the best one for him is reported."""

    def better(a: Outcome, b: Outcome | None) -> bool:
        if b is None:
            return True
        return (a.winner == ROBBER, a.rounds) > (b.winner == ROBBER, b.rounds)

    def rec(ctrl, s: int, c: int, rnd: int, log: list) -> Outcome:
        if rnd > q:
            return Outcome(ROBBER, q, list(log))
        s2 = ctrl.cop(s, c, q - rnd + 1)
        arena.check_move(s, c, s2)
        _, comps = arena.outcome(s, c, s2)
        if not comps:
            return Outcome(COPS, rnd, log + [_entry(rnd, s2, None)])
        best = None
        for i, d in enumerate(comps):
            sub = ctrl if i == len(comps) - 1 else copy.deepcopy(ctrl)
            out = rec(sub, s2, d, rnd + 1, log + [_entry(rnd, s2, d)])
            if better(out, best):
                best = out
            if best.winner == ROBBER:
                break
        return best

    best = None
    for i, c in enumerate(comps0):
        ctrl = cc if i == len(comps0) - 1 else copy.deepcopy(cc)
        out = rec(ctrl, 0, c, 1, [])
        if better(out, best):
            best = out
        if best.winner == ROBBER:
            break
    return best


def _adversarial_cops(arena: _Arena, q: int, robber: Strategy, comps0: list[int]) -> Outcome:
    """Cops search all moves against a fixed robber."""
    if not robber.stateless:
        raise ValidationError("adversarial cops need a stateless robber strategy")
    rc = robber.controller()
    memo: dict[tuple[int, int, int], int | None] = {}

    def catch(s: int, c: int, r: int) -> int | None:
        """Fewest rounds to capture from here within r, else None."""
        if r <= 0:
            return None
        key = (s, c, r)
        if key in memo:
            return memo[key]
        best = None
        for s2 in arena.moves(s, c):
            _, comps = arena.outcome(s, c, s2)
            if not comps:
                best = 1
                break
            d = rc.reply(s, c, r, s2, comps)
            sub = catch(s2, d, r - 1)
            if sub is not None and (best is None or sub + 1 < best):
                best = sub + 1
        memo[key] = best
        return best

    c = rc.start(comps0)
    need = catch(0, c, q)
    if need is None:
        return Outcome(ROBBER, q, [])
    log = []
    s = 0
    for rnd in range(1, need + 1):
        left = need - rnd + 1
        for s2 in arena.moves(s, c):
            _, comps = arena.outcome(s, c, s2)
            if not comps:
                log.append(_entry(rnd, s2, None))
                return Outcome(COPS, rnd, log)
            d = rc.reply(s, c, q - rnd + 1, s2, comps)
            sub = catch(s2, d, left - 1)
            if sub is not None and sub <= left - 1:
                log.append(_entry(rnd, s2, d))
                s, c = s2, d
                break
    return Outcome(COPS, need, log)


# ---------------------------------------------------------------- bijective pebble game


class _Bijective:
    def __init__(self, g: Graph, h: Graph, k: int):
        self.g, self.h, self.k = g, h, k
        self.gadj, self.hadj = g.adj, h.adj
        self.n = g.n
        self.memo: dict[tuple, bool] = {}

    def partial_iso(self, pos: tuple) -> bool:
        fwd: dict[int, int] = {}
        back: dict[int, int] = {}
        for v, w in pos:
            if fwd.setdefault(v, w) != w or back.setdefault(w, v) != v:
                return False
        items = list(fwd.items())
        for i, (v, w) in enumerate(items):
            for v2, w2 in items[i + 1:]:
                if (self.gadj[v] >> v2 & 1) != (self.hadj[w] >> w2 & 1):
                    return False
        return True

    def wins(self, pos: tuple, r: int) -> bool:
        """Duplicator survives r more rounds from ``pos`` (already a partial isomorphism)."""
        if r == 0:
            return True
        key = (pos, r)
        if key in self.memo:
            return self.memo[key]
        bases = []
        if len(pos) < self.k:
            bases.append(pos)
        for i, p in enumerate(pos):
            if i == 0 or pos[i - 1] != p:
                bases.append(pos[:i] + pos[i + 1:])
        res = all(self.matching(b, r - 1) for b in bases)
        self.memo[key] = res
        return res

    def ok(self, base: tuple, v: int, w: int, r: int) -> bool:
        pos = tuple(sorted(base + ((v, w),)))
        return self.partial_iso(pos) and self.wins(pos, r)

    def matching(self, base: tuple, r: int) -> bool:
        n = self.n
        rel: list[list[int] | None] = [None] * n

        def options(v: int) -> list[int]:
            if rel[v] is None:
                rel[v] = [w for w in range(n) if self.ok(base, v, w, r)]
            return rel[v]

        match_w: list[int] = [-1] * n
        match_v: list[int] = [-1] * n
        # greedy seed
        for v in range(n):
            opts = options(v)
            if not opts:
                return False
            for w in opts:
                if match_w[w] < 0:
                    match_w[w] = v
                    match_v[v] = w
                    break
        for v in range(n):
            if match_v[v] >= 0:
                continue
            seen = set()

            def augment(x: int) -> bool:
                for w in options(x):
                    if w in seen:
                        continue
                    seen.add(w)
                    if match_w[w] < 0 or augment(match_w[w]):
                        match_w[w] = x
                        match_v[x] = w
                        return True
                return False

            if not augment(v):
                return False
        return True


def bijective_pebble_game(g: Graph, h: Graph, k: int, q: int, gamma0: Mapping[int, tuple[int, int]] | None = None,
                          limit: int = 40) -> str:
    """Winner ("duplicator" or "spoiler") of the q-round bijective k-pebble game.

    ``gamma0`` places pebbles before the first round; by default every label
    shared by both graphs pins its pair of vertices.
    """
    check_bound(max(g.n, h.n), limit, "bijective_pebble_game")
    if k < 1 or q < 0:
        raise ValidationError("k must be positive and q non-negative")
    if gamma0 is None:
        if set(g.labels) != set(h.labels):
            return "spoiler"
        gamma0 = {l: (g.labels[l], h.labels[l]) for l in g.labels}
    for p, (v, w) in gamma0.items():
        if not 1 <= p <= k:
            raise ValidationError(f"pebble {p} is outside 1..{k}")
        if not (0 <= v < g.n and 0 <= w < h.n):
            raise ValidationError(f"pebble {p} sits outside the graphs")
    game = _Bijective(g, h, k)
    pos = tuple(sorted(gamma0.values()))
    if not game.partial_iso(pos):
        return "spoiler"
    if q == 0:
        return "duplicator"
    if g.n != h.n:
        return "spoiler"
    return "duplicator" if game.wins(pos, q) else "spoiler"


def ckq_equivalent(g: Graph, h: Graph, k: int, q: int) -> bool:
    return bijective_pebble_game(g, h, k, q) == "duplicator"


def cq_equivalent(g: Graph, h: Graph, q: int) -> bool:
    return ckq_equivalent(g, h, q, q)


# ---------------------------------------------------------------- guarded equivalence


@lru_cache(maxsize=None)
def guarded_one_labelled(k: int, q: int, max_f: int) -> tuple[Graph, ...]:
    """One-labelled (label 1) members of the guarded class with at most max_f vertices."""
    from .canon import canonical_key, graphs_up_to
    from .decomp import search_ctree
    from .graph import is_connected

    out = []
    seen = set()
    for f in graphs_up_to(max_f):
        if f.n == 0 or not is_connected(f):
            continue
        for v in range(f.n):
            fl = Graph(f.n, f.edges, {1: v}, k)
            key = canonical_key(fl)
            if key in seen:
                continue
            seen.add(key)
            if search_ctree(fl, k, q, guarded=True) is not None:
                out.append(fl)
    return tuple(out)


@dataclass
class GuardedVerdict:
    distinguished: bool
    witness: Graph | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return not self.distinguished


def gc_equivalent_bounded(g: Graph, h: Graph, k: int, q: int, max_f: int = 5) -> GuardedVerdict:
    """Compare guarded hom profiles over one-labelled class members up to max_f vertices.

    One-labelled inputs (label 1) are compared directly.  For unlabelled
    inputs the multisets of per-vertex profiles must coincide.  Agreement is
    only evidence up to the bound.
    """
    from .hom import hom_count

    check_bound(max_f, 7, "gc_equivalent_bounded")
    fam = guarded_one_labelled(k, q, max_f)
    if g.labels or h.labels:
        if set(g.labels) != {1} or set(h.labels) != {1}:
            raise ValidationError("guarded comparison needs unlabelled or one-labelled inputs")
        for f in fam:
            if hom_count(f, g) != hom_count(f, h):
                return GuardedVerdict(True, f, len(fam))
        return GuardedVerdict(False, None, len(fam))
    prof_g = [[hom_count(f, set_label(g, 1, v)) for f in fam] for v in range(g.n)]
    prof_h = [[hom_count(f, set_label(h, 1, v)) for f in fam] for v in range(h.n)]
    for i, f in enumerate(fam):
        if sorted(p[i] for p in prof_g) != sorted(p[i] for p in prof_h):
            return GuardedVerdict(True, f, len(fam))
    if sorted(map(tuple, prof_g)) != sorted(map(tuple, prof_h)):
        return GuardedVerdict(True, None, len(fam))
    return GuardedVerdict(False, None, len(fam))


def equivalence_suite(g: Graph, h: Graph, k: int, q: int, max_f: int = 5, gc: bool = True) -> dict:
    out = {
        "ckq_equivalent": ckq_equivalent(g, h, k, q),
        "cq_equivalent": cq_equivalent(g, h, q),
    }
    if gc:
        v = gc_equivalent_bounded(g, h, k, q, max_f)
        out["gc_equivalent_bounded"] = {"distinguished": v.distinguished, "witness": v.witness, "checked": v.checked}
    return out

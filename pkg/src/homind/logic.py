"""Counting logic: formulas, evaluation, and the translations to and from graphs.

Variables are positive integers; on a labelled graph variable ``i`` is read
as the vertex carrying label ``i``.  Formulas are hash-consed, so equal
formulas are the same object and synthesised formulas share subterms.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import CapabilityError, ValidationError
from .graph import Graph

# ---------------------------------------------------------------- syntax


class Formula:
    __slots__ = ("op", "args", "_free", "_qr", "_vars", "__weakref__")

    _table: dict = {}

    def __new__(cls, op: str, *args):
        key = (op, args)
        f = cls._table.get(key)
        if f is None:
            f = object.__new__(cls)
            f.op = op
            f.args = args
            f._free = f._qr = f._vars = None
            cls._table[key] = f
        return f

    def __reduce__(self):
        return (Formula, (self.op,) + self.args)

    @property
    def free(self) -> tuple[int, ...]:
        if self._free is None:
            op, a = self.op, self.args
            if op in ("eq", "edge"):
                fv = set(a)
            elif op == "geq":
                fv = set(a[2].free) - {a[1]}
            else:
                fv = set().union(*(x.free for x in a)) if a else set()
            self._free = tuple(sorted(fv))
        return self._free

    @property
    def qr(self) -> int:
        if self._qr is None:
            if self.op == "geq":
                self._qr = 1 + self.args[2].qr
            elif self.op in ("not", "or", "and"):
                self._qr = max((x.qr for x in self.args), default=0)
            else:
                self._qr = 0
        return self._qr

    @property
    def variables(self) -> tuple[int, ...]:
        if self._vars is None:
            op, a = self.op, self.args
            if op in ("eq", "edge"):
                vs = set(a)
            elif op == "geq":
                vs = set(a[2].variables) | {a[1]}
            else:
                vs = set().union(*(x.variables for x in a)) if a else set()
            self._vars = tuple(sorted(vs))
        return self._vars

    def __repr__(self) -> str:
        return to_sexpr(self)

    def __str__(self) -> str:
        return to_sexpr(self)


def _var(i) -> int:
    if not isinstance(i, int) or isinstance(i, bool) or i < 1:
        raise ValidationError(f"variable index {i!r} must be a positive integer")
    return i


def Eq(i: int, j: int) -> Formula:
    return Formula("eq", _var(i), _var(j))


def Edge(i: int, j: int) -> Formula:
    return Formula("edge", _var(i), _var(j))


def Not(f: Formula) -> Formula:
    if f.op == "not":
        return f.args[0]
    return Formula("not", f)


def Or(*fs: Formula) -> Formula:
    fs = tuple(dict.fromkeys(fs))
    if not fs:
        return Bottom
    if len(fs) == 1:
        return fs[0]
    return Formula("or", *fs)


def And(*fs: Formula) -> Formula:
    fs = tuple(dict.fromkeys(x for x in fs if x is not Top))
    if not fs:
        return Top
    if len(fs) == 1:
        return fs[0]
    return Formula("and", *fs)


def CountExists(t: int, var: int, body: Formula) -> Formula:
    """At least t distinct values of ``var`` satisfy ``body``."""
    if not isinstance(t, int) or t < 1:
        raise ValidationError("counting threshold must be a positive integer")
    return Formula("geq", t, _var(var), body)


def ExistsExactly(t: int, var: int, body: Formula) -> Formula:
    if t < 0:
        raise ValidationError("counting threshold must be non-negative")
    if t == 0:
        return Not(CountExists(1, var, body))
    return And(CountExists(t, var, body), Not(CountExists(t + 1, var, body)))


Top = Formula("top")
Bottom = Formula("bottom")


# ---------------------------------------------------------------- text and JSON forms


def to_sexpr(f: Formula) -> str:
    op, a = f.op, f.args
    if op == "top":
        return "true"
    if op == "bottom":
        return "false"
    if op == "eq":
        return f"(eq x{a[0]} x{a[1]})"
    if op == "edge":
        return f"(E x{a[0]} x{a[1]})"
    if op == "geq":
        return f"(geq {a[0]} x{a[1]} {to_sexpr(a[2])})"
    return "(" + op + "".join(" " + to_sexpr(x) for x in a) + ")"


_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def parse_sexpr(text: str) -> Formula:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ValidationError(f"unexpected character at offset {pos}")
        toks.append((m.group(1), m.start(1)))
        pos = m.end()
    i = 0

    def var(tok: str, at: int) -> int:
        if not re.fullmatch(r"x[1-9][0-9]*", tok):
            raise ValidationError(f"expected a variable like x1 at offset {at}, got {tok!r}")
        return int(tok[1:])

    def num(tok: str, at: int) -> int:
        if not tok.isdigit():
            raise ValidationError(f"expected a number at offset {at}, got {tok!r}")
        return int(tok)

    def expr() -> Formula:
        nonlocal i
        if i >= len(toks):
            raise ValidationError("unexpected end of formula")
        tok, at = toks[i]
        i += 1
        if tok == "true":
            return Top
        if tok == "false":
            return Bottom
        if tok != "(":
            raise ValidationError(f"unexpected token {tok!r} at offset {at}")
        if i >= len(toks):
            raise ValidationError("unexpected end of formula")
        head, hat = toks[i]
        i += 1
        args: list = []
        if head in ("eq", "E"):
            args = [var(*toks[i]), var(*toks[i + 1])]
            i += 2
            out = Eq(*args) if head == "eq" else Edge(*args)
        elif head in ("geq", "exactly"):
            t = num(*toks[i])
            x = var(*toks[i + 1])
            i += 2
            body = expr()
            out = CountExists(t, x, body) if head == "geq" else ExistsExactly(t, x, body)
        elif head in ("not", "or", "and"):
            while i < len(toks) and toks[i][0] != ")":
                args.append(expr())
            if head == "not":
                if len(args) != 1:
                    raise ValidationError(f"not takes one argument (offset {hat})")
                out = Not(args[0])
            else:
                out = (Or if head == "or" else And)(*args)
        else:
            raise ValidationError(f"unknown operator {head!r} at offset {hat}")
        if i >= len(toks) or toks[i][0] != ")":
            raise ValidationError(f"missing ')' for operator at offset {hat}")
        i += 1
        return out

    f = expr()
    if i != len(toks):
        raise ValidationError(f"trailing input at offset {toks[i][1]}")
    return f


def to_json(f: Formula) -> dict:
    op, a = f.op, f.args
    if op in ("top", "bottom"):
        return {"op": "true" if op == "top" else "false"}
    if op in ("eq", "edge"):
        return {"op": "eq" if op == "eq" else "E", "vars": list(a)}
    if op == "geq":
        return {"op": "geq", "t": a[0], "var": a[1], "body": to_json(a[2])}
    if op == "not":
        return {"op": "not", "arg": to_json(a[0])}
    return {"op": op, "args": [to_json(x) for x in a]}


def from_json(d: Mapping) -> Formula:
    try:
        op = d["op"]
        if op == "true":
            return Top
        if op == "false":
            return Bottom
        if op == "eq":
            return Eq(*d["vars"])
        if op == "E":
            return Edge(*d["vars"])
        if op == "geq":
            return CountExists(d["t"], d["var"], from_json(d["body"]))
        if op == "not":
            return Not(from_json(d["arg"]))
        if op == "or":
            return Or(*(from_json(x) for x in d["args"]))
        if op == "and":
            return And(*(from_json(x) for x in d["args"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed formula JSON: {exc}") from None
    raise ValidationError(f"unknown operator {d.get('op')!r}")


def formula_loads(text: str) -> Formula:
    text = text.strip()
    if text.startswith("{"):
        return from_json(json.loads(text))
    return parse_sexpr(text)


# ---------------------------------------------------------------- fragments


def _guard_of(f: Formula) -> int | None:
    """The partner variable if ``f`` is a guarded quantification, else None."""
    t, x, body = f.args
    parts = body.args if body.op == "and" else (body,)
    for p in parts:
        if p.op == "edge":
            a, b = p.args
            if a != b and x in (a, b):
                return b if a == x else a
    return None


def is_guarded(f: Formula) -> bool:
    if f.op == "geq":
        return _guard_of(f) is not None and is_guarded(f.args[2])
    if f.op in ("not", "or", "and"):
        return all(is_guarded(x) for x in f.args)
    return True


@dataclass(frozen=True)
class Fragment:
    qr: int
    variables: tuple[int, ...]
    free: tuple[int, ...]
    guarded: bool

    def in_ckq(self, k: int, q: int) -> bool:
        return self.qr <= q and all(1 <= v <= k for v in self.variables)

    def in_gckq(self, k: int, q: int) -> bool:
        return self.guarded and self.in_ckq(k, q)


def fragment_check(f: Formula) -> Fragment:
    return Fragment(f.qr, f.variables, f.free, is_guarded(f))


# ---------------------------------------------------------------- semantics


class _Model:
    """Evaluation on a fixed graph with memoisation per (subformula, free assignment)."""

    def __init__(self, adj: Sequence[int], n: int):
        self.adj = adj
        self.n = n
        self.memo: dict = {}

    def ev(self, f: Formula, env: dict[int, int]) -> bool:
        op = f.op
        if op == "eq":
            return env[f.args[0]] == env[f.args[1]]
        if op == "edge":
            return bool(self.adj[env[f.args[0]]] >> env[f.args[1]] & 1)
        if op == "top":
            return True
        if op == "bottom":
            return False
        key = (f, tuple(env[v] for v in f.free))
        r = self.memo.get(key)
        if r is not None:
            return r
        if op == "not":
            r = not self.ev(f.args[0], env)
        elif op == "or":
            r = any(self.ev(x, env) for x in f.args)
        elif op == "and":
            r = all(self.ev(x, env) for x in f.args)
        else:
            t, x, body = f.args
            inner = dict(env)
            count = 0
            r = False
            for v in range(self.n):
                inner[x] = v
                if self.ev(body, inner):
                    count += 1
                    if count >= t:
                        r = True
                        break
        self.memo[key] = r
        return r

    def count(self, body: Formula, x: int, env: dict[int, int]) -> int:
        inner = dict(env)
        c = 0
        for v in range(self.n):
            inner[x] = v
            c += self.ev(body, inner)
        return c


@dataclass(frozen=True)
class ModelsVerdict:
    value: bool
    interpretation: dict

    def __bool__(self) -> bool:
        return self.value


def evaluate(f: Formula, g: Graph, model: _Model | None = None) -> ModelsVerdict:
    """Whether ``g`` satisfies ``f``, free variables read off the labels."""
    from .hom import PreconditionError

    missing = [v for v in f.free if v not in g.labels]
    if missing:
        raise PreconditionError(f"free variable x{missing[0]} has no label in the graph")
    env = {v: g.labels[v] for v in f.free}
    m = model if model is not None else _Model(g.adj, g.n)
    return ModelsVerdict(m.ev(f, env), env)


# ---------------------------------------------------------------- construction tree -> formula


def _node_graph(node, arity: int) -> Graph:
    vs = sorted(node.vertices)
    pos = {v: i for i, v in enumerate(vs)}
    return Graph(len(vs), [(pos[a], pos[b]) for a, b in node.edges], {l: pos[v] for l, v in node.labels.items()}, arity)


@lru_cache(maxsize=None)
def _targets(n_max: int) -> tuple[Graph, ...]:
    from .canon import graphs_up_to

    return tuple(g for g in graphs_up_to(n_max) if g.n > 0)


@lru_cache(maxsize=4096)
def attainable(f: Graph, n_max: int) -> frozenset[int]:
    """All values hom(f, G) over graphs G with 1..n_max vertices and every placement of f's labels."""
    from .hom import hom_count

    labs = sorted(f.labels)
    out = set()
    for g in _targets(n_max):
        for asg in iproduct(range(g.n), repeat=len(labs)):
            out.add(hom_count(f, Graph(g.n, g.edges, dict(zip(labs, asg)), max(labs, default=0))))
    return frozenset(out)


def _decompositions(m: int, values: list[int], slots: int) -> Iterator[list[tuple[int, int]]]:
    """Ways to write m = sum c_i m_i with distinct m_i from values, c_i >= 1, sum c_i <= slots."""
    def rec(i: int, rest: int, left: int, acc: list):
        if rest == 0:
            yield list(acc)
            return
        if i == len(values) or left == 0:
            return
        v = values[i]
        for c in range(1, left + 1):
            if c * v > rest:
                break
            acc.append((v, c))
            yield from rec(i + 1, rest - c * v, left - c, acc)
            acc.pop()
        yield from rec(i + 1, rest, left, acc)

    yield from rec(0, m, slots, [])


def synth_formula(f: Graph, w, m: int, guarded: bool | None = None, max_size: int = 4) -> Formula:
    """Formula true on a graph G with at most ``max_size`` vertices exactly when hom(f, G) = m.

    Free variables are the labels of f.  Elimination nodes become counting
    quantifiers, so the rank equals the elimination depth of ``w``.
    """
    from .decomp import ConstructionTree, verify

    if not isinstance(w, ConstructionTree):
        raise ValidationError("expected a construction tree")
    guarded = w.guarded if guarded is None else guarded
    rep = verify(f, w, guarded=guarded)
    if not rep.ok:
        raise ValidationError(f"invalid witness: {rep.reason}")
    if m < 0:
        raise ValidationError("m must be non-negative")
    arity = max(w.arity(), 1)
    values: dict[int, frozenset] = {}
    memo: dict[tuple[int, int], Formula] = {}

    def vals(node) -> frozenset:
        key = id(node)
        if key not in values:
            values[key] = attainable(_node_graph(node, arity), max_size)
        return values[key]

    def first_label(node, v: int) -> int:
        return min(l for l, x in node.labels.items() if x == v)

    def phi(node, m: int) -> Formula:
        key = (id(node), m)
        if key in memo:
            return memo[key]
        if node.kind == "leaf":
            atoms = []
            for l, v in node.labels.items():
                l0 = first_label(node, v)
                if l != l0:
                    atoms.append(Eq(l0, l))
            for a, b in sorted(node.edges):
                atoms.append(Edge(first_label(node, a), first_label(node, b)))
            conj = And(*atoms)
            out = conj if m == 1 else Not(conj) if m == 0 else Bottom
        elif node.kind == "product":
            out = prod(node.children, m)
        else:
            out = elim(node, m)
        memo[key] = out
        return out

    def prod_vals(children) -> frozenset:
        acc = frozenset({1})
        for c in children:
            acc = frozenset(a * b for a in acc for b in vals(c))
        return acc

    def prod(children, m: int) -> Formula:
        if len(children) == 1:
            return phi(children[0], m)
        head, rest = children[0], children[1:]
        if m == 0:
            return Or(phi(head, 0), prod(rest, 0))
        rv = prod_vals(rest)
        parts = []
        for m1 in sorted(vals(head)):
            if m1 and m % m1 == 0 and m // m1 in rv:
                parts.append(And(phi(head, m1), prod(rest, m // m1)))
        return Or(*parts)

    def elim(node, m: int) -> Formula:
        child = node.children[0]
        l = node.label
        wrap = (lambda b: b)
        if guarded:
            v = child.labels[l]
            lab = {x for x in child.labels.values() if x != v}
            nb = sorted(first_label(child, u) for u in lab if (min(u, v), max(u, v)) in child.edges)
            guard = Edge(nb[0], l)
            wrap = (lambda b, g=guard: And(g, b))
        nonzero = wrap(Not(phi(child, 0)))
        if m == 0:
            return ExistsExactly(0, l, nonzero)
        opts = sorted(x for x in vals(child) if x)
        parts = []
        for dec in _decompositions(m, opts, max_size):
            total = sum(c for _, c in dec)
            conj = [ExistsExactly(total, l, nonzero)]
            conj += [ExistsExactly(c, l, wrap(phi(child, mi))) for mi, c in dec]
            parts.append(And(*conj))
        return Or(*parts)

    return phi(w.root, m)


# ---------------------------------------------------------------- formula -> quantum graph


def _contexts(free: tuple[int, ...], n: int) -> Iterator[tuple[_Model, dict[int, int]]]:
    from .canon import graphs_on

    for g in graphs_on(n):
        model = _model_for(g)
        for asg in iproduct(range(n), repeat=len(free)):
            yield model, dict(zip(free, asg))


_MODELS: dict[Graph, _Model] = {}


def _model_for(g: Graph) -> _Model:
    m = _MODELS.get(g)
    if m is None:
        if len(_MODELS) > 5000:
            _MODELS.clear()
        m = _Model(g.adj, g.n)
        _MODELS[g] = m
    return m


def synth_qg(f: Formula, n: int, guarded: bool = False, k: int | None = None, q: int | None = None,
             budget: int = 20_000):
    """Quantum graph that evaluates to 1 on n-vertex graphs satisfying f and to 0 otherwise.

    Negation, disjunction and counting quantifiers become interpolation
    polynomials over the values the sub-combination can take on n-vertex
    graphs; conjunction is the glue product.
    """
    from .hom import QuantumGraph

    info = fragment_check(f)
    if k is not None and not info.in_ckq(k, q if q is not None else info.qr):
        raise ValidationError("formula lies outside the claimed fragment")
    if guarded and not info.guarded:
        raise ValidationError("formula is not guarded")
    if n < 1:
        raise ValidationError("target size must be positive")
    arity = max(k or 0, max(info.variables, default=0), 1)
    memo: dict[Formula, QuantumGraph] = {}

    def check(qg: QuantumGraph) -> QuantumGraph:
        if len(qg) > budget:
            raise CapabilityError(f"synth_qg: {len(qg)} terms exceed the budget {budget}")
        return qg

    def mul(a: QuantumGraph, b: QuantumGraph) -> QuantumGraph:
        if len(a) * len(b) > 20 * budget:
            raise CapabilityError(f"synth_qg: product of {len(a)} and {len(b)} terms exceeds the budget")
        return check(a * b)

    def poly(a: QuantumGraph, splus, sminus) -> QuantumGraph:
        from .hom import _lagrange

        sp = sorted({Fraction(x) for x in splus})
        sm = sorted({Fraction(x) for x in sminus})
        if not sp:
            return QuantumGraph.zero(arity)
        coeffs = _lagrange(sp, sm)
        out = QuantumGraph.unit(arity).scale(coeffs[0])
        power = QuantumGraph.unit(arity)
        for c in coeffs[1:]:
            power = mul(power, a)
            if c:
                out = check(out + power.scale(c))
        return out

    def values(form: Formula, fn) -> set[int]:
        return {fn(model, env) for model, env in _contexts(form.free, n)}

    def rec(g: Formula) -> QuantumGraph:
        if g in memo:
            return memo[g]
        op, a = g.op, g.args
        if op == "top":
            out = QuantumGraph.unit(arity)
        elif op == "bottom":
            out = QuantumGraph.zero(arity)
        elif op == "eq":
            out = QuantumGraph.single(Graph(1, (), {a[0]: 0, a[1]: 0}, arity))
        elif op == "edge":
            if a[0] == a[1]:
                out = QuantumGraph.zero(arity)
            else:
                out = QuantumGraph.single(Graph(2, [(0, 1)], {a[0]: 0, a[1]: 1}, arity))
        elif op == "not":
            out = poly(rec(a[0]), {0}, {1})
        elif op == "and":
            out = rec(a[0])
            for x in a[1:]:
                out = mul(out, rec(x))
        elif op == "or":
            s = rec(a[0])
            for x in a[1:]:
                s = check(s + rec(x))
            vs = values(g, lambda mo, env: sum(mo.ev(x, env) for x in a))
            out = poly(s, {v for v in vs if v}, {v for v in vs if not v})
        else:
            t, x, body = a
            point = QuantumGraph.single(Graph(1, (), {x: 0}, arity))
            counted = mul(rec(body), point).remove_label(x)
            vs = values(g, lambda mo, env: mo.count(body, x, env))
            out = poly(counted, {v for v in vs if v >= t}, {v for v in vs if v < t})
        memo[g] = out
        return out

    return rec(f)


# ---------------------------------------------------------------- formula families


def _atoms(vs: Sequence[int]) -> list[Formula]:
    out = []
    for i in vs:
        for j in vs:
            if i < j:
                out += [Eq(i, j), Edge(i, j)]
    return out


def layered_formulas(k: int, q: int, n: int, free: Iterable[int] = (), guarded: bool = False,
                     width: int = 1) -> Iterator[Formula]:
    """Formulas with free variables among ``free`` by increasing rank, thresholds up to n.

    Quantifier bodies are conjunctions of up to ``width`` literals of the
    previous layer (width 2 at the atomic layer); exact counts appear as
    literals too.
    """
    free = tuple(sorted(set(free)))

    @lru_cache(maxsize=None)
    def forms(fv: tuple[int, ...], r: int) -> tuple[Formula, ...]:
        out = list(_atoms(fv))
        if r == 0:
            return tuple(out)
        seen = set(out)
        out += [x for x in forms(fv, r - 1) if x not in seen]
        seen = set(out)
        for x in range(1, k + 1):
            inner = tuple(sorted(set(fv) | {x}))
            partners = [y for y in fv if y != x] if guarded else [None]
            for body in bodies(inner, r - 1):
                # a body without x is vacuous unless it is Top, which counts vertices
                if x not in body.free and body is not Top and not guarded:
                    continue
                for y in partners:
                    b = body if y is None else And(Edge(y, x), body)
                    for t in range(1, n + 1):
                        for h in (CountExists(t, x, b), ExistsExactly(t, x, b)):
                            if h not in seen and set(h.free) <= set(fv):
                                seen.add(h)
                                out.append(h)
        return tuple(out)

    @lru_cache(maxsize=None)
    def bodies(fv: tuple[int, ...], r: int) -> tuple[Formula, ...]:
        lits = []
        for x in forms(fv, r):
            lits += [x, Not(x)]
        out = [Top] + lits
        wd = 2 if r == 0 else width
        if wd >= 2:
            for i in range(len(lits)):
                for j in range(i + 1, len(lits)):
                    if lits[j] is not Not(lits[i]) and lits[i] is not Not(lits[j]):
                        out.append(And(lits[i], lits[j]))
        return tuple(out)

    emitted = set()
    for r in range(q + 1):
        for x in forms(free, r):
            if x not in emitted and x.qr == r:
                emitted.add(x)
                yield x
                yield Not(x)


def battery(k: int, q: int, n: int, free: Iterable[int] = (), guarded: bool = False, width: int = 1) -> list[Formula]:
    return list(layered_formulas(k, q, n, free, guarded, width))


def random_formula(rng: random.Random, k: int, q: int, size: int = 4, max_t: int = 3,
                   free: Sequence[int] | None = None) -> Formula:
    """Random formula in the k-variable rank-q fragment; ``size`` bounds the connective count.

    With ``free`` given, atoms only use those variables and ones bound above them.
    """
    vars_ = list(range(1, k + 1))
    open_ = frozenset(vars_ if free is None else free)

    def gen(r: int, s: int, scope: frozenset) -> Formula:
        choice = rng.random()
        if not scope and r > 0:
            choice = 1.0
        if s <= 0 or choice < 0.25 or not scope and r == 0:
            if not scope:
                return Top if rng.random() < 0.5 else Bottom
            pool = sorted(scope)
            i, j = rng.choice(pool), rng.choice(pool)
            return Eq(i, j) if rng.random() < 0.35 else Edge(i, j)
        if choice < 0.45:
            return Not(gen(r, s - 1, scope))
        if choice < 0.65 or r == 0:
            op = Or if rng.random() < 0.5 else And
            return op(gen(r, s // 2, scope), gen(r, s // 2, scope))
        x = rng.choice(vars_)
        return CountExists(rng.randint(1, max_t), x, gen(r - 1, s - 1, scope | {x}))

    return gen(q, size, open_)


# ---------------------------------------------------------------- distinguishing graphs


@dataclass
class Distinction:
    status: str  # "distinguished", "equivalent" or "inconclusive"
    graph: Graph | None = None
    sentence: Formula | None = None
    counts: tuple[int, int] | None = None


class _Refiner:
    """Counting types of partial assignments, shared between graphs so ids are comparable.

    The rank-r type of an assignment fixes its atomic type and, for every
    variable (and guard partner when guarded), the multiset of rank r-1
    types reached by reassigning that variable.
    """

    def __init__(self, k: int, guarded: bool = False):
        self.k = k
        self.guarded = guarded
        self.ids: dict = {}
        self.desc: list = []
        self._memo: dict = {}
        self._delta: dict = {}

    def type_of(self, g: Graph, env: tuple, r: int) -> int:
        key = (g, env, r)
        got = self._memo.get(key)
        if got is not None:
            return got
        assigned = [i for i in range(self.k) if env[i] is not None]
        atomic = tuple((i + 1, j + 1, env[i] == env[j], g.has_edge(env[i], env[j]))
                       for i in assigned for j in assigned if i < j)
        moves = []
        if r > 0:
            for x in range(self.k):
                guards = [y for y in assigned if y != x] if self.guarded else [None]
                for y in guards:
                    pool = range(g.n) if y is None else g.neighbours(env[y])
                    counts: dict[int, int] = {}
                    for v in pool:
                        e2 = env[:x] + (v,) + env[x + 1:]
                        t = self.type_of(g, e2, r - 1)
                        counts[t] = counts.get(t, 0) + 1
                    moves.append(((x + 1, None if y is None else y + 1), tuple(sorted(counts.items()))))
        desc = (r, tuple(i + 1 for i in assigned), atomic, tuple(moves))
        tid = self.ids.get(desc)
        if tid is None:
            tid = self.ids[desc] = len(self.desc)
            self.desc.append(desc)
        self._memo[key] = tid
        return tid

    def separate(self, s: int, t: int) -> Formula:
        """A formula true under every assignment of type s and false under type t."""
        key = (s, t)
        if key in self._delta:
            return self._delta[key]
        _, _, at_s, mv_s = self.desc[s]
        _, _, at_t, mv_t = self.desc[t]
        out = None
        for a, b in zip(at_s, at_t):
            if a != b:
                i, j = a[0], a[1]
                atom, val = (Eq(i, j), a[2]) if a[2] != b[2] else (Edge(i, j), a[3])
                out = atom if val else Not(atom)
                break
        if out is None:
            for (move, ms), (_, mt) in zip(mv_s, mv_t):
                if ms == mt:
                    continue
                cs, ct = dict(ms), dict(mt)
                everything = sorted(set(cs) | set(ct))
                rho = next(x for x in everything if cs.get(x, 0) != ct.get(x, 0))
                body = And(*(self.separate(rho, o) for o in everything if o != rho))
                x, y = move
                if y is not None:
                    body = And(Edge(y, x), body)
                a, b = cs.get(rho, 0), ct.get(rho, 0)
                out = CountExists(a, x, body) if a > b else Not(CountExists(b, x, body))
                break
        if out is None:
            raise ValueError("types are equal")
        self._delta[key] = out
        return out


def distinguishing_formula(g: Graph, h: Graph, k: int, q: int, guarded: bool = False,
                           free: Sequence[int] = ()) -> Formula | None:
    """Formula of the k-variable rank-q fragment separating g from h, or None if none exists.

    Free variables are read off the labels in ``free``; the result has the
    least possible quantifier rank.
    """
    ref = _Refiner(k, guarded)

    def env_of(x: Graph) -> tuple:
        env = [None] * k
        for l in free:
            if not 1 <= l <= k or l not in x.labels:
                raise ValidationError(f"label {l} must be present and at most k")
            env[l - 1] = x.labels[l]
        return tuple(env)

    eg, eh = env_of(g), env_of(h)
    for r in range(q + 1):
        s, t = ref.type_of(g, eg, r), ref.type_of(h, eh, r)
        if s != t:
            return ref.separate(s, t)
    return None


def distinguishing_sentence(g: Graph, h: Graph, k: int, q: int, guarded: bool = False) -> Formula | None:
    return distinguishing_formula(g, h, k, q, guarded)


def distinguishing_graph(g: Graph, h: Graph, k: int, q: int, max_size: int | None = None,
                         budget: int = 20_000) -> Distinction:
    """A graph of the class for (k, q) with different hom counts into g and h.

    The graph is read off the quantum graph of a separating sentence of least
    rank.  If the expansion exceeds the term budget the answer is
    inconclusive and carries the sentence.
    """
    from .canon import is_isomorphic
    from .decomp import decide_membership
    from .games import ckq_equivalent
    from .hom import QuantumGraph, hom_count

    g, h = g.unlabelled(), h.unlabelled()
    if g.n != h.n:
        k1 = Graph(1)
        return Distinction("distinguished", k1, CountExists(max(g.n, h.n), 1, Top), (g.n, h.n))
    if is_isomorphic(g, h) or ckq_equivalent(g, h, k, q):
        return Distinction("equivalent")
    f = distinguishing_sentence(g, h, k, q)
    if f is None:
        raise AssertionError("pebble game and type refinement disagree")
    # A polynomial in a quantum graph separates g and h only if its argument
    # does, so descend to a quantified subsentence and expand just its count.
    mg, mh = _Model(g.adj, g.n), _Model(h.adj, h.n)
    sub = f
    while sub.op != "geq":
        sub = next(x for x in sub.args if mg.ev(x, {}) != mh.ev(x, {}))
    t, x, body = sub.args
    arity = max(k, max(f.variables))
    try:
        inner = synth_qg(body, g.n, k=k, q=q, budget=budget)
    except CapabilityError:
        return Distinction("inconclusive", sentence=f)
    point = QuantumGraph.single(Graph(1, (), {x: 0}, arity))
    counted = (inner * point).remove_label(x)
    terms = sorted((t for _, t in counted.terms), key=lambda t: (t.n, t.m, repr(t)))
    for t in terms:
        if max_size is not None and t.n > max_size:
            continue
        a, b = hom_count(t, g), hom_count(t, h)
        if a != b:
            plain = t.unlabelled()
            ok, _ = decide_membership(plain, k, q, limit=max(plain.n, 9))
            if not ok:
                raise AssertionError("synthesised term lies outside the class")
            return Distinction("distinguished", plain, f, (a, b))
    return Distinction("inconclusive", sentence=f)

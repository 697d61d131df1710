"""Exact homomorphism counting and the quantum-graph algebra."""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Mapping

import numpy as np

from .canon import canonical_key
from .errors import ValidationError
from .graph import Graph, bits, components_of_mask, glue, induced_subgraph, remove_label, set_label


class PreconditionError(ValidationError):
    pass


# ---------------------------------------------------------------- counting


def _order(fadj: list[int], comp: list[int], fixed: set[int]) -> list[int]:
    """Backtracking order: most constrained first, then by degree."""
    order: list[int] = []
    placed = set(fixed)
    left = set(comp)
    while left:
        v = max(left, key=lambda x: (sum(1 for u in bits(fadj[x]) if u in placed), fadj[x].bit_count(), -x))
        order.append(v)
        placed.add(v)
        left.discard(v)
    return order


def _count_backtrack(fadj: list[int], comp: list[int], image: dict[int, int], gadj: tuple[int, ...], full: int) -> int:
    order = _order(fadj, comp, set(image))
    pos = {v: i for i, v in enumerate(order)}
    # vertices without later neighbours are counted in bulk at the end
    free = [v for v in order if all(pos.get(u, -1) < pos[v] for u in bits(fadj[v]))]
    free_set = set(free)
    core = [v for v in order if v not in free_set]
    seq = core + free
    base = []
    prev = []
    for v in seq:
        m = full
        for u in bits(fadj[v]):
            if u in image:
                m &= gadj[image[u]]
        base.append(m)
        prev.append([seq.index(u) for u in bits(fadj[v]) if u not in image and seq.index(u) < seq.index(v)])
    nc = len(core)
    assign = [0] * len(seq)

    def rec(i: int) -> int:
        if i == nc:
            total = 1
            for j in range(nc, len(seq)):
                m = base[j]
                for p in prev[j]:
                    m &= gadj[assign[p]]
                c = m.bit_count()
                if not c:
                    return 0
                total *= c
            return total
        m = base[i]
        for p in prev[i]:
            m &= gadj[assign[p]]
        total = 0
        while m:
            low = m & -m
            assign[i] = low.bit_length() - 1
            total += rec(i + 1)
            m ^= low
        return total

    return rec(0)


def _elim_width(fadj: list[int], comp: list[int]) -> tuple[list[int], int]:
    nb = {v: {u for u in bits(fadj[v]) if u in comp} for v in comp}
    order = []
    width = 0
    while nb:
        v = min(nb, key=lambda x: (len(nb[x]), x))
        ns = nb.pop(v)
        width = max(width, len(ns))
        for a in ns:
            nb[a] |= ns - {a}
            nb[a].discard(v)
        order.append(v)
    return order, width


def _count_dp(fadj: list[int], comp: list[int], image: dict[int, int], g: Graph, order: list[int]) -> int:
    n = g.n
    big = n ** len(comp) >= 2 ** 62
    dt = object if big else np.int64
    a = np.zeros((n, n), dtype=dt)
    for u, v in g.edges:
        a[u, v] = 1
        a[v, u] = 1
    factors: list[tuple[tuple[int, ...], np.ndarray]] = []
    cs = set(comp)
    for v in comp:
        vec = np.ones(n, dtype=dt)
        for u in bits(fadj[v]):
            if u in image:
                vec = vec * a[image[u]]
        factors.append(((v,), vec))
        for u in bits(fadj[v]):
            if u in cs and u > v:
                factors.append(((v, u), a.copy()))

    def expand(scope: tuple[int, ...], arr: np.ndarray, target: tuple[int, ...]) -> np.ndarray:
        perm = sorted(range(len(scope)), key=lambda i: target.index(scope[i]))
        arr = np.transpose(arr, perm)
        present = [scope[i] for i in perm]
        shape = [n if x in present else 1 for x in target]
        return arr.reshape(shape)

    for v in order:
        touching = [f for f in factors if v in f[0]]
        factors = [f for f in factors if v not in f[0]]
        scope = tuple(sorted({x for s, _ in touching for x in s}))
        prod = None
        for s, arr in touching:
            e = expand(s, arr, scope)
            prod = e if prod is None else prod * e
        prod = np.broadcast_to(prod, tuple(n for _ in scope))
        out = prod.sum(axis=scope.index(v))
        rest = tuple(x for x in scope if x != v)
        factors.append((rest, np.asarray(out)))
    total = 1
    for s, arr in factors:
        total *= int(arr) if not s else int(arr.sum())
    return total


def _check_labels(f: Graph, g: Graph) -> dict[int, int] | None:
    image: dict[int, int] = {}
    for l, v in f.labels.items():
        if l not in g.labels:
            raise PreconditionError(f"label {l} of the pattern is not assigned in the target")
        w = g.labels[l]
        if image.setdefault(v, w) != w:
            return None
    return image


def hom_count(f: Graph, g: Graph) -> int:
    """Number of edge- and label-preserving maps V(f) -> V(g)."""
    image = _check_labels(f, g)
    if image is None:
        return 0
    fadj = list(f.adj)
    gadj = g.adj
    for u, v in f.edges:
        if u in image and v in image and not gadj[image[u]] >> image[v] & 1:
            return 0
    rest = ((1 << f.n) - 1) & ~sum(1 << v for v in image)
    # adjacency of f restricted to unfixed vertices, for component splitting
    inner = [x & rest for x in fadj]
    total = 1
    full = (1 << g.n) - 1
    maxdeg = max((x.bit_count() for x in gadj), default=0)
    for cm in components_of_mask(inner, rest):
        comp = bits(cm)
        if len(comp) > 2 and g.n > 0:
            order, width = _elim_width(fadj, comp)
            # rough operation counts; numpy work is far cheaper per step
            dp_cost = len(comp) * g.n ** (width + 1)
            bt_cost = g.n * max(maxdeg, 1) ** (len(comp) - 2)
            if dp_cost <= 30_000_000 and dp_cost < 50 * bt_cost:
                c = _count_dp(fadj, comp, image, g, order)
                total *= c
                if not total:
                    return 0
                continue
        c = _count_backtrack(fadj, comp, image, gadj, full)
        total *= c
        if not total:
            return 0
    return total


def hom_profile(f: Graph, g: Graph, label: int) -> list[int]:
    """Entry v is hom(f, g(label -> v))."""
    return [hom_count(f, set_label(g, label, v)) for v in range(g.n)]


def hom_count_structured(f: Graph, witness, g: Graph) -> int:
    """Count homomorphisms by dynamic programming over a construction tree.

    Tables are indexed by the images of the labels present at each node.
    """
    from .decomp import ConstructionTree, verify

    if not isinstance(witness, ConstructionTree):
        raise ValidationError("expected a construction tree")
    rep = verify(f, witness)
    if not rep.ok:
        raise ValidationError(f"invalid witness: {rep.reason}")
    for l in f.labels:
        if l not in g.labels:
            raise PreconditionError(f"label {l} of the pattern is not assigned in the target")
    n = g.n
    dt = object

    def table(node) -> tuple[tuple[int, ...], np.ndarray]:
        labs = tuple(sorted(node.labels))
        if node.kind == "leaf":
            arr = np.zeros((n,) * len(labs), dtype=dt)
            byv: dict[int, list[int]] = {}
            for i, l in enumerate(labs):
                byv.setdefault(node.labels[l], []).append(i)
            for asg in iproduct(range(n), repeat=len(labs)):
                ok = all(len({asg[i] for i in idx}) == 1 for idx in byv.values())
                if ok:
                    for u, v in node.edges:
                        if not g.has_edge(asg[byv[u][0]], asg[byv[v][0]]):
                            ok = False
                            break
                arr[asg] = 1 if ok else 0
            return labs, arr
        if node.kind == "eliminate":
            cl, carr = table(node.children[0])
            return labs, carr.sum(axis=cl.index(node.label))
        out = None
        for ch in node.children:
            cl, carr = table(ch)
            perm = sorted(range(len(cl)), key=lambda i: labs.index(cl[i]))
            carr = np.transpose(carr, perm)
            shape = [n if l in cl else 1 for l in labs]
            carr = carr.reshape(shape)
            out = carr if out is None else out * carr
        return labs, np.broadcast_to(out, (n,) * len(labs))

    labs, arr = table(witness.root)
    if n == 0:
        return int(np.asarray(arr).sum()) if labs == () else 0
    idx = tuple(g.labels[l] for l in labs)
    return int(arr[idx]) if labs else int(arr)


# ---------------------------------------------------------------- quantum graphs

_KEY_CACHE: dict[Graph, tuple] = {}


def term_key(g: Graph) -> tuple:
    k = _KEY_CACHE.get(g)
    if k is None:
        if len(_KEY_CACHE) > 200_000:
            _KEY_CACHE.clear()
        k = canonical_key(g)
        _KEY_CACHE[g] = k
    return k


class QuantumGraph:
    """Finite formal linear combination of labelled graphs with rational coefficients.

    Isomorphic terms are merged; zero coefficients are dropped.
    """

    __slots__ = ("arity", "_terms")

    def __init__(self, terms: Iterable[tuple[Fraction | int, Graph]] = (), arity: int | None = None):
        self._terms: dict[tuple, list] = {}
        terms = list(terms)
        if arity is None:
            arity = max((g.arity for _, g in terms), default=0)
        self.arity = arity
        for c, g in terms:
            self._add(g, Fraction(c))

    def _add(self, g: Graph, c: Fraction) -> None:
        if c == 0:
            return
        if g.arity != self.arity:
            g = g.with_arity(max(self.arity, g.arity)) if g.arity <= self.arity else g
            if g.arity != self.arity:
                raise ValidationError(f"arity mismatch: {g.arity} vs {self.arity}")
        key = term_key(g)
        slot = self._terms.get(key)
        if slot is None:
            self._terms[key] = [g, c]
        else:
            slot[1] += c
            if slot[1] == 0:
                del self._terms[key]

    @classmethod
    def single(cls, g: Graph, c: Fraction | int = 1) -> "QuantumGraph":
        return cls([(c, g)], g.arity)

    @classmethod
    def unit(cls, arity: int) -> "QuantumGraph":
        return cls([(1, Graph(0, arity=arity))], arity)

    @classmethod
    def zero(cls, arity: int) -> "QuantumGraph":
        return cls([], arity)

    @property
    def terms(self) -> list[tuple[Fraction, Graph]]:
        return [(c, g) for g, c in self._terms.values()]

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self.terms)

    def _check(self, other: "QuantumGraph") -> None:
        if self.arity != other.arity:
            raise ValidationError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "QuantumGraph") -> "QuantumGraph":
        self._check(other)
        out = QuantumGraph(arity=self.arity)
        for c, g in self.terms + other.terms:
            out._add(g, c)
        return out

    def __sub__(self, other: "QuantumGraph") -> "QuantumGraph":
        return self + other.scale(-1)

    def scale(self, c: Fraction | int) -> "QuantumGraph":
        out = QuantumGraph(arity=self.arity)
        c = Fraction(c)
        if c:
            for d, g in self.terms:
                out._add(g, d * c)
        return out

    def __mul__(self, other: "QuantumGraph") -> "QuantumGraph":
        self._check(other)
        out = QuantumGraph(arity=self.arity)
        for c1, g1 in self.terms:
            for c2, g2 in other.terms:
                g, loop = _glue_cached(g1, g2)
                if not loop:
                    out._add(g, c1 * c2)
        return out

    def map_graphs(self, fn) -> "QuantumGraph":
        out = QuantumGraph(arity=self.arity)
        for c, g in self.terms:
            out._add(fn(g), c)
        return out

    def remove_label(self, label: int) -> "QuantumGraph":
        return self.map_graphs(lambda g: remove_label(g, label))

    def eval(self, g: Graph) -> Fraction:
        return qg_eval(self, g)

    def to_json(self) -> dict:
        from .graph import to_json

        rows = sorted(self.terms, key=lambda t: term_key(t[1]))
        return {"arity": self.arity, "terms": [{"num": c.numerator, "den": c.denominator, "graph": to_json(g)} for c, g in rows]}

    @classmethod
    def from_json(cls, d: Mapping) -> "QuantumGraph":
        from .graph import from_json

        terms = [(Fraction(t["num"], t.get("den", 1)), from_json(t["graph"])) for t in d.get("terms", [])]
        return cls(terms, d.get("arity"))


_GLUE_CACHE: dict[tuple[Graph, Graph], tuple[Graph, bool]] = {}


def _glue_cached(a: Graph, b: Graph) -> tuple[Graph, bool]:
    key = (a, b)
    r = _GLUE_CACHE.get(key)
    if r is None:
        if len(_GLUE_CACHE) > 200_000:
            _GLUE_CACHE.clear()
        r = glue(a, b)
        _GLUE_CACHE[key] = r
    return r


def qg_add(a: QuantumGraph, b: QuantumGraph) -> QuantumGraph:
    return a + b


def qg_scale(a: QuantumGraph, c) -> QuantumGraph:
    return a.scale(c)


def qg_product(a: QuantumGraph, b: QuantumGraph) -> QuantumGraph:
    return a * b


def _pieces(f: Graph) -> list[Graph]:
    """Split f at its labelled vertices into independently countable pieces."""
    lab = f.labelled_vertices()
    lmask = sum(1 << v for v in lab)
    rest = ((1 << f.n) - 1) & ~lmask
    inner = [x & rest for x in f.adj]
    out = []
    core = [(u, v) for u, v in f.edges if u in lab and v in lab]
    if core or len(lab) > 0:
        out.append(induced_subgraph(f, lab)[0])
    for cm in components_of_mask(inner, rest):
        att = 0
        for v in bits(cm):
            att |= f.adj[v] & lmask
        out.append(induced_subgraph(f, bits(cm | att))[0])
    return out


_HOM_CACHE: dict[tuple, int] = {}


def hom_cached(f: Graph, g: Graph) -> int:
    """hom_count with memoisation over the pieces of f between its labelled vertices."""
    total = 1
    for p in _pieces(f):
        gl = {l: g.labels[l] for l in p.labels if l in g.labels}
        key = (term_key(p), g.n, g.edges, tuple(sorted(gl.items())))
        c = _HOM_CACHE.get(key)
        if c is None:
            if len(_HOM_CACHE) > 500_000:
                _HOM_CACHE.clear()
            c = hom_count(p, g)
            _HOM_CACHE[key] = c
        total *= c
        if not total:
            return 0
    return total


def qg_eval(a: QuantumGraph, g: Graph) -> Fraction:
    """Σ c_i hom(F_i, g), exactly."""
    total = Fraction(0)
    for c, f in a.terms:
        h = hom_cached(f, g)
        if h:
            total += c * h
    return total


def _lagrange(splus: list[Fraction], sminus: list[Fraction]) -> list[Fraction]:
    """Coefficients (constant first) of the polynomial that is 1 on splus, 0 on sminus."""
    pts = splus + sminus
    coeffs = [Fraction(0)] * len(pts)
    for s in splus:
        poly = [Fraction(1)]
        denom = Fraction(1)
        for r in pts:
            if r == s:
                continue
            poly = [Fraction(0)] + poly
            for i in range(len(poly) - 1):
                poly[i] -= r * poly[i + 1]
            denom *= s - r
        for i, c in enumerate(poly):
            coeffs[i] += c / denom
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def polynomial(a: QuantumGraph, coeffs: list[Fraction]) -> QuantumGraph:
    """Σ coeffs[j] a^j with powers taken by glue products; a^0 is the empty graph."""
    out = QuantumGraph.unit(a.arity).scale(coeffs[0]) if coeffs else QuantumGraph.zero(a.arity)
    power = QuantumGraph.unit(a.arity)
    for c in coeffs[1:]:
        power = power * a
        if c:
            out = out + power.scale(c)
    return out


def interpolate(a: QuantumGraph, splus: Iterable, sminus: Iterable) -> QuantumGraph:
    """A polynomial in ``a`` evaluating to 1 where ``a`` takes a value in splus and 0 in sminus."""
    sp = sorted({Fraction(x) for x in splus})
    sm = sorted({Fraction(x) for x in sminus})
    if set(sp) & set(sm):
        raise ValidationError("the two interpolation sets overlap")
    if not sp:
        return QuantumGraph.zero(a.arity)
    return polynomial(a, _lagrange(sp, sm))

"""CFI graphs over a base graph and the witness pairs built from them."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ValidationError, check_bound
from .graph import Graph, connected_components, disjoint_union, clique, is_connected

Edge = tuple[int, int]


@dataclass(frozen=True)
class CfiGraph:
    base: Graph
    U: frozenset
    graph: Graph
    vertices: tuple  # (base vertex, frozenset of incident base edges)
    rho: tuple       # cfi vertex -> base vertex

    def index(self, v: int, s: Iterable[Edge]) -> int:
        return self.vertices.index((v, frozenset(s)))


def _incident(g: Graph, v: int) -> list[Edge]:
    return [(min(v, u), max(v, u)) for u in g.neighbours(v)]


def cfi_build(g: Graph, U: Iterable[int] = ()) -> CfiGraph:
    """Vertices (v, S) with S a set of edges at v whose size has the parity of [v in U]."""
    U = frozenset(U)
    for u in U:
        if not 0 <= u < g.n:
            raise ValidationError(f"{u} is not a vertex of the base graph")
    verts = []
    for v in range(g.n):
        inc = _incident(g, v)
        par = 1 if v in U else 0
        for r in range(par, len(inc) + 1, 2):
            for s in combinations(inc, r):
                verts.append((v, frozenset(s)))
    by_base: dict[int, list[int]] = {}
    for i, (v, _) in enumerate(verts):
        by_base.setdefault(v, []).append(i)
    edges = []
    for a, b in g.edges:
        e = (a, b)
        for i in by_base.get(a, []):
            for j in by_base.get(b, []):
                if (e in verts[i][1]) == (e in verts[j][1]):
                    edges.append((i, j))
    return CfiGraph(g.unlabelled(), U, Graph(len(verts), edges), tuple(verts), tuple(v for v, _ in verts))


def cfi_pair(g: Graph) -> tuple[Graph, Graph]:
    """The even graph (U empty) and the odd graph (U = {0}) over a connected base."""
    if g.n == 0 or not is_connected(g):
        raise ValidationError("the base graph must be connected and nonempty")
    return cfi_build(g).graph, cfi_build(g, {0}).graph


def _check_path(g: Graph, u: int, v: int, p: Sequence[int]) -> None:
    if not p:
        if u != v:
            raise ValidationError("an empty path only joins a vertex to itself")
        return
    if p[0] != u or p[-1] != v:
        raise ValidationError("path must start at u and end at v")
    if len(set(p)) != len(p):
        raise ValidationError("path repeats a vertex")
    for a, b in zip(p, p[1:]):
        if not g.has_edge(a, b):
            raise ValidationError(f"{a}-{b} is not an edge of the base graph")


def base_path(g: Graph, u: int, v: int) -> list[int]:
    """A shortest u-v path in the base graph."""
    for x in (u, v):
        if not 0 <= x < g.n:
            raise ValidationError(f"{x} is not a vertex of the base graph")
    prev = {u: None}
    dq = deque([u])
    while dq:
        x = dq.popleft()
        for y in g.neighbours(x):
            if y not in prev:
                prev[y] = x
                dq.append(y)
    if v not in prev:
        raise ValidationError("u and v lie in different components")
    out = [v]
    while out[-1] != u:
        out.append(prev[out[-1]])
    return out[::-1]


def twist_iso(g: Graph, u: int, v: int, p: Sequence[int], U: Iterable[int] | None = None) -> dict[int, int]:
    """Isomorphism from G_U to G_{U xor {u, v}} that flips the path edges in every fibre along ``p``.

    With the default U = {u} the target is G_{v}.  Fibres off the path are
    mapped identically.
    """
    _check_path(g, u, v, p)
    U = frozenset({u} if U is None else U)
    src = cfi_build(g, U)
    dst = cfi_build(g, U ^ ({u, v} if u != v else set()))
    pedges = {(min(a, b), max(a, b)) for a, b in zip(p, p[1:])}
    pos = {x: i for i, x in enumerate(dst.vertices)}
    out = {}
    for i, (w, s) in enumerate(src.vertices):
        flip = frozenset(e for e in pedges if w in e)
        out[i] = pos[(w, s ^ flip)]
    return out


def is_isomorphism(a: Graph, b: Graph, m: dict[int, int]) -> bool:
    if a.n != b.n or len(m) != a.n or sorted(m.values()) != list(range(b.n)):
        return False
    if a.m != b.m:
        return False
    return all(b.has_edge(m[x], m[y]) for x, y in a.edges)


def iso_check(a: Graph, b: Graph, limit: int = 16) -> bool:
    """Exact isomorphism test through canonical forms."""
    from .canon import is_isomorphic

    check_bound(max(a.n, b.n), limit, "iso_check")
    return is_isomorphic(a, b)


@dataclass
class Refusal(ValidationError):
    """The pattern already has small treedepth; carries the witnessing cover."""

    message: str
    witness: object

    def __str__(self) -> str:
        return self.message


def witness_pair(f: Graph, q: int) -> tuple[Graph, Graph]:
    """Graphs told apart by hom(f, .) yet equivalent in counting logic with q variables and rank q."""
    from .decomp import decide_membership, search_pfc
    from .graph import induced_subgraph
    from .hom import hom_count

    f = f.unlabelled()
    inside, w = decide_membership(f, None, q)
    if inside:
        raise Refusal(f"pattern has treedepth at most {q}", w)
    first = None
    for comp in connected_components(f):
        sub, _ = induced_subgraph(f, comp)
        if search_pfc(sub, None, q) is None:
            first = sub
            break
    n = 1
    while hom_count(f, clique(n)) == 0:
        n += 1
    g0, g1 = cfi_pair(first)
    kn = clique(n)
    return disjoint_union(g0, kn), disjoint_union(g1, kn)

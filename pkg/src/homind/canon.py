"""Canonical forms by individualisation-refinement.

Vertices carry colours (label sets for labelled graphs).  The search is
exhaustive over the refinement tree except for branches pruned by
automorphisms already found, so the result is exact at every size; the size
bound on :func:`canonical_form` only guards running time.
"""

from __future__ import annotations

from typing import Hashable, Sequence

from .errors import check_bound
from .graph import Graph, bits


def _refine(adj: Sequence[int], cells: list[list[int]]) -> list[list[int]]:
    """Coarsest equitable refinement of an ordered partition.

    Cells split in place, pieces ordered by neighbour count, so the result
    is an isomorphism invariant of the input ordered partition.
    """
    cells = [c for c in cells]
    queue = [sum(1 << v for v in c) for c in cells]
    while queue:
        w = queue.pop(0)
        i = 0
        while i < len(cells):
            c = cells[i]
            if len(c) == 1:
                i += 1
                continue
            counts = {}
            for v in c:
                counts.setdefault((adj[v] & w).bit_count(), []).append(v)
            if len(counts) == 1:
                i += 1
                continue
            pieces = [counts[k] for k in sorted(counts)]
            cells[i:i + 1] = pieces
            for p in pieces:
                queue.append(sum(1 << v for v in p))
            i += len(pieces)
    return cells


def _reduce_twins(adj: list[int], colours: list) -> tuple[list[int], list, list[list[int]]]:
    """Collapse classes of equally coloured twins into single coloured vertices.

    Returns the reduced adjacency, colours and for every reduced vertex the
    original vertices it stands for.
    """
    members = [[v] for v in range(len(adj))]
    while True:
        changed = False
        for closed in (False, True):
            groups: dict = {}
            for v in range(len(adj)):
                key = (colours[v], adj[v] | (1 << v) if closed else adj[v])
                groups.setdefault(key, []).append(v)
            merge = [g for g in groups.values() if len(g) > 1]
            if not merge:
                continue
            changed = True
            drop = set()
            newcol = list(colours)
            for g in merge:
                newcol[g[0]] = (1, int(closed), len(g), colours[g[0]])
                for v in g[1:]:
                    members[g[0]].extend(members[v])
                    drop.add(v)
            keep = [v for v in range(len(adj)) if v not in drop]
            pos = {v: i for i, v in enumerate(keep)}
            new_adj = []
            for v in keep:
                m = 0
                for u in bits(adj[v]):
                    if u in pos:
                        m |= 1 << pos[u]
                new_adj.append(m)
            adj = new_adj
            colours = [newcol[v] for v in keep]
            members = [members[v] for v in keep]
        if not changed:
            return adj, colours, members


class _Search:
    def __init__(self, adj: Sequence[int], cells: list[list[int]]):
        self.adj = adj
        self.n = len(adj)
        self.best = None
        self.best_perm = None
        self.first = None
        self.first_perm = None
        self.autos: list[list[int]] = []
        self.root_cells = cells

    def cert(self, order: list[int]) -> tuple:
        pos = [0] * self.n
        for i, v in enumerate(order):
            pos[v] = i
        rows = []
        for v in order:
            m = 0
            for u in bits(self.adj[v]):
                m |= 1 << pos[u]
            rows.append(m)
        return tuple(rows)

    def leaf(self, cells: list[list[int]]) -> None:
        order = [c[0] for c in cells]
        c = self.cert(order)
        if self.first is None:
            self.first, self.first_perm = c, order
            self.best, self.best_perm = c, order
            return
        for ref, ref_perm in ((self.first, self.first_perm), (self.best, self.best_perm)):
            if c == ref:
                sigma = [0] * self.n
                for a, b in zip(ref_perm, order):
                    sigma[a] = b
                self.autos.append(sigma)
                return
        if c < self.best:
            self.best, self.best_perm = c, order

    def orbit_root(self, fixed: list[int]) -> list[int]:
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for s in self.autos:
            if all(s[f] == f for f in fixed):
                for x in range(self.n):
                    a, b = find(x), find(s[x])
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        return [find(x) for x in range(self.n)]

    def run(self, cells: list[list[int]], fixed: list[int]) -> None:
        cells = _refine(self.adj, cells)
        target = next((i for i, c in enumerate(cells) if len(c) > 1), None)
        if target is None:
            self.leaf(cells)
            return
        tried: list[int] = []
        for v in sorted(cells[target]):
            if tried:
                roots = self.orbit_root(fixed)
                if any(roots[v] == roots[u] for u in tried):
                    continue
            rest = [u for u in cells[target] if u != v]
            child = cells[:target] + [[v], rest] + cells[target + 1:]
            self.run(child, fixed + [v])
            tried.append(v)


def canonical_labelling(adj: Sequence[int], colours: Sequence[Hashable]) -> tuple[tuple, list[int]]:
    """Canonical key and canonical order (position -> vertex) of a coloured graph.

    Colours must be mutually comparable.
    """
    adj = list(adj)
    colours = list(colours)
    radj, rcol, members = _reduce_twins(adj, colours)
    groups: dict = {}
    for v, c in enumerate(rcol):
        groups.setdefault(c, []).append(v)
    keys = sorted(groups)
    cells = [groups[c] for c in keys]
    s = _Search(radj, cells)
    if radj:
        s.run(cells, [])
        order = s.best_perm
        rows = s.best
    else:
        order, rows = [], ()
    col_seq = tuple(rcol[v] for v in order)
    full = [u for v in order for u in members[v]]
    return (len(adj), col_seq, rows), full


def _colours(g: Graph) -> list:
    lab: dict[int, list[int]] = {}
    for l, v in g.labels.items():
        lab.setdefault(v, []).append(l)
    return [(0, tuple(lab.get(v, ()))) for v in range(g.n)]


def canonical_key(g: Graph) -> tuple:
    """Exact isomorphism-class key of a labelled graph (labels must match)."""
    key, _ = canonical_labelling(g.adj, _colours(g))
    return (g.arity,) + key


def canonical_graph(g: Graph) -> Graph:
    """Isomorphic copy of ``g`` in canonical vertex order."""
    _, order = canonical_labelling(g.adj, _colours(g))
    pos = {v: i for i, v in enumerate(order)}
    return Graph(g.n, [(pos[u], pos[v]) for u, v in g.edges], {l: pos[v] for l, v in g.labels.items()}, g.arity)


def canonical_form(g: Graph, limit: int = 9) -> str:
    """Canonical text encoding; equal strings iff the graphs are isomorphic."""
    from .graph import encode_text

    check_bound(g.n, limit, "canonical_form")
    return encode_text(canonical_graph(g))


def is_isomorphic(a: Graph, b: Graph) -> bool:
    if (a.n, a.m, sorted(a.degree(v) for v in range(a.n))) != (b.n, b.m, sorted(b.degree(v) for v in range(b.n))):
        return False
    return canonical_key(a) == canonical_key(b)


_GRAPHS: dict[int, list[Graph]] = {0: [Graph(0)]}


def graphs_on(n: int) -> list[Graph]:
    """All graphs on exactly ``n`` vertices up to isomorphism, canonically ordered.

    Built by adding a vertex with every possible neighbourhood to the graphs on
    ``n - 1`` vertices and keeping one representative per canonical key.
    """
    if n in _GRAPHS:
        return _GRAPHS[n]
    seen: dict[tuple, Graph] = {}
    for g in graphs_on(n - 1):
        for nb in range(1 << (n - 1)):
            h = Graph(n, list(g.edges) + [(u, n - 1) for u in bits(nb)])
            key = canonical_key(h)
            if key not in seen:
                seen[key] = canonical_graph(h)
    out = [seen[k] for k in sorted(seen, key=lambda k: (len(seen[k].edges), k))]
    _GRAPHS[n] = out
    return out


def graphs_up_to(n: int) -> list[Graph]:
    return [g for i in range(n + 1) for g in graphs_on(i)]

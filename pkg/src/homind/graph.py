"""Simple and labelled graphs, their operations, generators and codecs.

Vertices are the integers ``0..n-1``.  Labels are positive integers; a label
occurs on at most one vertex, while one vertex may carry several labels.
Every value is immutable.
"""

from __future__ import annotations

import json
import re
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import LabelRangeError, LoopError, ParseError, ValidationError

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """A simple graph with an optional partial labelling.

    ``labels`` maps label -> vertex.  ``arity`` is the label arity k; it
    defaults to the largest label in use.
    """

    __slots__ = ("n", "edges", "labels", "arity", "_adj", "_hash")

    def __init__(
        self,
        n: int,
        edges: Iterable[Sequence[int]] = (),
        labels: Mapping[int, int] | None = None,
        arity: int | None = None,
    ):
        if n < 0:
            raise ValidationError("vertex count must be non-negative")
        es = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise LoopError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge {u}-{v} has an endpoint outside 0..{n - 1}")
            es.add(_norm_edge(u, v))
        lab = {}
        for l, v in (labels or {}).items():
            l, v = int(l), int(v)
            if l < 1:
                raise LabelRangeError(f"label {l} is not positive")
            if not 0 <= v < n:
                raise LabelRangeError(f"label {l} points at vertex {v} outside 0..{n - 1}")
            lab[l] = v
        top = max(lab, default=0)
        if arity is None:
            arity = top
        if top > arity:
            raise LabelRangeError(f"label {top} exceeds arity {arity}")
        self.n = n
        self.edges = frozenset(es)
        self.labels = dict(sorted(lab.items()))
        self.arity = arity
        self._adj = None
        self._hash = None

    # basic structure

    @property
    def adj(self) -> tuple[int, ...]:
        """Neighbourhoods as bitmasks."""
        if self._adj is None:
            a = [0] * self.n
            for u, v in self.edges:
                a[u] |= 1 << v
                a[v] |= 1 << u
            self._adj = tuple(a)
        return self._adj

    def neighbours(self, v: int) -> list[int]:
        return bits(self.adj[v])

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    @property
    def m(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def labels_at(self, v: int) -> tuple[int, ...]:
        return tuple(l for l, w in self.labels.items() if w == v)

    def labelled_vertices(self) -> set[int]:
        return set(self.labels.values())

    def is_fully_labelled(self) -> bool:
        return len(set(self.labels.values())) == self.n

    def unlabelled(self) -> "Graph":
        return Graph(self.n, self.edges)

    def with_arity(self, k: int) -> "Graph":
        return Graph(self.n, self.edges, self.labels, k)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n, self.edges, self.labels, self.arity) == (other.n, other.edges, other.labels, other.arity)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.edges, tuple(self.labels.items()), self.arity))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph({encode_text(self)!r})"


LabelledGraph = Graph


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


# ---------------------------------------------------------------- operations


def glue(f1: Graph, f2: Graph) -> tuple[Graph, bool]:
    """Glue product plus a flag telling whether a loop had to be suppressed."""
    k = max(f1.arity, f2.arity)
    # vertices of f2 that are identified with a vertex of f1
    rep: dict[int, int] = {}
    for l, v in f2.labels.items():
        if l in f1.labels:
            rep.setdefault(v, set()).add(f1.labels[l])
    # a vertex of f2 carrying several labels can merge several vertices of f1
    parent = list(range(f1.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for targets in rep.values():
        ts = sorted(targets)
        for t in ts[1:]:
            a, b = find(ts[0]), find(t)
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = sorted({find(x) for x in range(f1.n)})
    new_id = {r: i for i, r in enumerate(roots)}
    m1 = [new_id[find(x)] for x in range(f1.n)]
    nxt = len(roots)
    m2 = []
    for x in range(f2.n):
        if x in rep:
            m2.append(m1[next(iter(rep[x]))])
        else:
            m2.append(nxt)
            nxt += 1
    loop = False
    es = set()
    for u, v in f1.edges:
        a, b = m1[u], m1[v]
        if a == b:
            loop = True
        else:
            es.add(_norm_edge(a, b))
    for u, v in f2.edges:
        a, b = m2[u], m2[v]
        if a == b:
            loop = True
        else:
            es.add(_norm_edge(a, b))
    labels = {l: m1[v] for l, v in f1.labels.items()}
    for l, v in f2.labels.items():
        labels.setdefault(l, m2[v])
    return Graph(nxt, es, labels, k), loop


def glue_product(f1: Graph, f2: Graph) -> Graph:
    """Disjoint union with equally labelled vertices identified.

    Loops and parallel edges created by the identification are suppressed.
    """
    return glue(f1, f2)[0]


def set_label(g: Graph, label: int, v: int) -> Graph:
    if label < 1 or (g.arity and label > g.arity):
        raise LabelRangeError(f"label {label} outside 1..{g.arity}")
    if not 0 <= v < g.n:
        raise LabelRangeError(f"vertex {v} outside 0..{g.n - 1}")
    lab = dict(g.labels)
    lab[label] = v
    return Graph(g.n, g.edges, lab, max(g.arity, label))


def remove_label(g: Graph, label: int) -> Graph:
    if label < 1 or (g.arity and label > g.arity):
        raise LabelRangeError(f"label {label} outside 1..{g.arity}")
    lab = dict(g.labels)
    lab.pop(label, None)
    return Graph(g.n, g.edges, lab, g.arity)


def relabel(g: Graph, action: str, label: int, v: int | None = None) -> Graph:
    if action == "set":
        if v is None:
            raise ValidationError("set needs a vertex")
        return set_label(g, label, v)
    if action == "remove":
        return remove_label(g, label)
    raise ValidationError(f"unknown relabel action {action!r}")


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> tuple[Graph, list[int]]:
    """Induced subgraph on ``vertices`` and the list new -> old.

    Labels on kept vertices survive.
    """
    keep = sorted(set(vertices))
    pos = {v: i for i, v in enumerate(keep)}
    es = [(pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos]
    lab = {l: pos[v] for l, v in g.labels.items() if v in pos}
    return Graph(len(keep), es, lab, g.arity), keep


def delete_vertex(g: Graph, v: int) -> Graph:
    return induced_subgraph(g, [u for u in range(g.n) if u != v])[0]


def delete_edge(g: Graph, e: Sequence[int]) -> Graph:
    ed = _norm_edge(e[0], e[1])
    if ed not in g.edges:
        raise ValidationError(f"{ed} is not an edge")
    return Graph(g.n, g.edges - {ed}, g.labels, g.arity)


def contract_edge(g: Graph, e: Sequence[int]) -> Graph:
    """Merge the endpoints of ``e``; the merged vertex keeps all their labels."""
    u, v = _norm_edge(e[0], e[1])
    if (u, v) not in g.edges:
        raise ValidationError(f"{(u, v)} is not an edge")
    new = []
    for x in range(g.n):
        if x == v:
            new.append(u if u < v else u - 1)
        else:
            new.append(x if x < v else x - 1)
    es = set()
    for a, b in g.edges:
        a, b = new[a], new[b]
        if a != b:
            es.add(_norm_edge(a, b))
    lab = {l: new[x] for l, x in g.labels.items()}
    return Graph(g.n - 1, es, lab, g.arity)


def disjoint_union(g: Graph, h: Graph) -> Graph:
    clash = set(g.labels) & set(h.labels)
    if clash:
        raise ValidationError(f"labels {sorted(clash)} occur on both sides")
    es = list(g.edges) + [(u + g.n, v + g.n) for u, v in h.edges]
    lab = dict(g.labels)
    lab.update({l: v + g.n for l, v in h.labels.items()})
    return Graph(g.n + h.n, es, lab, max(g.arity, h.arity))


def compose(g: Graph, h: Graph, mode: str = "disjoint_union") -> Graph:
    if mode != "disjoint_union":
        raise ValidationError(f"unknown compose mode {mode!r}")
    return disjoint_union(g, h)


def components_of_mask(adj: Sequence[int], mask: int) -> list[int]:
    """Connected components of the subgraph induced by ``mask`` (as bitmasks).

    Ordered by smallest vertex.
    """
    out = []
    rest = mask
    while rest:
        low = rest & -rest
        comp = low
        frontier = low
        while frontier:
            nb = 0
            f = frontier
            while f:
                b = f & -f
                nb |= adj[b.bit_length() - 1]
                f ^= b
            frontier = nb & rest & ~comp
            comp |= frontier
        out.append(comp)
        rest &= ~comp
    return out


def connected_components(g: Graph) -> list[list[int]]:
    return [bits(c) for c in components_of_mask(g.adj, (1 << g.n) - 1)]


def is_connected(g: Graph) -> bool:
    return g.n <= 1 or len(components_of_mask(g.adj, (1 << g.n) - 1)) == 1


# ---------------------------------------------------------------- generators


def _positive(x: int, what: str) -> None:
    if x < 1:
        raise ValidationError(f"{what} must be at least 1")


def empty_graph(n: int) -> Graph:
    return Graph(n)


def path(n: int) -> Graph:
    _positive(n, "path length")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValidationError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def clique(n: int) -> Graph:
    _positive(n, "clique size")
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def grid_vertex(h: int, l: int, i: int, j: int) -> int:
    """Index of the cell in row ``i`` and column ``j`` (both 1-based)."""
    if not (1 <= i <= h and 1 <= j <= l):
        raise ValidationError(f"cell ({i},{j}) outside the {h}x{l} grid")
    return (i - 1) * l + (j - 1)


def grid_cell(l: int, v: int) -> tuple[int, int]:
    return v // l + 1, v % l + 1


def grid(h: int, l: int) -> Graph:
    """The h x l grid: cells adjacent when they differ by one in exactly one coordinate."""
    _positive(h, "grid height")
    _positive(l, "grid length")
    es = []
    for i in range(1, h + 1):
        for j in range(1, l + 1):
            v = grid_vertex(h, l, i, j)
            if j < l:
                es.append((v, grid_vertex(h, l, i, j + 1)))
            if i < h:
                es.append((v, grid_vertex(h, l, i + 1, j)))
    return Graph(h * l, es)


def generate(kind: str, *params: int) -> Graph:
    table = {"path": path, "cycle": cycle, "clique": clique, "grid": grid, "empty": empty_graph, "star": star}
    if kind not in table:
        raise ValidationError(f"unknown generator {kind!r}")
    return table[kind](*params)


# ---------------------------------------------------------------- codecs

_FIELD = re.compile(r"\s*([a-z]+)\s*=\s*")


def encode_text(g: Graph) -> str:
    parts = [f"n={g.n}"]
    if g.edges:
        parts.append("e=" + ",".join(f"{u}-{v}" for u, v in g.sorted_edges()))
    if g.labels:
        parts.append("l=" + ",".join(f"{l}:{v}" for l, v in g.labels.items()))
    if g.arity > max(g.labels, default=0):
        parts.append(f"k={g.arity}")
    return "; ".join(parts)


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def decode_text(text: str) -> Graph:
    """Parse ``n=<int>; e=<u-v>,...; l=<label>:<vertex>,...``."""
    fields: dict[str, tuple[str, int]] = {}
    pos = 0
    length = len(text)
    while pos < length:
        if text[pos:].strip() == "":
            break
        m = _FIELD.match(text, pos)
        if not m:
            raise ParseError("expected a field such as 'n='", *_line_col(text, pos))
        key = m.group(1)
        if key not in ("n", "e", "l", "k"):
            raise ParseError(f"unknown field {key!r}", *_line_col(text, m.start(1)))
        if key in fields:
            raise ParseError(f"duplicate field {key!r}", *_line_col(text, m.start(1)))
        start = m.end()
        end = text.find(";", start)
        if end < 0:
            end = length
        fields[key] = (text[start:end], start)
        pos = end + 1
    if "n" not in fields:
        raise ParseError("missing field 'n'", 1, 1)

    def integer(tok: str, at: int) -> int:
        s = tok.strip()
        if not re.fullmatch(r"\d+", s):
            off = len(tok) - len(tok.lstrip())
            raise ParseError(f"expected a non-negative integer, got {s!r}", *_line_col(text, at + off))
        return int(s)

    def items(body: str, at: int) -> Iterator[tuple[str, int]]:
        if body.strip() == "":
            return
        off = 0
        for chunk in body.split(","):
            yield chunk, at + off
            off += len(chunk) + 1

    n = integer(*fields["n"])
    edges = []
    if "e" in fields:
        for chunk, at in items(*fields["e"]):
            if "-" not in chunk:
                raise ParseError(f"edge {chunk.strip()!r} is not of the form u-v", *_line_col(text, at))
            a, b = chunk.split("-", 1)
            edges.append((integer(a, at), integer(b, at + len(a) + 1)))
    labels = {}
    if "l" in fields:
        for chunk, at in items(*fields["l"]):
            if ":" not in chunk:
                raise ParseError(f"label {chunk.strip()!r} is not of the form label:vertex", *_line_col(text, at))
            a, b = chunk.split(":", 1)
            lab = integer(a, at)
            if lab in labels:
                raise ParseError(f"label {lab} assigned twice", *_line_col(text, at))
            labels[lab] = integer(b, at + len(a) + 1)
    arity = integer(*fields["k"]) if "k" in fields else None
    return Graph(n, edges, labels, arity)


def to_json(g: Graph) -> dict:
    d = {"n": g.n, "edges": [list(e) for e in g.sorted_edges()], "labels": {str(l): v for l, v in g.labels.items()}}
    if g.arity > max(g.labels, default=0):
        d["arity"] = g.arity
    return d


def from_json(d: Mapping) -> Graph:
    if not isinstance(d, Mapping) or "n" not in d:
        raise ValidationError("graph JSON needs an object with field 'n'")
    return Graph(int(d["n"]), d.get("edges", []), {int(k): int(v) for k, v in d.get("labels", {}).items()}, d.get("arity"))


def codec(direction: str, payload):
    """``decode`` accepts the text format or a JSON object/string; ``encode`` emits text."""
    if direction == "encode":
        return encode_text(payload)
    if direction == "decode":
        if isinstance(payload, Mapping):
            return from_json(payload)
        s = payload.strip()
        if s.startswith("{"):
            try:
                return from_json(json.loads(s))
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return decode_text(payload)
    raise ValidationError(f"unknown codec direction {direction!r}")


def read_graph(path_: str) -> Graph:
    with open(path_) as fh:
        return codec("decode", fh.read())

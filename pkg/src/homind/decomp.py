"""Witnesses for bounded width and depth: tree decompositions, pebble forest
covers and construction trees.

All three carry enough structure to be verified on their own; conversions
between them preserve width (respectively pebble count and label arity) and
depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError, check_bound
from .graph import Graph, bits, components_of_mask, mask_of

INF = float("inf")


@dataclass
class Report:
    ok: bool
    reason: str = ""
    measures: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------- tree decompositions


class TreeDecomposition:
    """A tree on nodes ``0..m-1`` given by parent pointers, with vertex bags."""

    __slots__ = ("parent", "bags", "root")

    def __init__(self, parent: Sequence[int | None], bags: Sequence[Iterable[int]], root: int | None = None):
        self.parent = tuple(parent)
        self.bags = tuple(frozenset(b) for b in bags)
        if len(self.parent) != len(self.bags):
            raise ValidationError("parent and bag lists differ in length")
        roots = [i for i, p in enumerate(self.parent) if p is None]
        if root is None:
            if len(roots) != 1:
                raise ValidationError("a tree decomposition needs exactly one parentless node")
            root = roots[0]
        self.root = root

    def __len__(self) -> int:
        return len(self.bags)

    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in self.bags]
        for i, p in enumerate(self.parent):
            if p is not None:
                ch[p].append(i)
        return ch

    def neighbours(self) -> list[list[int]]:
        nb: list[list[int]] = [[] for _ in self.bags]
        for i, p in enumerate(self.parent):
            if p is not None:
                nb[i].append(p)
                nb[p].append(i)
        return nb

    def rerooted(self, r: int) -> "TreeDecomposition":
        nb = self.neighbours()
        parent: list[int | None] = [None] * len(self.bags)
        seen = {r}
        stack = [r]
        while stack:
            x = stack.pop()
            for y in nb[x]:
                if y not in seen:
                    seen.add(y)
                    parent[y] = x
                    stack.append(y)
        return TreeDecomposition(parent, self.bags, r)

    def to_json(self) -> dict:
        return {
            "type": "td",
            "root": self.root,
            "nodes": [{"bag": sorted(b), "parent": p} for b, p in zip(self.bags, self.parent)],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "TreeDecomposition":
        nodes = d["nodes"]
        return cls([x.get("parent") for x in nodes], [x["bag"] for x in nodes], d.get("root"))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TreeDecomposition) and (self.parent, self.bags, self.root) == (other.parent, other.bags, other.root)

    def __repr__(self) -> str:
        return f"TreeDecomposition(nodes={len(self)}, root={self.root})"


def _tree_ok(parent: Sequence[int | None], root: int) -> str:
    n = len(parent)
    if not 0 <= root < n:
        return "root is not a node"
    if parent[root] is not None:
        return "root has a parent"
    for i, p in enumerate(parent):
        if i != root and p is None:
            return f"node {i} has no parent but is not the root"
        if p is not None and not 0 <= p < n:
            return f"node {i} has parent {p} outside the tree"
    for i in range(n):
        seen = set()
        x = i
        while x is not None:
            if x in seen:
                return f"parent pointers of node {i} form a cycle"
            seen.add(x)
            x = parent[x]
    return ""


def rooted_depth(td: TreeDecomposition, root: int | None = None) -> int:
    """Largest number of vertices in the bags along a path from ``root`` down."""
    t = td if root is None or root == td.root else td.rerooted(root)
    ch = t.children()
    best = 0
    stack = [(t.root, t.bags[t.root])]
    while stack:
        x, acc = stack.pop()
        best = max(best, len(acc))
        for c in ch[x]:
            stack.append((c, acc | t.bags[c]))
    return best


def td_depth(td: TreeDecomposition) -> tuple[int, int]:
    """Depth (minimum over roots) and the smallest root attaining it."""
    if not td.bags:
        return 0, 0
    best = None
    arg = 0
    for r in range(len(td.bags)):
        d = rooted_depth(td, r)
        if best is None or d < best:
            best, arg = d, r
    return best, arg


def td_width(td: TreeDecomposition) -> int:
    return max((len(b) for b in td.bags), default=0) - 1


def _verify_td(g: Graph, td: TreeDecomposition, k, q) -> Report:
    if not td.bags:
        return Report(False, "decomposition has no nodes")
    msg = _tree_ok(td.parent, td.root)
    if msg:
        return Report(False, msg)
    for i, b in enumerate(td.bags):
        for v in b:
            if not 0 <= v < g.n:
                return Report(False, f"bag {i} contains {v}, not a vertex")
    covered = frozenset().union(*td.bags)
    missing = set(range(g.n)) - covered
    if missing:
        return Report(False, f"vertex {min(missing)} is in no bag")
    for u, v in sorted(g.edges):
        if not any(u in b and v in b for b in td.bags):
            return Report(False, f"edge {u}-{v} is in no bag")
    nb = td.neighbours()
    for v in range(g.n):
        nodes = {i for i, b in enumerate(td.bags) if v in b}
        start = min(nodes)
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in nb[x]:
                if y in nodes and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != nodes:
            return Report(False, f"nodes containing vertex {v} are not connected")
    width = td_width(td)
    depth, root = td_depth(td)
    m = {"width": width, "depth": depth, "root": root, "max_bag": width + 1}
    if k is not None and width > k - 1:
        return Report(False, f"width {width} exceeds {k - 1}", m)
    if q is not None and depth > q:
        return Report(False, f"depth {depth} exceeds {q}", m)
    return Report(True, "", m)


def is_nice(td: TreeDecomposition) -> bool:
    ch = td.children()
    if td.bags[td.root]:
        return False
    for i, b in enumerate(td.bags):
        c = ch[i]
        if not c:
            if b:
                return False
        elif len(c) == 1:
            s = td.bags[c[0]]
            if not ((len(b) == len(s) + 1 and s < b) or (len(s) == len(b) + 1 and b < s)):
                return False
        elif len(c) == 2:
            if not (td.bags[c[0]] == b == td.bags[c[1]]):
                return False
        else:
            return False
    return True


def make_nice(td: TreeDecomposition) -> TreeDecomposition:
    """Nice form rooted at a depth-optimal root: introduce, forget and binary join nodes only,
    empty bags at the root and at every leaf."""
    _, r = td_depth(td)
    t = td.rerooted(r)
    ch = t.children()
    parent: list[int | None] = []
    bags: list[frozenset] = []

    def new(bag: frozenset, par: int | None) -> int:
        parent.append(par)
        bags.append(bag)
        return len(bags) - 1

    # build top-down: every call hangs the subtree of x below node ``top`` whose bag is bag(x)
    root_bag = t.bags[t.root]
    top = new(frozenset(), None)
    cur = top
    acc = frozenset()
    for v in sorted(root_bag, reverse=True):
        acc = acc | {v}
        cur = new(acc, cur)
    # cur has bag root_bag now; forgets seen from below, introduces from above
    stack = [(t.root, cur)]
    while stack:
        x, node = stack.pop()
        kids = ch[x]
        b = t.bags[x]
        if not kids:
            # introduce chain down to an empty leaf
            cur, acc = node, b
            for v in sorted(b):
                acc = acc - {v}
                cur = new(acc, cur)
            continue
        # binary join tree with len(kids) branches of bag b
        slots = [node]
        while len(slots) < len(kids):
            s = slots.pop(0)
            slots.append(new(b, s))
            slots.append(new(b, s))
        for c, slot in zip(kids, slots):
            cb = t.bags[c]
            cur, acc = slot, b
            # going down: undo introductions of b \ cb, then forgets of cb \ b
            for v in sorted(b - cb):
                acc = acc - {v}
                cur = new(acc, cur)
            for v in sorted(cb - b):
                acc = acc | {v}
                cur = new(acc, cur)
            stack.append((c, cur))
    return TreeDecomposition(parent, bags, top)


# ---------------------------------------------------------------- pebble forest covers


class PebbleForestCover:
    """A rooted forest over the vertices together with a pebbling function."""

    __slots__ = ("parent", "pebbles")

    def __init__(self, parent: Mapping[int, int | None], pebbles: Mapping[int, int]):
        self.parent = {int(v): (None if p is None else int(p)) for v, p in parent.items()}
        self.pebbles = {int(v): int(p) for v, p in pebbles.items()}

    def ancestors(self, v: int) -> list[int]:
        """Proper ancestors of ``v``, nearest first."""
        out = []
        x = self.parent.get(v)
        while x is not None:
            out.append(x)
            x = self.parent.get(x)
        return out

    def height(self) -> int:
        return max((len(self.ancestors(v)) + 1 for v in self.parent), default=0)

    def precedes(self, u: int, v: int) -> bool:
        """u is a proper ancestor of v."""
        return u in self.ancestors(v)

    def to_json(self) -> dict:
        return {
            "type": "pfc",
            "parent": {str(v): p for v, p in sorted(self.parent.items())},
            "pebbles": {str(v): p for v, p in sorted(self.pebbles.items())},
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "PebbleForestCover":
        return cls({int(v): p for v, p in d["parent"].items()}, {int(v): p for v, p in d["pebbles"].items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PebbleForestCover) and (self.parent, self.pebbles) == (other.parent, other.pebbles)

    def __repr__(self) -> str:
        return f"PebbleForestCover(vertices={len(self.parent)}, height={self.height()})"


def _verify_pfc(g: Graph, w: PebbleForestCover, k, q) -> Report:
    if set(w.parent) != set(range(g.n)):
        return Report(False, "forest vertices differ from the graph's vertices")
    if set(w.pebbles) != set(range(g.n)):
        return Report(False, "pebbling is not defined on every vertex")
    for v, p in w.parent.items():
        if p is not None and p not in w.parent:
            return Report(False, f"parent {p} of {v} is not a vertex")
    for v in w.parent:
        seen = {v}
        x = w.parent[v]
        while x is not None:
            if x in seen:
                return Report(False, f"parent pointers through {v} form a cycle")
            seen.add(x)
            x = w.parent[x]
    for v, p in w.pebbles.items():
        if p < 1:
            return Report(False, f"pebble {p} of vertex {v} is not positive")
    anc = {v: w.ancestors(v) for v in w.parent}
    for a, b in sorted(g.edges):
        if a in anc[b]:
            u, v = a, b
        elif b in anc[a]:
            u, v = b, a
        else:
            return Report(False, f"edge {a}-{b} joins incomparable vertices")
        # every w with u < w <= v must carry another pebble than u
        chain = [v] + anc[v][: anc[v].index(u)]
        for x in chain:
            if w.pebbles[x] == w.pebbles[u]:
                return Report(False, f"edge {u}-{v}: pebble {w.pebbles[u]} of {u} repeats at {x}")
    pebbles = max(w.pebbles.values(), default=0)
    height = max((len(a) + 1 for a in anc.values()), default=0)
    m = {"depth": height, "pebbles": pebbles}
    if k is not None and pebbles > k:
        return Report(False, f"uses pebble {pebbles} beyond {k}", m)
    if q is not None and height > q:
        return Report(False, f"height {height} exceeds {q}", m)
    return Report(True, "", m)


# ---------------------------------------------------------------- construction trees


class CTNode:
    """Node of a construction tree embedded in its root graph.

    Vertices are vertices of the root graph.  Leaves list their vertices,
    edges and labels; inner nodes derive theirs from the children.
    """

    __slots__ = ("kind", "label", "children", "_vertices", "_edges", "_labels")

    def __init__(self, kind: str, *, label: int | None = None, children: Sequence["CTNode"] = (),
                 vertices: Iterable[int] = (), edges: Iterable[Sequence[int]] = (), labels: Mapping[int, int] | None = None):
        if kind not in ("leaf", "eliminate", "product"):
            raise ValidationError(f"unknown node kind {kind!r}")
        self.kind = kind
        self.label = label
        self.children = tuple(children)
        if kind == "leaf":
            self._vertices = frozenset(vertices)
            self._edges = frozenset(tuple(sorted(e)) for e in edges)
            self._labels = dict(sorted((labels or {}).items()))
        else:
            self._vertices = self._edges = self._labels = None

    @classmethod
    def leaf(cls, vertices: Iterable[int], edges: Iterable[Sequence[int]], labels: Mapping[int, int]) -> "CTNode":
        return cls("leaf", vertices=vertices, edges=edges, labels=labels)

    @classmethod
    def eliminate(cls, label: int, child: "CTNode") -> "CTNode":
        return cls("eliminate", label=label, children=(child,))

    @classmethod
    def product(cls, children: Sequence["CTNode"]) -> "CTNode":
        return cls("product", children=children)

    @property
    def vertices(self) -> frozenset:
        if self._vertices is None:
            self._vertices = frozenset().union(*(c.vertices for c in self.children))
        return self._vertices

    @property
    def edges(self) -> frozenset:
        if self._edges is None:
            self._edges = frozenset().union(*(c.edges for c in self.children))
        return self._edges

    @property
    def labels(self) -> dict[int, int]:
        if self._labels is None:
            if self.kind == "eliminate":
                lab = dict(self.children[0].labels)
                lab.pop(self.label, None)
            else:
                lab = {}
                for c in self.children:
                    lab.update(c.labels)
            self._labels = dict(sorted(lab.items()))
        return self._labels

    def walk(self):
        stack = [self]
        while stack:
            x = stack.pop()
            yield x
            stack.extend(reversed(x.children))

    def to_json(self) -> dict:
        if self.kind == "leaf":
            return {"kind": "leaf", "vertices": sorted(self._vertices), "edges": [list(e) for e in sorted(self._edges)],
                    "labels": {str(l): v for l, v in self._labels.items()}}
        if self.kind == "eliminate":
            return {"kind": "eliminate", "label": self.label, "child": self.children[0].to_json()}
        return {"kind": "product", "children": [c.to_json() for c in self.children]}

    @classmethod
    def from_json(cls, d: Mapping) -> "CTNode":
        kind = d.get("kind")
        if kind == "leaf":
            return cls.leaf(d.get("vertices", []), d.get("edges", []), {int(l): int(v) for l, v in d.get("labels", {}).items()})
        if kind == "eliminate":
            return cls.eliminate(int(d["label"]), cls.from_json(d["child"]))
        if kind == "product":
            return cls.product([cls.from_json(c) for c in d["children"]])
        raise ValidationError(f"unknown node kind {kind!r}")


class ConstructionTree:
    __slots__ = ("root", "guarded")

    def __init__(self, root: CTNode, guarded: bool = False):
        self.root = root
        self.guarded = guarded

    def elimination_depth(self) -> int:
        def rec(x: CTNode) -> int:
            below = max((rec(c) for c in x.children), default=0)
            return below + (x.kind == "eliminate")

        return rec(self.root)

    def arity(self) -> int:
        return max((l for x in self.root.walk() for l in x.labels), default=0)

    def to_json(self) -> dict:
        return {"type": "ctree", "guarded": self.guarded, "root": self.root.to_json()}

    @classmethod
    def from_json(cls, d: Mapping) -> "ConstructionTree":
        return cls(CTNode.from_json(d["root"]), bool(d.get("guarded", False)))

    def __repr__(self) -> str:
        return f"ConstructionTree(elimination_depth={self.elimination_depth()}, arity={self.arity()})"


def _verify_ctree(g: Graph, w: ConstructionTree, k, q, guarded: bool) -> Report:
    for x in w.root.walk():
        if x.kind == "leaf":
            vs = x.vertices
            for v in vs:
                if not 0 <= v < g.n:
                    return Report(False, f"leaf vertex {v} is not a vertex of the graph")
            for e in x.edges:
                if e[0] == e[1] or e[0] not in vs or e[1] not in vs:
                    return Report(False, f"leaf edge {e} is not an edge between leaf vertices")
            for l, v in x.labels.items():
                if l < 1:
                    return Report(False, f"label {l} is not positive")
                if v not in vs:
                    return Report(False, f"leaf label {l} points outside the leaf")
            if set(x.labels.values()) != set(vs):
                return Report(False, "leaf is not fully labelled")
        elif x.kind == "eliminate":
            if len(x.children) != 1:
                return Report(False, "elimination node needs exactly one child")
            c = x.children[0]
            if x.label not in c.labels:
                return Report(False, f"eliminated label {x.label} is absent in the child")
            if guarded:
                v = c.labels[x.label]
                lab = set(c.labels.values())
                if not any((min(v, u), max(v, u)) in c.edges for u in lab if u != v):
                    return Report(False, f"label {x.label} is removed from a vertex without labelled neighbour")
        else:
            if len(x.children) < 2:
                return Report(False, "product node needs at least two children")
            # gluing must identify exactly the copies of the same vertex
            occ = [(i, v) for i, c in enumerate(x.children) for v in c.vertices]
            parent = {o: o for o in occ}

            def find(o):
                while parent[o] != o:
                    parent[o] = parent[parent[o]]
                    o = parent[o]
                return o

            where: dict[int, tuple[int, int]] = {}
            for i, c in enumerate(x.children):
                for l, v in c.labels.items():
                    if l in where:
                        j, u = where[l]
                        if u != v:
                            return Report(False, f"label {l} sits on different vertices in two children")
                        a, b = find((i, v)), find((j, u))
                        if a != b:
                            parent[a] = b
                    else:
                        where[l] = (i, v)
            groups: dict[int, set] = {}
            for o in occ:
                groups.setdefault(o[1], set()).add(find(o))
            for v, reps in groups.items():
                if len(reps) > 1:
                    return Report(False, f"vertex {v} occurs in several children without a shared label")
    r = w.root
    if r.vertices != frozenset(range(g.n)):
        return Report(False, "root vertices differ from the graph")
    if r.edges != g.edges:
        return Report(False, "root edges differ from the graph")
    if r.labels != g.labels:
        return Report(False, "root labels differ from the graph")
    depth = w.elimination_depth()
    arity = w.arity()
    m = {"elimination_depth": depth, "arity": arity, "depth": depth}
    if k is not None and arity > k:
        return Report(False, f"uses label {arity} beyond {k}", m)
    if q is not None and depth > q:
        return Report(False, f"elimination depth {depth} exceeds {q}", m)
    return Report(True, "", m)


Witness = TreeDecomposition | PebbleForestCover | ConstructionTree


def witness_from_json(d: Mapping) -> Witness:
    t = d.get("type")
    if t == "td":
        return TreeDecomposition.from_json(d)
    if t == "pfc":
        return PebbleForestCover.from_json(d)
    if t == "ctree":
        return ConstructionTree.from_json(d)
    raise ValidationError(f"unknown witness type {t!r}")


def verify(g: Graph, w: Witness, k: int | None = None, q: int | None = None, guarded: bool | None = None) -> Report:
    """Check every defining condition of ``w`` for ``g`` and the bounds k, q."""
    try:
        if isinstance(w, TreeDecomposition):
            return _verify_td(g, w, k, q)
        if isinstance(w, PebbleForestCover):
            return _verify_pfc(g, w, k, q)
        if isinstance(w, ConstructionTree):
            return _verify_ctree(g, w, k, q, w.guarded if guarded is None else guarded)
    except (KeyError, TypeError, ValueError) as exc:
        return Report(False, f"malformed witness: {exc}")
    return Report(False, f"unknown witness type {type(w).__name__}")


def measure(w: Witness) -> dict:
    if isinstance(w, TreeDecomposition):
        msg = _tree_ok(w.parent, w.root) if w.bags else "decomposition has no nodes"
        if msg:
            raise ValidationError(msg)
        d, r = td_depth(w)
        return {"width": td_width(w), "depth": d, "root": r}
    if isinstance(w, PebbleForestCover):
        return {"depth": w.height(), "pebbles": max(w.pebbles.values(), default=0)}
    if isinstance(w, ConstructionTree):
        return {"elimination_depth": w.elimination_depth(), "arity": w.arity()}
    raise ValidationError(f"unknown witness type {type(w).__name__}")


# ---------------------------------------------------------------- conversions


def ctree_to_td(w: ConstructionTree) -> TreeDecomposition:
    """Bags are the labelled vertices of every node."""
    nodes: list[CTNode] = []
    parent: list[int | None] = []
    stack: list[tuple[CTNode, int | None]] = [(w.root, None)]
    while stack:
        x, p = stack.pop()
        nodes.append(x)
        parent.append(p)
        i = len(nodes) - 1
        for c in reversed(x.children):
            stack.append((c, i))
    return TreeDecomposition(parent, [set(x.labels.values()) for x in nodes], 0)


def td_to_ctree(g: Graph, td: TreeDecomposition) -> ConstructionTree:
    """Construction tree of an unlabelled graph from a tree decomposition.

    Introduce nodes become products with a fresh fully labelled leaf, forget
    nodes become eliminations; labels are assigned greedily from the root.
    """
    nice = make_nice(td)
    ch = nice.children()
    colour: dict[int, int] = {}
    # top-down colouring at forget nodes
    order = [nice.root]
    for x in order:
        order.extend(ch[x])
    for x in order:
        for c in ch[x]:
            extra = nice.bags[c] - nice.bags[x]
            if len(extra) == 1 and len(ch[x]) == 1:
                (v,) = extra
                used = {colour[u] for u in nice.bags[x]}
                colour[v] = min(i for i in range(1, len(used) + 2) if i not in used)

    def leaf_of(bag: frozenset) -> CTNode:
        es = [(u, v) for u, v in g.edges if u in bag and v in bag]
        return CTNode.leaf(bag, es, {colour[v]: v for v in bag})

    def build(x: int) -> CTNode | None:
        kids = ch[x]
        b = nice.bags[x]
        if not kids:
            return None if not b else leaf_of(b)
        if len(kids) == 2:
            parts = [p for p in (build(kids[0]), build(kids[1])) if p is not None]
        else:
            c = kids[0]
            cb = nice.bags[c]
            sub = build(c)
            if len(cb) > len(b):
                (v,) = cb - b
                return CTNode.eliminate(colour[v], sub if sub is not None else leaf_of(cb))
            parts = [p for p in (sub, leaf_of(b)) if p is not None]
        if not parts:
            return None
        if len(parts) == 1:
            return parts[0]
        return CTNode.product(parts)

    root = build(nice.root)
    if root is None:
        root = CTNode.leaf((), (), {})
    return ConstructionTree(root)


def td_to_pfc(g: Graph, td: TreeDecomposition) -> PebbleForestCover:
    nice = make_nice(td)
    ch = nice.children()
    top: dict[int, int] = {}
    order = [nice.root]
    for x in order:
        order.extend(ch[x])
    depth_of = {nice.root: 0}
    for x in order:
        for c in ch[x]:
            depth_of[c] = depth_of[x] + 1
    for x in order:
        for v in nice.bags[x]:
            top.setdefault(v, x)
    owner = {t: v for v, t in top.items()}
    parent: dict[int, int | None] = {}
    pebbles: dict[int, int] = {}
    node_parent = nice.parent
    for x in order:
        if x not in owner:
            continue
        v = owner[x]
        y = node_parent[x]
        while y is not None and y not in owner:
            y = node_parent[y]
        parent[v] = None if y is None else owner[y]
        used = {pebbles[u] for u in nice.bags[x] if u != v}
        pebbles[v] = min(i for i in range(1, len(used) + 2) if i not in used)
    return PebbleForestCover(parent, pebbles)


def pfc_to_td(g: Graph, w: PebbleForestCover) -> TreeDecomposition:
    """New empty root above the forest; each vertex gets its pebble-visible ancestors."""
    vs = sorted(w.parent)
    idx = {v: i for i, v in enumerate(vs)}
    root = len(vs)
    parent: list[int | None] = []
    bags = []
    for v in vs:
        p = w.parent[v]
        parent.append(root if p is None else idx[p])
        chain = [v] + w.ancestors(v)
        bag = set()
        for pos, u in enumerate(chain):
            if all(w.pebbles[x] != w.pebbles[u] for x in chain[:pos]):
                bag.add(u)
        bags.append(bag)
    parent.append(None)
    bags.append(set())
    return TreeDecomposition(parent, bags, root)


def convert(g: Graph, w: Witness, target: str) -> Witness:
    """Convert between witness kinds; width/pebbles/arity and depth are preserved."""
    if target not in ("td", "pfc", "ctree"):
        raise ValidationError(f"unknown target {target!r}")
    rep = verify(g, w)
    if not rep.ok:
        raise ValidationError(f"source witness is invalid: {rep.reason}")
    if isinstance(w, ConstructionTree):
        if target == "ctree":
            return w
        td = ctree_to_td(w)
        return td if target == "td" else td_to_pfc(g, td)
    if isinstance(w, PebbleForestCover):
        if target == "pfc":
            return w
        td = pfc_to_td(g, w)
        return td if target == "td" else td_to_ctree(g, td)
    if target == "td":
        return w
    if g.labels and target == "ctree":
        raise ValidationError("tree decompositions convert to construction trees of unlabelled graphs only")
    return td_to_pfc(g, w) if target == "pfc" else td_to_ctree(g, w)


# ---------------------------------------------------------------- searches

def _nbr(adj: Sequence[int], mask: int) -> int:
    out = 0
    for v in bits(mask):
        out |= adj[v]
    return out & ~mask


def _candidates(adj: Sequence[int], comp: int) -> list[int]:
    """Vertices of ``comp`` up to twins, highest degree first."""
    seen = set()
    out = []
    for v in bits(comp):
        key = (adj[v] & ~(1 << v), adj[v] | (1 << v))
        if key[0] in seen or key[1] in seen:
            continue
        seen.add(key[0])
        seen.add(key[1])
        out.append(v)
    out.sort(key=lambda v: (-(adj[v] & comp).bit_count(), v))
    return out


def _limits(g: Graph, k, q) -> tuple[int, int]:
    n = max(g.n, 1)
    kk = n + 1 if k is None or k == INF else int(k)
    qq = n if q is None or q == INF else int(q)
    return kk, qq


class _PfcSearch:
    """Root a forest cover at one vertex of each component, recursively."""

    def __init__(self, adj: Sequence[int], k: int):
        self.adj = adj
        self.k = k
        self.fail: dict[int, int] = {}
        self.ok: dict[int, int] = {}

    def fits(self, comp: int, budget: int) -> bool:
        if budget <= 0:
            return False
        if self.ok.get(comp, INF) <= budget:
            return True
        if self.fail.get(comp, 0) >= budget:
            return False
        if _nbr(self.adj, comp).bit_count() > self.k - 1:
            self.fail[comp] = 10 ** 9
            return False
        if comp & (comp - 1) == 0:
            self.ok[comp] = 1
            return True
        for v in _candidates(self.adj, comp):
            rest = components_of_mask(self.adj, comp & ~(1 << v))
            rest.sort(key=lambda m: -m.bit_count())
            if all(self.fits(d, budget - 1) for d in rest):
                self.ok[comp] = min(self.ok.get(comp, INF), budget)
                return True
        self.fail[comp] = max(self.fail.get(comp, 0), budget)
        return False

    def build(self, comp: int, budget: int, anc: int | None, pebbles: dict, parent: dict) -> None:
        for v in _candidates(self.adj, comp):
            rest = components_of_mask(self.adj, comp & ~(1 << v))
            if comp & (comp - 1) == 0 or all(self.fits(d, budget - 1) for d in rest):
                parent[v] = anc
                used = {pebbles[u] for u in bits(_nbr(self.adj, comp))}
                pebbles[v] = min(i for i in range(1, self.k + 1) if i not in used)
                for d in rest:
                    self.build(d, budget - 1, v, pebbles, parent)
                return
        raise AssertionError("inconsistent search state")


def search_pfc(g: Graph, k=None, q=None) -> PebbleForestCover | None:
    """A k-pebble forest cover of depth at most q, or None."""
    kk, qq = _limits(g, k, q)
    s = _PfcSearch(g.adj, kk)
    comps = components_of_mask(g.adj, (1 << g.n) - 1)
    if not all(s.fits(c, qq) for c in comps):
        return None
    parent: dict = {}
    pebbles: dict = {}
    for c in comps:
        s.build(c, qq, None, pebbles, parent)
    return PebbleForestCover(parent, pebbles)


class _TdSearch:
    """Bags grow by one vertex per level; a child keeps only the part of its parent's bag it touches."""

    def __init__(self, adj: Sequence[int], k: int):
        self.adj = adj
        self.k = k
        self.memo: dict[tuple[int, int], bool] = {}

    def fits(self, bag: int, comp: int, budget: int) -> bool:
        # bag: vertices already placed and adjacent to comp
        key = (comp, budget)
        if key in self.memo:
            return self.memo[key]
        res = False
        if budget >= 1 and bag.bit_count() + 1 <= self.k:
            for v in _candidates(self.adj, comp):
                nbag = bag | (1 << v)
                rest = components_of_mask(self.adj, comp & ~(1 << v))
                if all(self.fits(nbag & _nbr(self.adj, d), d, budget - 1) for d in rest):
                    res = True
                    break
        self.memo[key] = res
        return res

    def build(self, bag: int, comp: int, budget: int, parent_node: int, parent: list, bags: list) -> None:
        for v in _candidates(self.adj, comp):
            nbag = bag | (1 << v)
            rest = components_of_mask(self.adj, comp & ~(1 << v))
            if all(self.fits(nbag & _nbr(self.adj, d), d, budget - 1) for d in rest):
                parent.append(parent_node)
                bags.append(bits(nbag))
                me = len(bags) - 1
                for d in rest:
                    self.build(nbag & _nbr(self.adj, d), d, budget - 1, me, parent, bags)
                return
        raise AssertionError("inconsistent search state")


def search_td(g: Graph, k=None, q=None) -> TreeDecomposition | None:
    """A tree decomposition of width at most k-1 and depth at most q, or None."""
    kk, qq = _limits(g, k, q)
    s = _TdSearch(g.adj, kk)
    comps = components_of_mask(g.adj, (1 << g.n) - 1)
    if not all(s.fits(0, c, qq) for c in comps):
        return None
    parent: list = [None]
    bags: list = [[]]
    for c in comps:
        s.build(0, c, qq, 0, parent, bags)
    return TreeDecomposition(parent, bags, 0)


class _CtreeSearch:
    """Top-down construction tree search on a labelled graph.

    A state is a component ``comp`` of the graph minus the labelled vertices;
    its neighbours are labelled.  Eliminating a vertex of ``comp`` labels it for
    the subtree below.  In guarded mode the vertex needs a labelled neighbour.
    """

    def __init__(self, g: Graph, k: int, guarded: bool):
        self.g = g
        self.adj = g.adj
        self.k = k
        self.guarded = guarded
        self.ok: dict[int, int] = {}
        self.fail: dict[int, int] = {}

    def moves(self, comp: int) -> list[int]:
        bd = _nbr(self.adj, comp)
        if bd.bit_count() > self.k - 1:
            return []
        cands = _candidates(self.adj, comp)
        if self.guarded:
            cands = [v for v in bits(comp) if self.adj[v] & bd]
            cands.sort(key=lambda v: (-(self.adj[v] & comp).bit_count(), v))
        return cands

    def fits(self, comp: int, budget: int) -> bool:
        if budget <= 0:
            return False
        if self.ok.get(comp, INF) <= budget:
            return True
        if self.fail.get(comp, 0) >= budget:
            return False
        for v in self.moves(comp):
            rest = components_of_mask(self.adj, comp & ~(1 << v))
            rest.sort(key=lambda m: -m.bit_count())
            if all(self.fits(d, budget - 1) for d in rest):
                self.ok[comp] = min(self.ok.get(comp, INF), budget)
                return True
        self.fail[comp] = max(self.fail.get(comp, 0), budget)
        return False

    def build(self, comp: int, budget: int, lab: dict[int, int]) -> CTNode:
        """Node whose graph is comp plus its labelled neighbours (labels from ``lab``)."""
        bd = _nbr(self.adj, comp)
        for v in self.moves(comp):
            rest = components_of_mask(self.adj, comp & ~(1 << v))
            if all(self.fits(d, budget - 1) for d in rest):
                used = {lab[u] for u in bits(bd)}
                new = min(i for i in range(1, self.k + 1) if i not in used)
                inner = dict(lab)
                inner[v] = new
                nb = bits(self.adj[v] & bd)
                parts = [CTNode.leaf([v] + nb, [(v, u) for u in nb], {inner[x]: x for x in [v] + nb})]
                for d in rest:
                    dl = {u: inner[u] for u in bits(_nbr(self.adj, d))}
                    parts.append(self.build(d, budget - 1, dl))
                child = parts[0] if len(parts) == 1 else CTNode.product(parts)
                return CTNode.eliminate(new, child)
        raise AssertionError("inconsistent search state")


def _root_pieces(g: Graph) -> tuple[list[int], dict[int, int]]:
    labelled = mask_of(g.labelled_vertices())
    comps = components_of_mask(g.adj, ((1 << g.n) - 1) & ~labelled)
    first: dict[int, int] = {}
    for l, v in g.labels.items():
        first.setdefault(v, l)
    return comps, first


def search_ctree(g: Graph, k=None, q=None, guarded: bool = False) -> ConstructionTree | None:
    """A k-construction tree of elimination depth at most q for the labelled graph ``g``."""
    kk, qq = _limits(g, k, q)
    if g.labels and max(g.labels) > kk:
        return None
    s = _CtreeSearch(g, kk, guarded)
    comps, first = _root_pieces(g)
    if not all(s.fits(c, qq) for c in comps):
        return None
    parts = []
    lv = sorted(g.labelled_vertices())
    if lv:
        es = [(u, v) for u, v in g.edges if u in first and v in first]
        parts.append(CTNode.leaf(lv, es, g.labels))
    for c in comps:
        lab = {u: first[u] for u in bits(_nbr(g.adj, c))}
        parts.append(s.build(c, qq, lab))
    if not parts:
        root = CTNode.leaf((), (), {})
    elif len(parts) == 1:
        root = parts[0]
    else:
        root = CTNode.product(parts)
    return ConstructionTree(root, guarded)


def min_elimination_depth(g: Graph, k=None, guarded: bool = False) -> int | None:
    """Smallest q with a (guarded) k-construction tree, or None if there is none."""
    kk, _ = _limits(g, k, None)
    if g.labels and max(g.labels) > kk:
        return None
    s = _CtreeSearch(g, kk, guarded)
    comps, _ = _root_pieces(g)
    best = 0
    for c in comps:
        b = 1
        while not s.fits(c, b):
            b += 1
            if b > g.n:
                return None
        best = max(best, b)
    return best


def search_guarded_unlabelled(g: Graph, k=None, q=None) -> tuple[Graph, ConstructionTree] | None:
    """Labelling of ``g`` with one root label per component admitting a guarded tree.

    Labels that stay at the root are never removed, so each component needs
    one; one per component is enough for the classes enumerated here.
    """
    k, q = _limits(g, k, q)
    comps = [bits(c) for c in components_of_mask(g.adj, (1 << g.n) - 1)]
    if len(comps) > k:
        return None
    chosen = {}
    for i, comp in enumerate(comps):
        sub = None
        for v in comp:
            lab = Graph(g.n, g.edges, {1: v}, k)
            from .graph import induced_subgraph

            h, _ = induced_subgraph(lab, comp)
            if search_ctree(h, k, q, guarded=True) is not None:
                sub = v
                break
        if sub is None:
            return None
        chosen[i + 1] = sub
    lab = Graph(g.n, g.edges, chosen, k)
    w = search_ctree(lab, k, q, guarded=True)
    return (lab, w) if w is not None else None


def decide_membership(g: Graph, k=None, q=None, method: str = "search", search: str = "pfc",
                      guarded: bool = False, limit: int | None = None):
    """Whether ``g`` lies in the class for (k, q); ``None`` stands for an unbounded parameter.

    Returns ``(verdict, witness)``; the witness is ``None`` on negative verdicts.
    """
    if method not in ("search", "game"):
        raise ValidationError(f"unknown method {method!r}")
    if limit is None:
        limit = 40 if method == "game" else 9
    check_bound(g.n, limit, "decide_membership")
    if k is not None and k != INF and k < 1 or q is not None and q != INF and q < 0:
        raise ValidationError("k must be at least 1 and q non-negative")
    if g.n == 0:
        return True, TreeDecomposition([None], [[]], 0) if search != "ctree" else ConstructionTree(CTNode.leaf((), (), {}))
    if guarded:
        kk, qq = _limits(g, k, q)
        if g.labels:
            w = search_ctree(g, kk, qq, guarded=True)
            return w is not None, w
        found = search_guarded_unlabelled(g, kk, qq)
        return (True, found[1]) if found else (False, None)
    if method == "game":
        from .games import solve_cr, strategy_to_td

        kk, qq = _limits(g, k, q)
        res = solve_cr(g, kk, qq, monotone=True, limit=limit)
        if res.winner != "cops":
            return False, None
        return True, strategy_to_td(g, res.strategy)
    if search == "pfc":
        w = search_pfc(g, k, q)
    elif search == "td":
        w = search_td(g, k, q)
    elif search == "ctree":
        w = search_ctree(g.unlabelled() if not g.labels else g, k, q)
    else:
        raise ValidationError(f"unknown search {search!r}")
    return w is not None, w


def treedepth(g: Graph) -> int:
    """Minimum height of a forest cover."""
    for q in range(g.n + 1):
        if search_pfc(g, None, q) is not None:
            return q
    return g.n


def treewidth(g: Graph) -> int:
    for k in range(1, g.n + 1):
        if search_pfc(g, k, None) is not None:
            return k - 1
    return -1


def enumerate_class(n: int, k=None, q=None, guarded: bool = False, limit: int = 7) -> list[Graph]:
    """Canonical representatives of all graphs with at most n vertices in the class."""
    from .canon import graphs_up_to

    check_bound(n, limit, "enumerate_class")
    out = []
    for g in graphs_up_to(n):
        ok, _ = decide_membership(g, k, q, guarded=guarded, limit=max(n, 1))
        if ok:
            out.append(g)
    return out

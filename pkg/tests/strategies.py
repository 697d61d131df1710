"""Hypothesis strategies for small graphs."""

from hypothesis import strategies as st

from homind.graph import Graph


@st.composite
def graphs(draw, min_n=0, max_n=5, labels=0, arity=None):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = [e for e in pairs if draw(st.booleans())]
    lab = {}
    if n and labels:
        for l in range(1, labels + 1):
            if draw(st.booleans()):
                lab[l] = draw(st.integers(0, n - 1))
    k = arity if arity is not None else (labels or None)
    return Graph(n, edges, lab, k)


@st.composite
def fully_labelled(draw, k=2):
    """Graph whose labels 1..k sit on vertices covering all of V."""
    n = draw(st.integers(1, k))
    asg = [draw(st.integers(0, n - 1)) for _ in range(k)]
    if set(asg) != set(range(n)):
        asg = [i % n for i in range(k)]
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = [e for e in pairs if draw(st.booleans())]
    return Graph(n, edges, {l + 1: v for l, v in enumerate(asg)}, k)

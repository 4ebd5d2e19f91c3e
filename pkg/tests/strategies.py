"""Shared hypothesis strategies and small oracles."""

import itertools

from hypothesis import strategies as st

from greedy_ocrs.constraints import PartitionConstraint, TransversalConstraint


def matchable_by_assignment(adjacency, elems):
    """Oracle: try every assignment of distinct right vertices."""
    elems = list(elems)
    if not elems:
        return True
    for choice in itertools.product(*(adjacency[u] for u in elems)):
        if len(set(choice)) == len(choice):
            return True
    return False


@st.composite
def bipartite(draw, max_left=6, max_right=5):
    nl = draw(st.integers(1, max_left))
    nr = draw(st.integers(1, max_right))
    adj = tuple(
        tuple(draw(st.sets(st.integers(0, nr - 1), min_size=1, max_size=nr)))
        for _ in range(nl)
    )
    return TransversalConstraint(nl, nr, adj)


@st.composite
def partitions(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return PartitionConstraint(n, tuple(tuple(g) for g in groups.values()))

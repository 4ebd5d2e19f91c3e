"""Deterministic instance generators."""

from __future__ import annotations

import numpy as np

from .constraints import Instance, PartitionConstraint, RankOneConstraint, TransversalConstraint
from .rng import STREAM_INSTANCES, stream


def gen_uniform_rank1(n: int) -> Instance:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Instance(RankOneConstraint(n), (1.0 / n,) * n)


def _simplex(rng: np.random.Generator, n: int, total: float) -> np.ndarray:
    # spacings of n-1 sorted uniforms: uniform on {x >= 0, sum x = 1}
    cuts = np.sort(rng.random(n - 1))
    x = np.diff(np.concatenate(([0.0], cuts, [1.0]))) * total
    return np.clip(x, 0.0, 1.0)


def gen_random_rank1(n: int, seed: int, slack: float = 0.0) -> Instance:
    """x uniform on the face sum(x) = 1 - slack of the scaled simplex."""
    if not 0.0 <= slack <= 1.0:
        raise ValueError("slack must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream(seed, STREAM_INSTANCES)
    return Instance(RankOneConstraint(n), tuple(_simplex(rng, n, 1.0 - slack)))


def gen_random_partition(n: int, parts: int, seed: int, slack: float = 0.0) -> Instance:
    """Balanced random partition; each part's x drawn like :func:`gen_random_rank1`."""
    if not 1 <= parts <= n:
        raise ValueError("need 1 <= parts <= n")
    if not 0.0 <= slack <= 1.0:
        raise ValueError("slack must lie in [0, 1]")
    rng = stream(seed, STREAM_INSTANCES)
    perm = rng.permutation(n)
    groups = [tuple(sorted(int(i) for i in g)) for g in np.array_split(perm, parts)]
    x = np.zeros(n)
    for g in groups:
        x[list(g)] = _simplex(rng, len(g), 1.0 - slack)
    return Instance(PartitionConstraint(n, tuple(groups)), tuple(x))


def gen_random_transversal(n_left: int, n_right: int, min_deg: int, seed: int) -> Instance:
    """Random neighbourhoods of size min_deg..n_right, x uniform then scaled
    down until every right-vertex neighbourhood sums to at most 1."""
    if n_left < 1:
        raise ValueError("n_left must be >= 1")
    if not 1 <= min_deg <= n_right:
        raise ValueError("need 1 <= min_deg <= n_right")
    rng = stream(seed, STREAM_INSTANCES)
    adjacency = []
    for _ in range(n_left):
        d = int(rng.integers(min_deg, n_right + 1))
        adjacency.append(tuple(sorted(int(v) for v in rng.choice(n_right, size=d, replace=False))))
    graph = TransversalConstraint(n_left, n_right, tuple(adjacency))
    x = rng.random(n_left)
    load = max(x[nbrs].sum() for nbrs in graph.right_neighbourhoods() if nbrs)
    if load > 1:
        x = x / load
    return Instance(graph, tuple(np.clip(x, 0.0, 1.0)))

"""Greedy OCRS samplers, family membership and the online acceptance loop.

A greedy scheme draws all of its randomness up front as a
:class:`FamilyRealization` describing a down-closed family F of feasible
sets; arrivals are then accepted whenever the selected set stays in F.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constraints import (
    Constraint,
    Instance,
    InstanceError,
    PartitionConstraint,
    RankOneConstraint,
    TransversalConstraint,
    max_matching,
    members,
    popcount,
    subsets,
    to_mask,
)

#: default cap on |active| for the literal subset-enumeration check
ENUM_CAP = 20


class SchemeKind(str, enum.Enum):
    HALVING = "halving"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    PARTITION_LINEAR = "partition-linear"
    PARTITION_EXPONENTIAL = "partition-exponential"
    TRANSVERSAL = "transversal"

    @property
    def constraint_kind(self) -> str:
        return _COMPATIBLE[self]


_COMPATIBLE = {
    SchemeKind.HALVING: "rank1",
    SchemeKind.LINEAR: "rank1",
    SchemeKind.EXPONENTIAL: "rank1",
    SchemeKind.PARTITION_LINEAR: "partition",
    SchemeKind.PARTITION_EXPONENTIAL: "partition",
    SchemeKind.TRANSVERSAL: "transversal",
}


class SchemeMismatch(InstanceError):
    pass


class EnumerationTooLarge(RuntimeError):
    """Raised when an exhaustive path would exceed its size cap."""


def check_compatible(scheme: SchemeKind | str, constraint: Constraint) -> SchemeKind:
    scheme = SchemeKind(scheme)
    if scheme.constraint_kind != constraint.kind:
        raise SchemeMismatch(
            f"scheme {scheme.value!r} needs a {scheme.constraint_kind} constraint, "
            f"instance is {constraint.kind}"
        )
    return scheme


# ---------------------------------------------------------------------------
# inclusion probabilities


def q_halving(x) -> np.ndarray:
    return np.full(np.shape(x), 0.5)


def q_linear(x) -> np.ndarray:
    return 1.0 - np.asarray(x, dtype=float) / 2.0


def q_exponential(x) -> np.ndarray:
    """(1 - e^-x) / x, continued by its limit 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x > 0
    out[nz] = -np.expm1(-x[nz]) / x[nz]
    return out


def q_transversal(x, degree) -> np.ndarray:
    """Per-edge inclusion probability 1 - (1 - (1-e^-x)/x)^(1/|N(u)|)."""
    x = np.asarray(x, dtype=float)
    degree = np.broadcast_to(np.asarray(degree, dtype=float), x.shape)
    if np.any(degree < 1):
        raise InstanceError("every element needs at least one neighbour")
    miss = np.zeros_like(x)
    nz = x > 0
    miss[nz] = (x[nz] + np.expm1(-x[nz])) / x[nz]
    miss = np.clip(miss, 0.0, 1.0)
    return 1.0 - np.power(miss, 1.0 / degree)


def inclusion_probabilities(instance: Instance, scheme: SchemeKind | str) -> np.ndarray:
    """Per-element coin probability of ``scheme`` on ``instance``.

    For the transversal scheme the value is the per-(u, v) coin q_u.
    """
    scheme = check_compatible(scheme, instance.constraint)
    x = instance.point()
    if scheme is SchemeKind.HALVING:
        return q_halving(x)
    if scheme in (SchemeKind.LINEAR, SchemeKind.PARTITION_LINEAR):
        return q_linear(x)
    if scheme in (SchemeKind.EXPONENTIAL, SchemeKind.PARTITION_EXPONENTIAL):
        return q_exponential(x)
    return q_transversal(x, instance.constraint.degrees())


# ---------------------------------------------------------------------------
# realizations


@dataclass(frozen=True)
class FamilyRealization:
    """One draw of the scheme's pre-committed family F.

    Rank-one and partition schemes store ``kept`` (a mask of elements whose
    singletons are in F); the transversal scheme stores ``per_right[v]``, the
    mask of R_v.
    """

    constraint: Constraint
    kept: int | None = None
    per_right: tuple[int, ...] | None = None

    def __post_init__(self):
        c = self.constraint
        if isinstance(c, TransversalConstraint):
            if self.per_right is None or len(self.per_right) != c.right_count:
                raise InstanceError("transversal realization needs one R_v per right vertex")
            nv = c.right_neighbourhoods()
            for v, rv in enumerate(self.per_right):
                if rv & ~to_mask(nv[v]):
                    raise InstanceError(f"R_{v} is not a subset of N({v})")
        else:
            if self.kept is None or self.kept >> c.n:
                raise InstanceError("kept must be a set of ground elements")

    def to_dict(self) -> dict:
        if self.per_right is not None:
            return {"per_right": [members(m) for m in self.per_right]}
        return {"kept": members(self.kept)}

    @classmethod
    def from_dict(cls, constraint: Constraint, doc: dict) -> "FamilyRealization":
        if "per_right" in doc:
            return cls(constraint, per_right=tuple(to_mask(r) for r in doc["per_right"]))
        return cls(constraint, kept=to_mask(doc["kept"]))


def _bernoulli_mask(q: np.ndarray, rng: np.random.Generator) -> int:
    return to_mask(np.flatnonzero(rng.random(q.shape[0]) < q))


def sample_family_halving(x, rng: np.random.Generator, constraint: Constraint | None = None) -> FamilyRealization:
    x = np.asarray(x, dtype=float)
    c = constraint or RankOneConstraint(x.shape[0])
    return FamilyRealization(c, kept=_bernoulli_mask(q_halving(x), rng))


def sample_family_linear(x, rng: np.random.Generator, constraint: Constraint | None = None) -> FamilyRealization:
    x = np.asarray(x, dtype=float)
    c = constraint or RankOneConstraint(x.shape[0])
    return FamilyRealization(c, kept=_bernoulli_mask(q_linear(x), rng))


def sample_family_exponential(x, rng: np.random.Generator, constraint: Constraint | None = None) -> FamilyRealization:
    x = np.asarray(x, dtype=float)
    c = constraint or RankOneConstraint(x.shape[0])
    return FamilyRealization(c, kept=_bernoulli_mask(q_exponential(x), rng))


_BASE = {"linear": sample_family_linear, "exponential": sample_family_exponential}


def sample_family_partition(x, partition: PartitionConstraint, rng: np.random.Generator,
                            base: str = "linear") -> FamilyRealization:
    """Run a single-item sampler inside every part; ``kept`` is the union."""
    if base not in _BASE:
        raise SchemeMismatch(f"partition base must be 'linear' or 'exponential', got {base!r}")
    x = np.asarray(x, dtype=float)
    kept = 0
    for part in partition.parts:
        sub = _BASE[base](x[list(part)], rng)
        for local, e in enumerate(part):
            if sub.kept >> local & 1:
                kept |= 1 << e
    return FamilyRealization(partition, kept=kept)


def sample_family_transversal(x, graph: TransversalConstraint, rng: np.random.Generator) -> FamilyRealization:
    x = np.asarray(x, dtype=float)
    q = q_transversal(x, graph.degrees())
    per_right = []
    for nbrs in graph.right_neighbourhoods():
        coins = rng.random(len(nbrs)) < q[nbrs]
        per_right.append(to_mask(u for u, c in zip(nbrs, coins) if c))
    return FamilyRealization(graph, per_right=tuple(per_right))


def sample_family(instance: Instance, scheme: SchemeKind | str, rng: np.random.Generator) -> FamilyRealization:
    scheme = check_compatible(scheme, instance.constraint)
    x = instance.point()
    c = instance.constraint
    if scheme is SchemeKind.HALVING:
        return sample_family_halving(x, rng, c)
    if scheme is SchemeKind.LINEAR:
        return sample_family_linear(x, rng, c)
    if scheme is SchemeKind.EXPONENTIAL:
        return sample_family_exponential(x, rng, c)
    if scheme is SchemeKind.PARTITION_LINEAR:
        return sample_family_partition(x, c, rng, "linear")
    if scheme is SchemeKind.PARTITION_EXPONENTIAL:
        return sample_family_partition(x, c, rng, "exponential")
    return sample_family_transversal(x, c, rng)


# ---------------------------------------------------------------------------
# family membership and the online loop


def _filtered_rank(realization: FamilyRealization, s: int) -> int:
    c = realization.constraint
    pr = realization.per_right
    size, _ = max_matching(c.adjacency, c.right_count, members(s), lambda u, v: pr[v] >> u & 1)
    return size


def family_contains(realization: FamilyRealization, s: int) -> bool:
    c = realization.constraint
    if s >> c.n:
        raise InstanceError("set is not within the ground set")
    if s == 0:
        return True
    if realization.kept is not None:
        if s & ~realization.kept:
            return False
        return all(popcount(s & to_mask(p)) <= 1 for p in c.parts)
    return _filtered_rank(realization, s) == popcount(s)


class OnlineState:
    """Selected set of a greedy run plus the arrival cursor."""

    def __init__(self, realization: FamilyRealization):
        self.realization = realization
        self.selected = 0
        self.cursor = 0

    def offer(self, e: int, active: bool) -> bool:
        """Decide element ``e`` on arrival; returns whether it was accepted."""
        self.cursor += 1
        if not active:
            return False
        candidate = self.selected | (1 << e)
        if family_contains(self.realization, candidate):
            self.selected = candidate
            return True
        return False


def run_online(realization: FamilyRealization, active: int, order: Sequence[int]) -> int:
    n = realization.constraint.n
    if sorted(order) != list(range(n)):
        raise InstanceError("order must be a permutation of the ground set")
    state = OnlineState(realization)
    for e in order:
        state.offer(e, bool(active >> e & 1))
        if __debug__:
            assert family_contains(realization, state.selected)
    return state.selected


def _can_always_add_enumerate(realization: FamilyRealization, active: int, e: int, cap: int) -> bool:
    if popcount(active) > cap:
        raise EnumerationTooLarge(
            f"|active| = {popcount(active)} exceeds the enumeration cap {cap}; use Monte Carlo over orderings"
        )
    bit = 1 << e
    for i in subsets(active):
        if family_contains(realization, i) and not family_contains(realization, i | bit):
            return False
    return True


def can_always_add(realization: FamilyRealization, active: int, e: int, method: str = "auto",
                   cap: int = ENUM_CAP) -> bool:
    """Whether e can join every family member contained in ``active``.

    ``method="enumerate"`` checks every subset of ``active`` literally
    (refused above ``cap`` active elements).  ``"auto"`` uses the rank-one /
    partition fast path, and for transversal families the span test
    rank(A - e + e) = rank(A - e) + 1 in the filtered graph, which is
    equivalent because F is the independence system of a transversal matroid.
    """
    c = realization.constraint
    if not 0 <= e < c.n:
        raise InstanceError(f"element {e} is outside the ground set")
    if method == "enumerate":
        return _can_always_add_enumerate(realization, active, e, cap)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    bit = 1 << e
    others = active & ~bit
    if realization.kept is not None:
        if not realization.kept & bit:
            return False
        part = next(to_mask(p) for p in c.parts if e in p)
        return not (others & realization.kept & part)
    base = _filtered_rank(realization, others)
    return _filtered_rank(realization, others | bit) == base + 1


def enumerate_realizations(instance: Instance, scheme: SchemeKind | str):
    """Yield ``(probability, realization)`` over every coin pattern.

    Intended for tiny instances; the number of patterns is 2^(number of coins).
    """
    scheme = check_compatible(scheme, instance.constraint)
    q = inclusion_probabilities(instance, scheme)
    c = instance.constraint
    if isinstance(c, TransversalConstraint):
        coins = [(u, v) for v, nbrs in enumerate(c.right_neighbourhoods()) for u in nbrs]
    else:
        coins = [(u, None) for u in range(c.n)]
    for bits in itertools.product((0, 1), repeat=len(coins)):
        p = 1.0
        kept = 0
        per_right = [0] * getattr(c, "right_count", 0)
        for (u, v), b in zip(coins, bits):
            p *= q[u] if b else 1.0 - q[u]
            if b:
                if v is None:
                    kept |= 1 << u
                else:
                    per_right[v] |= 1 << u
        if isinstance(c, TransversalConstraint):
            yield p, FamilyRealization(c, per_right=tuple(per_right))
        else:
            yield p, FamilyRealization(c, kept=kept)

"""Ground sets, constraint classes, relaxations and independence oracles.

Element sets are plain ``int`` bitmasks: bit ``i`` set means element ``i``
belongs to the set.  Helpers below convert between masks and index lists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: absolute slack granted to every linear inequality of a relaxation
FEAS_TOL = 1e-9

#: enumeration paths index subsets with 64-bit style masks
MAX_ENUM_ELEMENTS = 64


class InstanceError(ValueError):
    """Malformed constraint or instance data (structural, not infeasibility)."""


class DimensionError(InstanceError):
    """Point dimension does not match the ground set."""


# ---------------------------------------------------------------------------
# element sets


def to_mask(elements: Iterable[int]) -> int:
    mask = 0
    for e in elements:
        mask |= 1 << int(e)
    return mask


def members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def subsets(mask: int):
    """Yield every submask of ``mask`` (including 0 and ``mask`` itself)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


# ---------------------------------------------------------------------------
# constraint classes


@dataclass(frozen=True)
class RankOneConstraint:
    """Uniform matroid of rank one: at most one element may be chosen."""

    n: int
    kind: str = field(default="rank1", init=False)

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("n must be >= 1")

    @property
    def parts(self) -> tuple[tuple[int, ...], ...]:
        return (tuple(range(self.n)),)


@dataclass(frozen=True)
class PartitionConstraint:
    """Partition matroid: at most one element from each part."""

    n: int
    parts: tuple[tuple[int, ...], ...]
    kind: str = field(default="partition", init=False)

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("n must be >= 1")
        parts = tuple(tuple(sorted(int(i) for i in p)) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        seen: set[int] = set()
        for j, part in enumerate(parts):
            if not part:
                raise InstanceError(f"parts[{j}] is empty")
            for i in part:
                if not 0 <= i < self.n:
                    raise InstanceError(f"parts[{j}] has element {i} outside 0..{self.n - 1}")
                if i in seen:
                    raise InstanceError(f"element {i} appears in more than one part")
                seen.add(i)
        if len(seen) != self.n:
            missing = sorted(set(range(self.n)) - seen)
            raise InstanceError(f"parts do not cover elements {missing}")

    def part_of(self) -> list[int]:
        """Part index of every element."""
        where = [0] * self.n
        for j, part in enumerate(self.parts):
            for i in part:
                where[i] = j
        return where

    def as_transversal(self) -> "TransversalConstraint":
        """Same matroid, one right vertex per part."""
        where = self.part_of()
        return TransversalConstraint(self.n, len(self.parts), tuple((w,) for w in where))


@dataclass(frozen=True)
class TransversalConstraint:
    """Transversal matroid of a bipartite graph with left vertices 0..n-1.

    ``adjacency[u]`` lists the right neighbours N(u) of element ``u``.
    """

    n: int
    right_count: int
    adjacency: tuple[tuple[int, ...], ...]
    kind: str = field(default="transversal", init=False)

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("n must be >= 1")
        if self.right_count < 1:
            raise InstanceError("right_count must be >= 1")
        if len(self.adjacency) != self.n:
            raise InstanceError(f"adjacency has {len(self.adjacency)} rows, expected {self.n}")
        adj = []
        for u, row in enumerate(self.adjacency):
            nbrs = tuple(sorted(set(int(v) for v in row)))
            if not nbrs:
                raise InstanceError(f"adjacency[{u}] is empty; every element needs a neighbour")
            if nbrs[0] < 0 or nbrs[-1] >= self.right_count:
                raise InstanceError(f"adjacency[{u}] references a right vertex outside 0..{self.right_count - 1}")
            adj.append(nbrs)
        object.__setattr__(self, "adjacency", tuple(adj))

    def right_neighbourhoods(self) -> list[list[int]]:
        """N(v) for every right vertex v, in increasing element order."""
        out: list[list[int]] = [[] for _ in range(self.right_count)]
        for u, row in enumerate(self.adjacency):
            for v in row:
                out[v].append(u)
        return out

    def degrees(self) -> np.ndarray:
        return np.array([len(row) for row in self.adjacency], dtype=np.int64)


Constraint = RankOneConstraint | PartitionConstraint | TransversalConstraint


# ---------------------------------------------------------------------------
# relaxation membership


@dataclass(frozen=True)
class PointCheck:
    """Outcome of :func:`validate_point`.

    On rejection ``violated`` names the first failing constraint and ``slack``
    is ``bound - lhs`` (negative beyond tolerance).
    """

    ok: bool
    violated: str | None = None
    slack: float | None = None

    def __bool__(self) -> bool:
        return self.ok


def _rows(constraint: Constraint) -> list[tuple[str, list[int]]]:
    if isinstance(constraint, RankOneConstraint):
        return [("sum of all coordinates", list(range(constraint.n)))]
    if isinstance(constraint, PartitionConstraint):
        return [(f"part {j}", list(p)) for j, p in enumerate(constraint.parts)]
    nv = constraint.right_neighbourhoods()
    return [(f"right vertex {v}", list(nbrs)) for v, nbrs in enumerate(nv)]


def validate_point(constraint: Constraint, x: Sequence[float], tol: float = FEAS_TOL) -> PointCheck:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != constraint.n:
        raise DimensionError(f"point has shape {x.shape}, expected ({constraint.n},)")
    for i, xi in enumerate(x):
        if not np.isfinite(xi):
            return PointCheck(False, f"x[{i}] is not finite", float("nan"))
        if xi < -tol:
            return PointCheck(False, f"x[{i}] >= 0", float(xi))
        if xi > 1 + tol:
            return PointCheck(False, f"x[{i}] <= 1", float(1 - xi))
    for name, idx in _rows(constraint):
        slack = 1.0 - float(x[idx].sum()) if idx else 1.0
        if slack < -tol:
            return PointCheck(False, name, slack)
    return PointCheck(True)


# ---------------------------------------------------------------------------
# matching and independence


def max_matching(adjacency: Sequence[Sequence[int]], right_count: int, left: Iterable[int] | None = None,
                 allowed=None) -> tuple[int, dict[int, int]]:
    """Maximum bipartite matching by augmenting paths, scanned in index order.

    ``left`` restricts the left vertices considered (default: all rows of
    ``adjacency``); ``allowed(u, v)`` filters edges.  Returns the matching size
    and a ``{left: right}`` assignment.  Deterministic for a given input.
    """
    lefts = range(len(adjacency)) if left is None else sorted(left)
    if allowed is None:
        nbrs = {u: list(adjacency[u]) for u in lefts}
    else:
        nbrs = {u: [v for v in adjacency[u] if allowed(u, v)] for u in lefts}
    match_right = [-1] * right_count

    def augment(u: int, seen: list[bool]) -> bool:
        for v in nbrs[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] < 0 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    size = 0
    for u in lefts:
        if nbrs[u] and augment(u, [False] * right_count):
            size += 1
    assignment = {u: v for v, u in enumerate(match_right) if u >= 0}
    return size, dict(sorted(assignment.items()))


def _check_mask(constraint: Constraint, s: int) -> None:
    if s < 0 or s >> constraint.n:
        raise InstanceError(f"set {members(s) if s >= 0 else s} is not within 0..{constraint.n - 1}")


def is_independent(constraint: Constraint, s: int) -> bool:
    _check_mask(constraint, s)
    if isinstance(constraint, RankOneConstraint):
        return popcount(s) <= 1
    if isinstance(constraint, PartitionConstraint):
        return all(popcount(s & to_mask(p)) <= 1 for p in constraint.parts)
    elems = members(s)
    size, _ = max_matching(constraint.adjacency, constraint.right_count, elems)
    return size == len(elems)


# ---------------------------------------------------------------------------
# instances and JSON


@dataclass(frozen=True)
class Instance:
    """A constraint paired with a fractional point in its relaxation."""

    constraint: Constraint
    x: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if len(self.x) != self.constraint.n:
            raise DimensionError(f"x has {len(self.x)} entries, expected n={self.constraint.n}")

    @property
    def kind(self) -> str:
        return self.constraint.kind

    @property
    def n(self) -> int:
        return self.constraint.n

    def point(self) -> np.ndarray:
        return np.array(self.x, dtype=float)

    def check(self) -> PointCheck:
        return validate_point(self.constraint, self.x)

    def to_dict(self) -> dict:
        c = self.constraint
        d: dict = {"kind": c.kind, "n": c.n, "x": list(self.x)}
        if isinstance(c, PartitionConstraint):
            d["parts"] = [list(p) for p in c.parts]
        elif isinstance(c, TransversalConstraint):
            d["right_count"] = c.right_count
            d["adjacency"] = [list(r) for r in c.adjacency]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _field(doc: dict, key: str, typ, where: str = ""):
    if key not in doc:
        raise InstanceError(f"missing field {where}{key!r}")
    val = doc[key]
    if typ is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise InstanceError(f"field {where}{key!r} must be an integer, got {val!r}")
    if typ is list and not isinstance(val, list):
        raise InstanceError(f"field {where}{key!r} must be a list, got {type(val).__name__}")
    return val


def _int_rows(rows: list, key: str) -> list[list[int]]:
    out = []
    for j, row in enumerate(rows):
        if not isinstance(row, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in row):
            raise InstanceError(f"field {key}[{j}] must be a list of integers")
        out.append(row)
    return out


def instance_from_dict(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    kind = _field(doc, "kind", str)
    n = _field(doc, "n", int)
    xs = _field(doc, "x", list)
    for i, v in enumerate(xs):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InstanceError(f"field x[{i}] must be a number, got {v!r}")
    if kind == "rank1":
        c: Constraint = RankOneConstraint(n)
    elif kind == "partition":
        c = PartitionConstraint(n, tuple(map(tuple, _int_rows(_field(doc, "parts", list), "parts"))))
    elif kind == "transversal":
        rc = _field(doc, "right_count", int)
        adj = _int_rows(_field(doc, "adjacency", list), "adjacency")
        c = TransversalConstraint(n, rc, tuple(map(tuple, adj)))
    else:
        raise InstanceError(f"field 'kind' must be rank1, partition or transversal, got {kind!r}")
    return Instance(c, tuple(xs))


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(doc)


def load_instance(path) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read())

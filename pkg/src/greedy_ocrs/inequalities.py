"""Closed-form inequalities behind the selectability guarantees, and the
grid sweeps that check them numerically."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INV_E = math.exp(-1.0)
ONE_MINUS_INV_E = -math.expm1(-1.0)


def lemma5_check(a) -> tuple[float, float]:
    """Both sides of ln(1 - a_k/2) + sum_{j<k} ln(1 - a_j + a_j^2/2) >= -sum a.

    The last coordinate plays the role of the arriving element.  Returns
    ``(lhs, rhs)``; the caller asserts ``lhs >= rhs``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("a must be a non-empty vector")
    if np.any((a < 0) | (a > 1)):
        raise ValueError("entries of a must lie in [0, 1]")
    head, last = a[:-1], a[-1]
    lhs = math.log1p(-last / 2) + float(np.sum(np.log1p(-head + head * head / 2)))
    return lhs, -float(a.sum())


def claim_functions_check(x):
    """f(x) = e^x (1 - x/2) and g(x) = e^x (1 - x + x^2/2); both are >= 1 on [0, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    ex = np.exp(x)
    f = ex * (1 - x / 2)
    g = ex * (1 - x + x * x / 2)
    if f.ndim == 0:
        return float(f), float(g)
    return f, g


def _hit_probability(x):
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x > 0
    out[nz] = -np.expm1(-x[nz]) / x[nz]
    return out


def fk(k: int, x):
    """f_k(x) = (1 - e^-x)/x * (1 - (1 - e^(x-1))^k), first factor -> 1 at x = 0."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    val = _hit_probability(x) * (1 - np.power(-np.expm1(x - 1), k))
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class TransversalBound:
    hit_probability: float      # Pr[u lies in some R_v]
    blocking_bound: float       # upper bound on every neighbour being blocked
    lower_bound: float          # hit_probability * (1 - blocking_bound)


def transversal_bounds(graph, x, u: int) -> TransversalBound:
    x = np.asarray(x, dtype=float)
    if not 0 <= u < graph.n:
        raise ValueError(f"element {u} is outside the ground set")
    xu = float(x[u])
    deg = len(graph.adjacency[u])
    hit = float(_hit_probability(np.array(xu)))
    block = float(-math.expm1(xu - 1)) ** deg
    return TransversalBound(hit, block, hit * (1 - block))


# ---------------------------------------------------------------------------
# verification suite


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    witness: object = None


@dataclass
class SuiteResult:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail="", witness=None):
        self.checks.append(CheckResult(name, bool(passed), detail, witness))


def verify_suite(seed: int = 0, vectors: int = 10_000, max_len: int = 10,
                 claim_step: float = 1e-4, fk_step: float = 1e-3, fk_max: int = 16) -> SuiteResult:
    """Run every inequality sweep; each failing check carries a witness point."""
    from .rng import STREAM_VERIFY, stream

    res = SuiteResult()
    rng = stream(seed, STREAM_VERIFY)

    lhs0, rhs0 = lemma5_check(np.zeros(5))
    res.add("log inequality equality at zero", lhs0 == 0.0 and rhs0 == 0.0, f"lhs={lhs0} rhs={rhs0}")

    worst = (math.inf, None)
    for _ in range(vectors):
        a = rng.random(int(rng.integers(1, max_len + 1)))
        lhs, rhs = lemma5_check(a)
        if lhs - rhs < worst[0]:
            worst = (lhs - rhs, a)
    res.add("log inequality random vectors", worst[0] >= 0,
            f"{vectors} vectors, min(lhs - rhs) = {worst[0]:.3e}", None if worst[0] >= 0 else worst[1].tolist())

    grid = np.linspace(0.0, 1.0, int(round(1 / claim_step)) + 1)
    f, g = claim_functions_check(grid)
    for name, vals in (("f", f), ("g", g)):
        low = np.flatnonzero(vals < 1)
        res.add(f"claim {name} >= 1", low.size == 0, f"min {vals.min():.12f}",
                None if low.size == 0 else float(grid[low[0]]))
        drop = np.flatnonzero(np.diff(vals) < 0)
        res.add(f"claim {name} nondecreasing", drop.size == 0, f"{grid.size} grid points",
                None if drop.size == 0 else float(grid[drop[0]]))

    xs = np.linspace(0.0, 1.0, int(round(1 / fk_step)) + 1)
    for k in range(1, fk_max + 1):
        vals = fk(k, xs)
        floor = ONE_MINUS_INV_E if k >= 3 else INV_E
        bad = np.flatnonzero(vals < floor - 1e-12)
        res.add(f"f_{k} >= {'1-1/e' if k >= 3 else '1/e'}", bad.size == 0, f"min {vals.min():.12f}",
                None if bad.size == 0 else float(xs[bad[0]]))
    f3 = fk(3, 1.0)
    res.add("f_3(1) = 1-1/e", abs(f3 - ONE_MINUS_INV_E) <= 1e-12, f"f_3(1) = {f3:.15f}")
    f1 = fk(1, 1e-12)
    res.add("f_1(0+) = 1/e", abs(f1 - INV_E) <= 1e-9, f"f_1(1e-12) = {f1:.15f}")

    # hit probability of the transversal sampler equals 1 - (1 - q_u)^|N(u)|
    from .schemes import q_transversal

    worst_id = 0.0
    for d in range(1, fk_max + 1):
        q = q_transversal(xs, d)
        hit = 1 - np.power(1 - q, d)
        worst_id = max(worst_id, float(np.max(np.abs(hit - _hit_probability(xs)))))
    res.add("transversal hit-probability identity", worst_id <= 1e-12, f"max deviation {worst_id:.3e}")
    return res

"""Exact selectability: closed forms, the exhaustive oracle, and the
tightness bound machinery for greedy single-item schemes."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    Instance,
    PartitionConstraint,
    RankOneConstraint,
    TransversalConstraint,
    members,
    popcount,
)
from .schemes import (
    EnumerationTooLarge,
    SchemeKind,
    can_always_add,
    check_compatible,
    enumerate_realizations,
    inclusion_probabilities,
)

#: cap on activity patterns x coin patterns for the exhaustive oracle
BRUTE_FORCE_CAP = 1 << 24
#: the literal (unfactored) oracle is far slower; keep it to tiny cases
NAIVE_CAP = 1 << 16


# ---------------------------------------------------------------------------
# reports


@dataclass
class SelectabilityReport:
    """Per-element selection probabilities checked against a threshold.

    ``half_width``/``lower``/``upper`` are only populated for Monte Carlo
    estimates.
    """

    x: np.ndarray
    probability: np.ndarray
    method: str
    threshold: float | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("closed-form", "brute-force", "monte-carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if (self.method == "monte-carlo") != (self.lower is not None):
            raise ValueError("confidence bounds are present exactly for monte-carlo reports")

    @property
    def half_width(self) -> np.ndarray | None:
        if self.lower is None:
            return None
        return (self.upper - self.lower) / 2

    def passes(self, tolerance: float = 0.0) -> np.ndarray:
        if self.threshold is None:
            return np.ones(self.probability.shape, dtype=bool)
        ref = self.lower if self.lower is not None else self.probability
        return ref >= self.threshold - tolerance

    def to_dict(self, tolerance: float = 0.0) -> dict:
        hw = self.half_width
        return {
            "method": self.method,
            "threshold": self.threshold,
            "elements": [
                {
                    "index": i,
                    "x": float(self.x[i]),
                    "probability": float(self.probability[i]),
                    "half_width": None if hw is None else float(hw[i]),
                    "lower": None if self.lower is None else float(self.lower[i]),
                    "upper": None if self.upper is None else float(self.upper[i]),
                    "pass": bool(ok),
                }
                for i, ok in enumerate(self.passes(tolerance))
            ],
            "min_probability": float(self.probability.min()),
            "meta": self.meta,
        }

    def to_json(self, tolerance: float = 0.0) -> str:
        return json.dumps(self.to_dict(tolerance), indent=2)

    def to_csv(self, tolerance: float = 0.0) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "x", "probability", "half_width", "threshold", "pass"])
        hw = self.half_width
        for i, ok in enumerate(self.passes(tolerance)):
            w.writerow([
                i,
                repr(float(self.x[i])),
                repr(float(self.probability[i])),
                "" if hw is None else repr(float(hw[i])),
                "" if self.threshold is None else repr(float(self.threshold)),
                "pass" if ok else "fail",
            ])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# closed forms


def exact_selectability_rank1(x, q) -> np.ndarray:
    """r_e = q_e * prod_{j != e} (1 - x_j q_j): e is in the family and no other
    active element is."""
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    if x.shape != q.shape:
        raise ValueError("x and q must have equal length")
    if np.any((x < 0) | (x > 1)) or np.any((q < 0) | (q > 1)):
        raise ValueError("x and q must lie in [0, 1]")
    miss = 1.0 - x * q
    out = np.empty_like(x)
    for e in range(x.shape[0]):
        out[e] = q[e] * np.prod(np.delete(miss, e))
    return out


def exact_selectability_partition(x, q, partition: PartitionConstraint) -> np.ndarray:
    """Single-item closed form applied inside each part."""
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.empty_like(x)
    for part in partition.parts:
        idx = list(part)
        out[idx] = exact_selectability_rank1(x[idx], q[idx])
    return out


def exact_selectability(instance: Instance, scheme: SchemeKind | str) -> np.ndarray:
    scheme = check_compatible(scheme, instance.constraint)
    c = instance.constraint
    q = inclusion_probabilities(instance, scheme)
    if isinstance(c, RankOneConstraint):
        return exact_selectability_rank1(instance.x, q)
    if isinstance(c, PartitionConstraint):
        return exact_selectability_partition(instance.x, q, c)
    raise ValueError("no closed form for transversal schemes; use brute_force_selectability")


def closed_form_report(instance: Instance, scheme, threshold=None) -> SelectabilityReport:
    p = exact_selectability(instance, scheme)
    return SelectabilityReport(instance.point(), p, "closed-form", threshold,
                               meta={"scheme": SchemeKind(scheme).value})


# ---------------------------------------------------------------------------
# exhaustive oracle


def _slots(instance: Instance) -> list[tuple[int, ...]]:
    """Right vertices whose coin can put each element into F."""
    c = instance.constraint
    if isinstance(c, RankOneConstraint):
        return [(0,)] * c.n
    if isinstance(c, PartitionConstraint):
        return [(p,) for p in c.part_of()]
    return list(c.adjacency)


def enumeration_size(instance: Instance) -> int:
    """Activity patterns times family coin patterns."""
    coins = sum(len(s) for s in _slots(instance))
    return 1 << (instance.n + coins)


def _mask_distribution(slots, q):
    """Distribution of the set of slots whose coin comes up for one element."""
    out = []
    d = len(slots)
    for bits in range(1 << d):
        k = popcount(bits)
        mask = 0
        for j, v in enumerate(slots):
            if bits >> j & 1:
                mask |= 1 << v
        out.append((mask, q ** k * (1 - q) ** (d - k)))
    return out


class _ImageFamilies:
    """Sets of right vertices covered by matchings, encoded as bitmasks over
    the 2^|V| subsets of V.  Adding an element with filtered neighbourhood M
    extends every image T by each v in M outside T."""

    def __init__(self):
        self._extend: dict[tuple[int, int], int] = {}
        self._addable: dict[tuple[int, int], bool] = {}

    def extend(self, fam: int, m: int) -> int:
        key = (fam, m)
        hit = self._extend.get(key)
        if hit is None:
            hit = fam
            for t in members(fam):
                for v in members(m & ~t):
                    hit |= 1 << (t | (1 << v))
            self._extend[key] = hit
        return hit

    def addable(self, fam: int, m: int) -> bool:
        # e extends the rank iff some maximum matching image misses a
        # filtered neighbour of e
        key = (fam, m)
        hit = self._addable.get(key)
        if hit is None:
            images = members(fam)
            r = max(popcount(t) for t in images)
            hit = any(popcount(t) == r and m & ~t for t in images)
            self._addable[key] = hit
        return hit


def brute_force_selectability(instance: Instance, scheme: SchemeKind | str, e: int,
                              max_size: int = BRUTE_FORCE_CAP, method: str = "factored") -> float:
    """Exact Pr[every family member inside R(x) can take e] by summing over
    every activity pattern and every family coin pattern.

    ``method="factored"`` sums coins of elements outside A + e out
    analytically and folds the remaining coins element by element;
    ``method="naive"`` materialises each realization and calls
    :func:`can_always_add` with literal subset enumeration.  Both sum the
    joint Pr[event and e active] and the unconditioned Pr[event]; their ratio
    is checked against x_e so conditioning on activity is verified.
    """
    scheme = check_compatible(scheme, instance.constraint)
    n = instance.n
    if not 0 <= e < n:
        raise ValueError(f"element {e} is outside the ground set")
    size = enumeration_size(instance)
    cap = max_size if method == "factored" else min(max_size, NAIVE_CAP)
    if size > cap:
        raise EnumerationTooLarge(f"enumeration size {size} exceeds cap {cap}")
    x = instance.point()
    if method == "factored":
        marginal, joint = _factored(instance, scheme, e, x)
    elif method == "naive":
        marginal, joint = _naive(instance, scheme, e, x)
    else:
        raise ValueError(f"unknown method {method!r}")
    if abs(joint - x[e] * marginal) > 1e-12 * x[e] + 1e-300:
        raise AssertionError(f"selection event depends on activation of {e}: "
                             f"Pr[event, active] = {joint!r}, x_e * Pr[event] = {x[e] * marginal!r}")
    return marginal


def _activity_probability(x, a: int) -> float:
    p = 1.0
    for i, xi in enumerate(x):
        p *= xi if a >> i & 1 else 1.0 - xi
    return p


def _factored(instance, scheme, e, x):
    q = inclusion_probabilities(instance, scheme)
    dists = [_mask_distribution(s, float(qi)) for s, qi in zip(_slots(instance), q)]
    fams = _ImageFamilies()
    n = instance.n
    marginal = joint = 0.0
    for a in range(1 << n):
        pa = _activity_probability(x, a)
        if pa == 0.0:
            continue
        state = {1: 1.0}  # only the empty image
        for u in members(a & ~(1 << e)):
            nxt: dict[int, float] = {}
            for fam, pf in state.items():
                for m, pm in dists[u]:
                    if pm == 0.0:
                        continue
                    g = fams.extend(fam, m)
                    nxt[g] = nxt.get(g, 0.0) + pf * pm
            state = nxt
        p_event = 0.0
        for fam, pf in state.items():
            for m, pm in dists[e]:
                if pm and fams.addable(fam, m):
                    p_event += pf * pm
        marginal += pa * p_event
        if a >> e & 1:
            joint += pa * p_event
    return marginal, joint


def _naive(instance, scheme, e, x):
    n = instance.n
    pas = [_activity_probability(x, a) for a in range(1 << n)]
    marginal = joint = 0.0
    for pf, real in enumerate_realizations(instance, scheme):
        if pf == 0.0:
            continue
        for a, pa in enumerate(pas):
            if pa and can_always_add(real, a, e, method="enumerate"):
                marginal += pf * pa
                if a >> e & 1:
                    joint += pf * pa
    return marginal, joint


def brute_force_report(instance: Instance, scheme, threshold=None, max_size: int = BRUTE_FORCE_CAP,
                       method: str = "factored") -> SelectabilityReport:
    p = np.array([brute_force_selectability(instance, scheme, e, max_size, method) for e in range(instance.n)])
    return SelectabilityReport(instance.point(), p, "brute-force", threshold,
                               meta={"scheme": SchemeKind(scheme).value,
                                     "enumeration_size": enumeration_size(instance)})


# ---------------------------------------------------------------------------
# tightness


@dataclass
class AlphaSummary:
    """Distribution summary of a family over singletons of a rank-one ground set.

    ``mass[e, k]`` is the total probability of kept sets of size k containing e;
    ``beta[k]`` the total probability of size k.  Sampled summaries carry the
    trial count and the standard error of the double-counted total.
    """

    n: int
    mass: np.ndarray
    beta: np.ndarray
    exact: bool
    trials: int | None = None
    total_sigma: float = 0.0


def poisson_binomial(q) -> np.ndarray:
    """Distribution of the number of successes among independent Bernoulli(q_i)."""
    dist = np.zeros(len(q) + 1)
    dist[0] = 1.0
    for i, qi in enumerate(q):
        dist[1:i + 2] = dist[1:i + 2] * (1 - qi) + dist[:i + 1] * qi
        dist[0] *= 1 - qi
    return dist


def product_alpha_summary(q) -> AlphaSummary:
    """Exact summary for a family whose members enter independently with q_i."""
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    mass = np.zeros((n, n + 1))
    for e in range(n):
        rest = poisson_binomial(np.delete(q, e))
        mass[e, 1:] = q[e] * rest
    return AlphaSummary(n, mass, poisson_binomial(q), exact=True)


def _shrink(n: int) -> float:
    return 1.0 - 1.0 / n


def eq1_bound(summary: AlphaSummary, n: int, tol: float = 1e-9) -> np.ndarray:
    """sum_k (1 - 1/n)^(k-1) * mass(e, k): the best selection probability any
    greedy scheme with this family distribution can guarantee e on x = 1/n."""
    if summary.mass.shape != (n, n + 1):
        raise ValueError(f"summary is for n={summary.n}, asked for n={n}")
    if np.any(summary.mass.sum(axis=1) > 1 + tol) or summary.beta.sum() > 1 + tol:
        raise ValueError("invalid alpha summary: masses sum above 1")
    weights = np.zeros(n + 1)
    k = np.arange(1, n + 1)
    weights[1:] = _shrink(n) ** (k - 1)
    return summary.mass @ weights


def lemma7_ceiling(n: int) -> float:
    """(1 - 1/n)^(n-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1.0
    return math.exp((n - 1) * math.log1p(-1.0 / n))


def doublecount_sides(summary: AlphaSummary, n: int) -> tuple[float, float]:
    """(sum_e eq1_bound(e), sum_k beta_k k (1 - 1/n)^(k-1))."""
    k = np.arange(0, n + 1)
    rhs = float(np.sum(summary.beta[1:] * k[1:] * _shrink(n) ** (k[1:] - 1)))
    return float(eq1_bound(summary, n).sum()), rhs


def doublecount_identity(summary: AlphaSummary, n: int) -> float:
    lhs, rhs = doublecount_sides(summary, n)
    return abs(lhs - rhs)


@dataclass
class TightnessReport:
    n: int
    scheme: str
    beta: np.ndarray
    bound: np.ndarray
    ceiling: float
    residual: float
    residual_tolerance: float
    closed_form_bound: np.ndarray | None = None
    trials: int | None = None
    seed: int | None = None
    sigma: float = 0.0

    @property
    def min_bound(self) -> float:
        return float(self.bound.min())

    @property
    def gap_to_inv_e(self) -> float:
        return self.min_bound - math.exp(-1)

    @property
    def within_ceiling(self) -> bool:
        return self.min_bound <= self.ceiling + 4 * self.sigma_bound

    @property
    def sigma_bound(self) -> float:
        # per-element bound is a mean of terms in [0, 1]
        if self.trials is None:
            return 0.0
        return 0.5 / math.sqrt(self.trials)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "scheme": self.scheme,
            "trials": self.trials,
            "seed": self.seed,
            "beta": self.beta.tolist(),
            "bound": self.bound.tolist(),
            "closed_form_bound": None if self.closed_form_bound is None else self.closed_form_bound.tolist(),
            "min_bound": self.min_bound,
            "ceiling": self.ceiling,
            "within_ceiling": self.within_ceiling,
            "gap_to_inv_e": self.gap_to_inv_e,
            "doublecount_residual": self.residual,
            "doublecount_tolerance": self.residual_tolerance,
        }

"""Monte Carlo selectability under configurable adversaries.

Trials are grouped in fixed blocks of :data:`BLOCK` consecutive indices and
block ``b`` draws from ``stream(seed, STREAM_SIMULATION, b)``, so trial ``t``
depends only on ``(seed, t)``.  Counts are integers and reduce by summation,
which keeps reports bit-identical for any worker count.
"""

from __future__ import annotations

import enum
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import __version__
from .analysis import AlphaSummary, SelectabilityReport, product_alpha_summary
from .constraints import Instance, RankOneConstraint, TransversalConstraint
from .rng import STREAM_ALPHA, STREAM_SIMULATION, stream
from .schemes import (
    ENUM_CAP,
    EnumerationTooLarge,
    FamilyRealization,
    SchemeKind,
    can_always_add,
    check_compatible,
    inclusion_probabilities,
    run_online,
)

BLOCK = 1 << 14
#: exhaustive ordering search is limited to this many active elements
ORDER_SEARCH_CAP = 8


class AdversaryKind(str, enum.Enum):
    FIXED_ORDER = "fixed-order"
    ELEMENT_LAST = "element-last"
    ALMIGHTY = "almighty-exhaustive"


@dataclass(frozen=True)
class TrialPlan:
    instance: Instance
    scheme: SchemeKind
    adversary: AdversaryKind
    trials: int
    seed: int
    instance_id: str = "instance"
    order: tuple[int, ...] | None = None   # fixed-order adversary; default index order
    z: float = 3.0
    enum_cap: int = ENUM_CAP

    def __post_init__(self):
        object.__setattr__(self, "scheme", check_compatible(self.scheme, self.instance.constraint))
        object.__setattr__(self, "adversary", AdversaryKind(self.adversary))
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.order is not None and sorted(self.order) != list(range(self.instance.n)):
            raise ValueError("order must be a permutation of the ground set")

    def describe(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "scheme": self.scheme.value,
            "adversary": self.adversary.value,
            "trials": self.trials,
            "seed": self.seed,
            "z": self.z,
            "order": None if self.order is None else list(self.order),
        }


def wilson_interval(successes, trials: int, z: float = 3.0):
    """Wilson score interval for a binomial proportion (vectorised)."""
    k = np.asarray(successes, dtype=float)
    p = k / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return np.clip(centre - half, 0.0, 1.0), np.clip(centre + half, 0.0, 1.0)


# ---------------------------------------------------------------------------
# per-block simulation


def _coin_layout(instance: Instance):
    """Edge list ``[(u, v), ...]`` in the order coins are drawn."""
    c = instance.constraint
    if isinstance(c, TransversalConstraint):
        return [(u, v) for v, nbrs in enumerate(c.right_neighbourhoods()) for u in nbrs]
    return [(u, None) for u in range(c.n)]


def _draw_block(plan: TrialPlan, block: int):
    """Activity and family coins of one full block of trials."""
    inst = plan.instance
    rng = stream(plan.seed, STREAM_SIMULATION, block)
    x = inst.point()
    active = rng.random((BLOCK, inst.n)) < x
    q = inclusion_probabilities(inst, plan.scheme)
    layout = _coin_layout(inst)
    coin_q = np.array([q[u] for u, _ in layout])
    coins = rng.random((BLOCK, len(layout))) < coin_q
    return active, coins, layout


def _counts_single(plan: TrialPlan, active, kept, order) -> np.ndarray:
    """Success counts per element for rank-one / partition families."""
    c = plan.instance.constraint
    n = c.n
    hot = active & kept
    part_of = np.zeros(n, dtype=np.int64)
    for j, part in enumerate(c.parts):
        part_of[list(part)] = j
    counts = np.zeros(n, dtype=np.int64)
    if plan.adversary is AdversaryKind.FIXED_ORDER:
        pos = np.empty(n, dtype=np.int64)
        pos[list(order)] = np.arange(n)
    for e in range(n):
        rivals = (part_of == part_of[e])
        rivals[e] = False
        if plan.adversary is AdversaryKind.FIXED_ORDER:
            rivals &= pos < pos[e]
        blocked = hot[:, rivals].any(axis=1)
        counts[e] = int(np.count_nonzero(kept[:, e] & ~blocked))
    return counts


def _realization(c: TransversalConstraint, layout, row) -> FamilyRealization:
    per_right = [0] * c.right_count
    for (u, v), b in zip(layout, row):
        if b:
            per_right[v] |= 1 << u
    return FamilyRealization(c, per_right=tuple(per_right))


def _counts_transversal(plan: TrialPlan, active, coins, layout, order) -> np.ndarray:
    c = plan.instance.constraint
    n = c.n
    counts = np.zeros(n, dtype=np.int64)
    masks = active.astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))
    for t in range(active.shape[0]):
        real = _realization(c, layout, coins[t])
        a = int(masks[t])
        for e in range(n):
            forced = a | (1 << e)
            if plan.adversary is AdversaryKind.ALMIGHTY:
                ok = can_always_add(real, forced, e)
            elif plan.adversary is AdversaryKind.ELEMENT_LAST:
                seq = [i for i in range(n) if i != e] + [e]
                ok = bool(run_online(real, forced, seq) >> e & 1)
            else:
                ok = bool(run_online(real, forced, order) >> e & 1)
            counts[e] += ok
    return counts


def _simulate_range(plan: TrialPlan, start: int, stop: int) -> np.ndarray:
    """Success counts for trials ``start <= t < stop``."""
    counts = np.zeros(plan.instance.n, dtype=np.int64)
    order = plan.order or tuple(range(plan.instance.n))
    t = start
    while t < stop:
        block, off = divmod(t, BLOCK)
        hi = min(stop - block * BLOCK, BLOCK)
        active, coins, layout = _draw_block(plan, block)
        active, coins = active[off:hi], coins[off:hi]
        if isinstance(plan.instance.constraint, TransversalConstraint):
            counts += _counts_transversal(plan, active, coins, layout, order)
        else:
            counts += _counts_single(plan, active, coins, order)
        t = block * BLOCK + hi
    return counts


def _ranges(trials: int, workers: int):
    blocks = math.ceil(trials / BLOCK)
    per = math.ceil(blocks / max(1, workers))
    out = []
    for w in range(0, blocks, per):
        out.append((w * BLOCK, min(trials, (w + per) * BLOCK)))
    return out


def monte_carlo_selectability(plan: TrialPlan, workers: int = 1, threshold: float | None = None) -> SelectabilityReport:
    """Estimate, for each element e forced active, the frequency of the
    adversary-specific success event; Wilson intervals at ``plan.z``."""
    inst = plan.instance
    if plan.adversary is AdversaryKind.ALMIGHTY and inst.n > plan.enum_cap \
            and isinstance(inst.constraint, TransversalConstraint):
        raise EnumerationTooLarge(f"n = {inst.n} exceeds the almighty-exhaustive cap {plan.enum_cap}")
    t0 = time.perf_counter()
    ranges = _ranges(plan.trials, workers)
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_range, [plan] * len(ranges), *zip(*ranges)))
    else:
        parts = [_simulate_range(plan, a, b) for a, b in ranges]
    counts = np.sum(parts, axis=0)
    lo, hi = wilson_interval(counts, plan.trials, plan.z)
    meta = plan.describe()
    meta.update(successes=counts.tolist(), wall_time=time.perf_counter() - t0, workers=workers)
    return SelectabilityReport(inst.point(), counts / plan.trials, "monte-carlo", threshold, lo, hi, meta)


def run_manifest(plan: TrialPlan, wall_time: float, workers: int = 1) -> dict:
    return {
        "plan": plan.describe(),
        "instance": plan.instance.to_dict(),
        "library": "greedy_ocrs",
        "version": __version__,
        "workers": workers,
        "wall_time": wall_time,
    }


# ---------------------------------------------------------------------------
# alpha estimation


class AlphaEstimate(NamedTuple):
    sampled: AlphaSummary
    closed_form: AlphaSummary | None


def estimate_alpha(instance: Instance, scheme: SchemeKind | str, trials: int, seed: int) -> AlphaEstimate:
    """Sample kept sets and tabulate per-element, per-size masses.

    The sampled summary records the standard error of the double-counted
    total sum_k beta_k k (1 - 1/n)^(k-1) in ``total_sigma``.
    """
    if not isinstance(instance.constraint, RankOneConstraint):
        raise ValueError(f"alpha estimation needs a rank1 instance, got {instance.kind}")
    scheme = check_compatible(scheme, instance.constraint)
    q = inclusion_probabilities(instance, scheme)
    n = instance.n
    mass = np.zeros((n, n + 1), dtype=np.int64)
    size_counts = np.zeros(n + 1, dtype=np.int64)
    shrink = 1.0 - 1.0 / n
    weight = np.zeros(n + 1)
    weight[1:] = np.arange(1, n + 1) * shrink ** np.arange(0, n)
    s1 = s2 = 0.0
    done = 0
    block = 0
    while done < trials:
        rng = stream(seed, STREAM_ALPHA, block)
        kept = rng.random((BLOCK, n)) < q
        kept = kept[: min(BLOCK, trials - done)]
        sizes = kept.sum(axis=1)
        size_counts += np.bincount(sizes, minlength=n + 1)
        for e in range(n):
            mass[e] += np.bincount(sizes[kept[:, e]], minlength=n + 1)
        y = weight[sizes]
        s1 += float(y.sum())
        s2 += float((y * y).sum())
        done += kept.shape[0]
        block += 1
    mean = s1 / trials
    var = max(s2 / trials - mean * mean, 0.0)
    sampled = AlphaSummary(n, mass / trials, size_counts / trials, exact=False, trials=trials,
                           total_sigma=math.sqrt(var / trials))
    return AlphaEstimate(sampled, product_alpha_summary(q))


# ---------------------------------------------------------------------------
# orderings


class OrderSearch(NamedTuple):
    selected: bool
    exhaustive: bool


def worst_order_search(realization: FamilyRealization, active: int, e: int,
                       cap: int = ORDER_SEARCH_CAP) -> OrderSearch:
    """Whether e is selected under the worst arrival order (e forced active)."""
    c = realization.constraint
    n = c.n
    forced = active | (1 << e)
    if not isinstance(c, TransversalConstraint):
        seq = [i for i in range(n) if i != e] + [e]
        return OrderSearch(bool(run_online(realization, forced, seq) >> e & 1), True)
    act = [i for i in range(n) if forced >> i & 1]
    idle = [i for i in range(n) if not forced >> i & 1]
    if len(act) > cap:
        seq = [i for i in range(n) if i != e] + [e]
        return OrderSearch(bool(run_online(realization, forced, seq) >> e & 1), False)
    for perm in itertools.permutations(act):
        if not run_online(realization, forced, list(perm) + idle) >> e & 1:
            return OrderSearch(False, True)
    return OrderSearch(True, True)

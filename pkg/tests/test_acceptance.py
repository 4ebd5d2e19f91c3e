"""Acceptance suite.  Each test prints one PASS/FAIL line, and the lines are
collected again in the terminal summary."""

import json
import math
import time

import numpy as np

from greedy_ocrs.analysis import (
    brute_force_selectability,
    exact_selectability,
    exact_selectability_rank1,
    lemma7_ceiling,
)
from greedy_ocrs.cli import main as cli_main
from greedy_ocrs.constraints import Instance, PartitionConstraint, RankOneConstraint, TransversalConstraint
from greedy_ocrs.inequalities import INV_E, ONE_MINUS_INV_E, transversal_bounds
from greedy_ocrs.instances import gen_random_partition, gen_random_rank1, gen_random_transversal, gen_uniform_rank1
from greedy_ocrs.schemes import inclusion_probabilities, q_exponential, q_linear, q_transversal
from greedy_ocrs.simulate import TrialPlan, monte_carlo_selectability, wilson_interval

UNLIMITED = 1 << 62


def test_single_item_guarantee(report_line):
    t0 = time.perf_counter()
    worst = math.inf
    instances = [gen_random_rank1(1 + s % 12, s) for s in range(10_000)]
    instances += [gen_uniform_rank1(n) for n in range(2, 101)]
    for inst in instances:
        worst = min(worst, float(exact_selectability(inst, "linear").min()))
    elapsed = time.perf_counter() - t0
    ok = worst >= INV_E and elapsed < 10
    assert report_line(1, ok, f"min linear selectability {worst:.9f} >= 1/e over {len(instances)} instances "
                              f"in {elapsed:.2f}s")


def test_oracle_equivalence(report_line):
    t0 = time.perf_counter()
    worst = 0.0
    for s in range(100):
        inst = gen_random_rank1(1 + s % 6, 1000 + s)
        for scheme in ("linear", "exponential", "halving"):
            closed = exact_selectability(inst, scheme)
            brute = [brute_force_selectability(inst, scheme, e) for e in range(inst.n)]
            worst = max(worst, float(np.max(np.abs(closed - brute))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 60
    assert report_line(2, ok, f"max |brute force - closed form| = {worst:.2e} on 100 instances x 3 schemes "
                              f"in {elapsed:.2f}s")


def test_monte_carlo_soundness(report_line):
    t0 = time.perf_counter()
    plan = TrialPlan(gen_uniform_rank1(10), "linear", "element-last", 10**6, seed=42)
    rep = monte_carlo_selectability(plan)
    exact = 0.38687
    elapsed = time.perf_counter() - t0
    inside = (rep.lower <= exact) & (exact <= rep.upper)
    ok = bool(inside.all()) and elapsed < 30
    assert report_line(3, ok, f"estimates {rep.probability.min():.5f}..{rep.probability.max():.5f}, "
                              f"3-sigma half width {rep.half_width.max():.5f}, {int(inside.sum())}/10 "
                              f"intervals contain {exact} ({elapsed:.2f}s)")


def test_halving_baseline(report_line):
    floor = math.inf
    for s in range(1000):
        floor = min(floor, float(exact_selectability(gen_random_rank1(1 + s % 12, s), "halving").min()))
    brute_gap = 0.0
    for n in range(1, 6):
        inst = gen_uniform_rank1(n)
        closed = exact_selectability(inst, "halving")
        brute = [brute_force_selectability(inst, "halving", e) for e in range(n)]
        brute_gap = max(brute_gap, float(np.max(np.abs(closed - brute))))
    at50 = float(exact_selectability(gen_uniform_rank1(50), "halving")[0])
    ok = floor >= 0.25 and at50 < INV_E and brute_gap <= 1e-12
    assert report_line(4, ok, f"halving min {floor:.6f} >= 0.25 on 1000 instances; uniform n=50 gives "
                              f"{at50:.7f} < 1/e; brute force agrees to {brute_gap:.1e} for n <= 5")


def test_partition_extension(report_line):
    worst = math.inf
    brute_gap = 0.0
    for s in range(1000):
        n = 2 + s % 11
        inst = gen_random_partition(n, 1 + s % n, s)
        for scheme in ("partition-linear", "partition-exponential"):
            p = exact_selectability(inst, scheme)
            worst = min(worst, float(p.min()))
            if n <= 5 and s % 10 == 0:
                brute = [brute_force_selectability(inst, scheme, e) for e in range(n)]
                brute_gap = max(brute_gap, float(np.max(np.abs(p - brute))))
                worst = min(worst, min(brute))

    bitwise = True
    for s in range(50):
        r = gen_random_rank1(1 + s % 9, s)
        p = Instance(PartitionConstraint(r.n, (tuple(range(r.n)),)), r.x)
        for base in ("linear", "exponential"):
            bitwise &= np.array_equal(exact_selectability(r, base), exact_selectability(p, f"partition-{base}"))
            a = monte_carlo_selectability(TrialPlan(r, base, "element-last", 5000, seed=s))
            b = monte_carlo_selectability(TrialPlan(p, f"partition-{base}", "element-last", 5000, seed=s))
            bitwise &= np.array_equal(a.probability, b.probability)
    ok = worst >= INV_E and bitwise and brute_gap <= 1e-12
    assert report_line(5, ok, f"partition min {worst:.6f} >= 1/e on 1000 instances; one-part results "
                              f"{'bitwise equal' if bitwise else 'DIFFER'} to rank-1; brute force gap {brute_gap:.1e}")


def test_tightness(report_line, tmp_path, capsys):
    t0 = time.perf_counter()
    code = cli_main(["tightness", "--n", "5", "--trials", str(10**6), "--seed", "0", "--out", str(tmp_path / "t")])
    elapsed = time.perf_counter() - t0
    doc = json.loads((tmp_path / "t.json").read_text())
    sampled = min(doc["bound"])
    closed = min(doc["closed_form_bound"])
    sigma = 0.5 / math.sqrt(10**6)
    ceiling_big = lemma7_ceiling(10**6)
    ok = (
        code == 0
        and abs(closed - 0.40691) <= 5e-6
        and abs(sampled - closed) <= 4 * sigma
        and sampled <= doc["ceiling"]
        and abs(doc["ceiling"] - 0.4096) <= 1e-12
        and abs(doc["doublecount_residual"]) <= doc["doublecount_tolerance"]
        and abs(ceiling_big - INV_E) <= 1e-6
        and elapsed < 60
    )
    assert report_line(6, ok, f"n=5 bound {sampled:.6f} (closed form {closed:.6f}) <= ceiling {doc['ceiling']:.4f}; "
                              f"residual {abs(doc['doublecount_residual']):.1e} vs 4-sigma {doc['doublecount_tolerance']:.1e}; "
                              f"ceiling(10^6) - 1/e = {ceiling_big - INV_E:.1e} ({elapsed:.1f}s)")


def _transversal_graphs(count):
    for s in range(count):
        nu, nv = 1 + s % 6, 1 + (s // 6) % 5
        yield gen_random_transversal(nu, nv, 1 + (s // 30) % nv, 5000 + s)


def test_transversal_guarantee(report_line):
    t0 = time.perf_counter()
    floor, floor3 = math.inf, math.inf
    violations = []
    instances = list(_transversal_graphs(200))
    for idx, inst in enumerate(instances):
        g = inst.constraint
        deg3 = min(g.degrees()) >= 3
        for u in range(g.n):
            p = brute_force_selectability(inst, "transversal", u, max_size=UNLIMITED)
            floor = min(floor, p)
            if deg3:
                floor3 = min(floor3, p)
            bound = transversal_bounds(g, inst.x, u).lower_bound
            if p < bound:
                violations.append((idx, u, p, bound))
    elapsed = time.perf_counter() - t0
    ok_floor = floor >= INV_E - 1e-12
    ok_deg3 = floor3 >= ONE_MINUS_INV_E - 1e-12
    ok_pointwise = not violations
    n_deg3 = sum(min(i.constraint.degrees()) >= 3 for i in instances)
    detail = (f"min {floor:.6f} >= 1/e; min-degree>=3 ({n_deg3} graphs) min {floor3:.6f} >= 1-1/e; "
              f"{len(violations)} element(s) below the per-element bound")
    if violations:
        idx, u, p, b = min(violations, key=lambda v: v[2] - v[3])
        detail += f", worst graph {idx} element {u}: {p:.6f} < {b:.6f}"
    detail += f" ({elapsed:.1f}s)"
    ok = ok_floor and ok_deg3 and ok_pointwise and elapsed < 300
    assert report_line(7, ok, detail)


def test_inequality_suite(report_line, capsys):
    code = cli_main(["verify"])
    out = capsys.readouterr().out
    summary = out.strip().splitlines()[-1]
    assert report_line(8, code == 0, f"verify: {summary}")


def test_degeneracy(report_line):
    xs = np.linspace(0.0, 1.0, 10_001)
    gap = float(np.max(np.abs(q_transversal(xs, 1) - q_exponential(xs))))
    g = TransversalConstraint(4, 4, ((0,), (1,), (2,), (3,)))
    inst = Instance(g, (0.0, 0.3, 0.7, 1.0))
    e_inst = Instance(RankOneConstraint(4), (0.0, 0.3, 0.7, 1.0))
    marg = float(np.max(np.abs(inclusion_probabilities(inst, "transversal")
                               - inclusion_probabilities(e_inst, "exponential"))))
    pos = xs[1:]
    diff = q_exponential(pos) - q_linear(pos)
    ok = gap <= 1e-12 and marg <= 1e-12 and bool(np.all(diff > 0)) and q_exponential(0.0) == q_linear(0.0)
    assert report_line(9, ok, f"degree-1 transversal vs exponential q max gap {gap:.1e}; "
                              f"q_exp - q_lin min {diff.min():.2e} > 0 on (0, 1]")

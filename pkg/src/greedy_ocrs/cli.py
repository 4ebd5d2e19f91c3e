"""Command-line entry point: ``greedy-ocrs {gen,run,exact,tightness,verify}``.

Exit codes: 0 success, 1 a checked assertion failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .analysis import (
    BRUTE_FORCE_CAP,
    TightnessReport,
    brute_force_report,
    closed_form_report,
    doublecount_identity,
    eq1_bound,
    lemma7_ceiling,
)
from .constraints import InstanceError, RankOneConstraint, load_instance
from .inequalities import verify_suite
from .instances import gen_random_partition, gen_random_rank1, gen_random_transversal, gen_uniform_rank1
from .schemes import EnumerationTooLarge, SchemeKind, SchemeMismatch
from .simulate import AdversaryKind, TrialPlan, estimate_alpha, monte_carlo_selectability, run_manifest

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_threshold(text: str) -> float:
    t = text.replace(" ", "").lower()
    if t == "1/e":
        return math.exp(-1)
    if t == "1-1/e":
        return -math.expm1(-1)
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"threshold must be a decimal, '1/e' or '1-1/e', got {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {v}")
    return v


def _write(stem: str, suffix: str, text: str) -> Path:
    path = Path(f"{stem}{suffix}")
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    path.write_text(text)
    return path


def _stem(out: str) -> str:
    return out[:-5] if out.endswith(".json") else out


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    if args.family == "rank1-uniform":
        inst = gen_uniform_rank1(args.n)
    elif args.family == "rank1-random":
        inst = gen_random_rank1(args.n, args.seed, args.slack)
    elif args.family == "partition":
        if args.parts > args.n:
            raise UsageError("--parts must not exceed --n")
        inst = gen_random_partition(args.n, args.parts, args.seed, args.slack)
    else:
        if args.min_deg > args.nv:
            raise UsageError("--min-deg must not exceed --nv")
        inst = gen_random_transversal(args.nu, args.nv, args.min_deg, args.seed)
    path = Path(args.out)
    path.write_text(inst.to_json() + "\n")
    check = inst.check()
    print(path)
    print("valid" if check else f"INVALID: {check.violated} (slack {check.slack:.3e})")
    return EXIT_OK if check else EXIT_FAIL


def _print_report(report, tolerance=0.0):
    ok = report.passes(tolerance)
    hw = report.half_width
    for i, p in enumerate(report.probability):
        extra = "" if hw is None else f" +/- {hw[i]:.6f}"
        flag = "" if report.threshold is None else ("  ok" if ok[i] else "  FAIL")
        print(f"  e{i}: {p:.6f}{extra}{flag}")


def cmd_run(args) -> int:
    inst = load_instance(args.instance)
    order = None
    if args.order:
        order = tuple(int(v) for v in args.order.split(","))
    plan = TrialPlan(inst, SchemeKind(args.scheme), AdversaryKind(args.adversary), args.trials, args.seed,
                     instance_id=Path(args.instance).stem, order=order, z=args.z)
    report = monte_carlo_selectability(plan, workers=args.workers, threshold=args.assert_threshold)
    stem = _stem(args.out)
    manifest = run_manifest(plan, report.meta["wall_time"], args.workers)
    _write(stem, ".json", report.to_json(args.tolerance))
    _write(stem, ".csv", report.to_csv(args.tolerance))
    _write(stem, ".manifest.json", json.dumps(manifest, indent=2))
    print(f"{plan.scheme.value} / {plan.adversary.value}, {plan.trials} trials, seed {plan.seed}")
    _print_report(report, args.tolerance)
    print(f"wrote {stem}.json {stem}.csv {stem}.manifest.json")
    if args.assert_threshold is not None and not report.passes(args.tolerance).all():
        print(f"lower confidence bound below threshold {args.assert_threshold:.6f}")
        return EXIT_FAIL
    return EXIT_OK


def cmd_exact(args) -> int:
    t0 = time.perf_counter()
    inst = load_instance(args.instance)
    scheme = SchemeKind(args.scheme)
    method = args.method
    if method is None:
        method = "brute-force" if inst.kind == "transversal" else "both"
    reports = {}
    if method in ("closed-form", "both"):
        if inst.kind == "transversal":
            raise UsageError("no closed form for the transversal scheme; use --method brute-force")
        reports["closed-form"] = closed_form_report(inst, scheme, args.assert_threshold)
    if method in ("brute-force", "both"):
        try:
            reports["brute-force"] = brute_force_report(inst, scheme, args.assert_threshold, args.max_size)
        except EnumerationTooLarge as exc:
            print(f"{exc}; estimate with `greedy-ocrs run` instead", file=sys.stderr)
            return EXIT_USAGE
    stem = _stem(args.out)
    main = reports.get("brute-force") or reports["closed-form"]
    doc = {name: r.to_dict() for name, r in reports.items()}
    if len(reports) == 2:
        doc["max_abs_difference"] = float(np.max(np.abs(reports["brute-force"].probability
                                                        - reports["closed-form"].probability)))
    _write(stem, ".json", json.dumps(doc, indent=2))
    _write(stem, ".csv", main.to_csv())
    _write(stem, ".manifest.json", json.dumps({
        "command": "exact", "instance": inst.to_dict(), "scheme": scheme.value, "method": method,
        "wall_time": time.perf_counter() - t0,
    }, indent=2))
    for name, r in reports.items():
        print(f"{name}:")
        _print_report(r)
    if args.assert_threshold is not None and not all(r.passes().all() for r in reports.values()):
        return EXIT_FAIL
    return EXIT_OK


def tightness_report(inst, scheme, trials: int, seed: int) -> TightnessReport:
    est = estimate_alpha(inst, scheme, trials, seed)
    n = inst.n
    s = est.sampled
    return TightnessReport(
        n=n,
        scheme=SchemeKind(scheme).value,
        beta=s.beta,
        bound=eq1_bound(s, n),
        ceiling=lemma7_ceiling(n),
        residual=doublecount_identity(s, n),
        residual_tolerance=4 * s.total_sigma,
        closed_form_bound=eq1_bound(est.closed_form, n),
        trials=trials,
        seed=seed,
    )


def cmd_tightness(args) -> int:
    t0 = time.perf_counter()
    if args.instance:
        inst = load_instance(args.instance)
        if not isinstance(inst.constraint, RankOneConstraint):
            raise UsageError(f"tightness needs a rank1 instance, got {inst.kind}")
    elif args.n:
        inst = gen_uniform_rank1(args.n)
    else:
        raise UsageError("give --n or --instance")
    rep = tightness_report(inst, args.scheme, args.trials, args.seed)
    stem = _stem(args.out)
    _write(stem, ".json", json.dumps(rep.to_dict(), indent=2))
    _write(stem, ".manifest.json", json.dumps({
        "command": "tightness", "instance": inst.to_dict(), "scheme": rep.scheme, "trials": args.trials,
        "seed": args.seed, "wall_time": time.perf_counter() - t0,
    }, indent=2))
    print(f"n = {rep.n}, scheme {rep.scheme}, {rep.trials} samples, seed {rep.seed}")
    print(f"  min element bound     {rep.min_bound:.6f}  (closed form {rep.closed_form_bound.min():.6f})")
    print(f"  ceiling (1-1/n)^(n-1) {rep.ceiling:.6f}")
    print(f"  gap to 1/e            {rep.gap_to_inv_e:+.6f}")
    print(f"  double-count residual {rep.residual:.3e} (tolerance {rep.residual_tolerance:.3e})")
    ok = rep.within_ceiling and rep.residual <= max(rep.residual_tolerance, 1e-9)
    print("ok" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    res = verify_suite(seed=args.seed, vectors=args.vectors)
    for c in res.checks:
        line = f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}"
        if not c.passed:
            line += f"  witness={c.witness}"
        print(line)
    print(f"{sum(c.passed for c in res.checks)}/{len(res.checks)} checks passed")
    return EXIT_OK if res.passed else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="greedy-ocrs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write an instance JSON file")
    gsub = g.add_subparsers(dest="family", required=True)
    for name in ("rank1-uniform", "rank1-random", "partition"):
        gp = gsub.add_parser(name)
        gp.add_argument("--n", type=_positive, required=True)
        if name != "rank1-uniform":
            gp.add_argument("--seed", type=_nonneg, default=0)
            gp.add_argument("--slack", type=float, default=0.0)
        if name == "partition":
            gp.add_argument("--parts", type=_positive, required=True)
        gp.add_argument("--out", required=True)
    gt = gsub.add_parser("transversal")
    gt.add_argument("--nu", type=_positive, required=True)
    gt.add_argument("--nv", type=_positive, required=True)
    gt.add_argument("--min-deg", type=_positive, default=1)
    gt.add_argument("--seed", type=_nonneg, default=0)
    gt.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    schemes = [s.value for s in SchemeKind]
    r = sub.add_parser("run", help="Monte Carlo selectability")
    r.add_argument("--instance", required=True)
    r.add_argument("--scheme", choices=schemes, required=True)
    r.add_argument("--adversary", choices=[a.value for a in AdversaryKind], default="element-last")
    r.add_argument("--order", help="comma-separated arrival order for fixed-order")
    r.add_argument("--trials", type=_positive, default=100_000)
    r.add_argument("--seed", type=_nonneg, default=0)
    r.add_argument("--z", type=float, default=3.0)
    r.add_argument("--workers", type=_positive, default=1)
    r.add_argument("--assert-threshold", type=parse_threshold)
    r.add_argument("--tolerance", type=float, default=0.0)
    r.add_argument("--out", default="report")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("exact", help="closed-form and/or exhaustive selectability")
    e.add_argument("--instance", required=True)
    e.add_argument("--scheme", choices=schemes, required=True)
    e.add_argument("--method", choices=["closed-form", "brute-force", "both"])
    e.add_argument("--max-size", type=_positive, default=BRUTE_FORCE_CAP)
    e.add_argument("--assert-threshold", type=parse_threshold)
    e.add_argument("--out", default="exact")
    e.set_defaults(func=cmd_exact)

    t = sub.add_parser("tightness", help="upper bound on any greedy scheme at x = 1/n")
    t.add_argument("--n", type=_positive)
    t.add_argument("--instance")
    t.add_argument("--scheme", choices=["halving", "linear", "exponential"], default="linear")
    t.add_argument("--trials", type=_positive, default=1_000_000)
    t.add_argument("--seed", type=_nonneg, default=0)
    t.add_argument("--out", default="tightness")
    t.set_defaults(func=cmd_tightness)

    v = sub.add_parser("verify", help="inequality grid sweeps")
    v.add_argument("--seed", type=_nonneg, default=0)
    v.add_argument("--vectors", type=_positive, default=10_000)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except SchemeMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, EnumerationTooLarge, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``trupretar {gen,run,demo,verify,guideline}``."""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .baselines import run_optimal_matching_demo, run_singer_adapted_demo, run_vcg_demo
from .experiment import ConfigError, run_experiment
from .instances import GridWorld, InstanceConfig, fixture, generate_instance, write_instance
from .mechanism import budget_guideline, run_trupretar
from .verify import (
    check_revenue_bounds,
    oracle_opt_matching,
    random_case,
    random_graph_instance,
    random_generated_instance,
    random_budget,
    trupretar_mechanism,
    verify_axioms,
    verify_truthfulness,
)


def _outcome_line(label, outcome, budget=None):
    pays = ", ".join(f"{u}:{p:g}" for u, p in sorted(outcome.payments.items()))
    line = (
        f"{label}: matches {sorted(outcome.matches)} payments {{{pays}}} "
        f"revenue {outcome.revenue:g} profit {outcome.profit:g} total payment {outcome.total_payment:g}"
    )
    if budget is not None:
        line += f" (budget {budget:g}{', EXCEEDED' if outcome.total_payment > budget + 1e-9 else ''})"
    return line


def demo(name: str, out=None) -> str:
    """Human-readable walk-through of a fixture."""
    instance, bid_sets, budget = fixture(name)
    lines = [f"fixture {name}: budget {budget:g}"]
    lines.append("  users " + ", ".join(f"{u.id}(c={u.cost:g})" for u in instance.users))
    lines.append("  tasks " + ", ".join(f"{t.id}(r={t.revenue:g})" for t in instance.tasks))
    lines.append("  edges " + " ".join(f"({u},{t})" for u, t in sorted(instance.edges)))
    truthful = bid_sets["truthful"]
    if name == "fig1a":
        lines.append(_outcome_line("VCG", run_vcg_demo(instance, truthful), budget))
    elif name == "fig1b":
        for label, bids in bid_sets.items():
            lines.append(_outcome_line(f"adapted Singer [{label}]", run_singer_adapted_demo(instance, bids, budget)))
    elif name == "fig1c":
        for label, bids in bid_sets.items():
            lines.append(_outcome_line(f"optimal matching [{label}]", run_optimal_matching_demo(instance, bids, budget)))
    outcome = run_trupretar(instance, truthful, budget, record_trace=True)
    lines.append("TruPreTar trace:")
    lines += [f"  {kind:<9} {msg}" for kind, msg in outcome.trace]
    lines.append(_outcome_line("TruPreTar", outcome, budget))
    if name.startswith("sqrt2"):
        lines.append(f"oracle optimum revenue {oracle_opt_matching(instance, truthful):g} vs TruPreTar {outcome.revenue:g}")
    text = "\n".join(lines)
    print(text, file=out or sys.stdout)
    return text


def verify_suites(cases: int, truth_cases: int, seed: int, out=None) -> int:
    """Randomized axiom, revenue-bound and truthfulness checks; returns the failure count."""
    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    failures = 0
    tight = sufficient = 0
    for k in range(cases):
        instance, bids, budget = random_case(rng)
        outcome = run_trupretar(instance, bids, budget, seed=k)
        if not verify_axioms(outcome, instance, bids, budget).ok:
            failures += 1
        if outcome.budget_gate_fired:
            tight += 1
            failures += not check_revenue_bounds(outcome, instance, budget, True).ok
        elif budget >= (len(instance.tasks) + 1) * instance.max_revenue:
            sufficient += 1
            opt = oracle_opt_matching(instance, bids)
            failures += not check_revenue_bounds(outcome, instance, budget, False, opt).ok
    print(f"axioms + revenue bounds: {cases} cases ({tight} tight, {sufficient} sufficient), failures so far {failures}", file=out)
    violations = 0
    for k in range(truth_cases):
        if k % 2:
            instance = random_graph_instance(rng, max_users=8, max_tasks=6)
        else:
            instance = random_generated_instance(rng, max_users=8, max_locations=5)
        violations += len(verify_truthfulness(trupretar_mechanism(k), instance, random_budget(rng, instance)))
    print(f"truthfulness: {truth_cases} instances, {violations} violations", file=out)
    return failures + violations


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trupretar", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance file")
    g.add_argument("out")
    g.add_argument("--users", type=int, default=200)
    g.add_argument("--locations", type=int, default=60)
    g.add_argument("--range", dest="range_h", type=float, default=600.0)
    g.add_argument("--cost-upper", type=float, default=5.0)
    g.add_argument("--gamma", type=float, default=300.0)
    g.add_argument("--base-supply", type=int, default=3)
    g.add_argument("--budget", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--world-seed", type=int, default=2017)
    g.add_argument("--concentration", type=float, default=0.3)
    g.add_argument("--demand-weights", default=None, help="file with one weight per grid cell")
    g.add_argument("--drop-zero-tasks", action="store_true")

    r = sub.add_parser("run", help="run an experiment sweep to CSV")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--summary", default=None, help="also write per-cell mean/variance CSV")
    r.add_argument("--gnuplot", default=None, help="also write gnuplot-style data blocks")

    d = sub.add_parser("demo", help="walk through a fixture")
    d.add_argument("fixture")

    v = sub.add_parser("verify", help="run the randomized property suites")
    v.add_argument("--cases", type=int, default=1000)
    v.add_argument("--truth-cases", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)

    gl = sub.add_parser("guideline", help="budget = beta * R_suf")
    gl.add_argument("revenue_sufficient", type=float)
    gl.add_argument("beta", type=float)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            world = (
                GridWorld.from_file(args.demand_weights)
                if args.demand_weights
                else GridWorld.random(seed=args.world_seed, concentration=args.concentration)
            )
            config = InstanceConfig(
                n_users=args.users, n_locations=args.locations, range_h=args.range_h,
                cost_upper=args.cost_upper, gamma=args.gamma, base_supply=args.base_supply,
                seed=args.seed, drop_zero_tasks=args.drop_zero_tasks,
            )
            instance = generate_instance(config, world)
            write_instance(args.out, instance, args.budget)
            print(f"wrote {len(instance.users)} users, {len(instance.tasks)} tasks, {len(instance.edges)} edges to {args.out}")
        elif args.command == "run":
            t0 = time.perf_counter()
            result = run_experiment(args.config, args.out, args.summary, args.gnuplot)
            for s in result.summary:
                print(
                    f"{s['mechanism']:<15} m={s['m']:<3} h={s['h']:<6g} B={s['B']:<6g} "
                    f"revenue {s['revenue_mean']:8.2f} (var {s['revenue_var']:8.2f})  "
                    f"profit {s['profit_mean']:8.2f} (var {s['profit_var']:8.2f})"
                )
            print(f"{len(result.rows)} rows -> {args.out} in {time.perf_counter() - t0:.1f}s")
            for err in result.errors:
                print(f"error: {err}", file=sys.stderr)
            return 1 if result.errors else 0
        elif args.command == "demo":
            demo(args.fixture)
        elif args.command == "verify":
            return 1 if verify_suites(args.cases, args.truth_cases, args.seed) else 0
        elif args.command == "guideline":
            budget = budget_guideline(args.revenue_sufficient, args.beta)
            print(json.dumps({"budget": budget, "guaranteed_fraction_of_optimum": args.beta / 2}))
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

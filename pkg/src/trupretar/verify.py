"""Optimality oracles and property checkers for auction outcomes.

The oracles are exact: :func:`oracle_opt_matching` solves a rectangular
assignment problem, :func:`oracle_budgeted_opt` runs a branch-and-bound over
tasks. :func:`enumerate_matchings` is the slow, obviously-correct reference
both are cross-checked against in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from itertools import combinations
from typing import Callable, Iterator

import numpy as np
from scipy.optimize import linear_sum_assignment

from .instances import GridWorld, InstanceConfig, generate_instance
from .mechanism import prune_edges, run_trupretar
from .model import MONEY_TOL, AuctionOutcome, BidProfile, Instance, Location, Task, User

UTILITY_TOL = 1e-6
PROBE_DELTA = 1e-5
BUDGETED_TASK_LIMIT = 12

Mechanism = Callable[[Instance, BidProfile, float], AuctionOutcome]


def _pruned_edges(instance: Instance, bids: BidProfile) -> frozenset:
    bids.require_users(instance.user_ids)
    return prune_edges(instance.graph(), bids, instance.revenues).edges


def enumerate_matchings(edges) -> Iterator[tuple]:
    """Every matching (including the empty one) of an edge set, as edge tuples."""
    edges = sorted(edges)
    for k in range(len(edges) + 1):
        for subset in combinations(edges, k):
            users = {u for u, _ in subset}
            tasks = {t for _, t in subset}
            if len(users) == k and len(tasks) == k:
                yield subset


def oracle_opt_matching(instance: Instance, bids: BidProfile) -> float:
    """Maximum total task revenue over matchings of the pruned graph, ignoring the budget."""
    edges = _pruned_edges(instance, bids)
    if not edges:
        return 0.0
    users = sorted({u for u, _ in edges})
    tasks = sorted({t for _, t in edges})
    row = {u: k for k, u in enumerate(users)}
    col = {t: k for k, t in enumerate(tasks)}
    revenues = instance.revenues
    w = np.zeros((len(users), len(tasks)))
    for u, t in edges:
        w[row[u], col[t]] = revenues[t]
    r, c = linear_sum_assignment(w, maximize=True)
    return float(w[r, c].sum())


def oracle_budgeted_opt(instance: Instance, bids: BidProfile, budget: float) -> float:
    """Max revenue of a matching whose winners' total bid fits the budget.

    Paying each winner exactly her bid is the cheapest individually rational
    payment, so feasibility reduces to ``sum of winners' bids <= budget``.
    """
    edges = _pruned_edges(instance, bids)
    revenues = instance.revenues
    tasks = sorted({t for _, t in edges}, key=lambda t: -revenues[t])
    if len(tasks) > BUDGETED_TASK_LIMIT:
        raise ValueError(f"budgeted oracle is limited to {BUDGETED_TASK_LIMIT} tasks with edges")
    users_of = {t: sorted((u for u, s in edges if s == t), key=lambda u: bids[u]) for t in tasks}
    suffix = [0.0] * (len(tasks) + 1)
    for k in range(len(tasks) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + revenues[tasks[k]]
    best = 0.0

    def rec(k, used, spent, value):
        nonlocal best
        best = max(best, value)
        if k == len(tasks) or value + suffix[k] <= best + MONEY_TOL:
            return
        t = tasks[k]
        for u in users_of[t]:
            if u not in used and spent + bids[u] <= budget + MONEY_TOL:
                used.add(u)
                rec(k + 1, used, spent + bids[u], value + revenues[t])
                used.discard(u)
        rec(k + 1, used, spent, value)

    rec(0, set(), 0.0, 0.0)
    return best


@dataclass(frozen=True)
class AxiomReport:
    budget_ok: bool
    user_ir_ok: bool
    platform_ir_ok: bool
    matching_ok: bool

    @property
    def ok(self) -> bool:
        return self.budget_ok and self.user_ir_ok and self.platform_ir_ok and self.matching_ok


def verify_axioms(outcome: AuctionOutcome, instance: Instance, bids: BidProfile, budget: float) -> AxiomReport:
    revenues = instance.revenues
    users = [u for u, _ in outcome.matches]
    tasks = [t for _, t in outcome.matches]
    matching_ok = (
        len(set(users)) == len(users)
        and len(set(tasks)) == len(tasks)
        and all(e in instance.edges for e in outcome.matches)
        and set(outcome.payments) == set(users)
    )
    paid = sum(outcome.payments.values())
    return AxiomReport(
        budget_ok=paid <= budget + MONEY_TOL,
        user_ir_ok=all(outcome.payments.get(u, -math.inf) >= bids[u] - MONEY_TOL for u in users),
        platform_ir_ok=all(
            outcome.payments.get(u, math.inf) <= revenues[t] + MONEY_TOL for u, t in outcome.matches
        ),
        matching_ok=matching_ok,
    )


@dataclass(frozen=True)
class RevenueBoundReport:
    branch: str  # "tight" or "sufficient"
    revenue: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.revenue >= self.bound - MONEY_TOL


def check_revenue_bounds(
    outcome: AuctionOutcome, instance: Instance, budget: float, budget_gate_fired: bool, opt: float = 0.0
) -> RevenueBoundReport:
    """Tight budget: revenue >= budget - max task revenue. Otherwise revenue >= opt / 2."""
    if budget_gate_fired:
        return RevenueBoundReport("tight", outcome.revenue, budget - instance.max_revenue)
    return RevenueBoundReport("sufficient", outcome.revenue, opt / 2)


@dataclass(frozen=True)
class Violation:
    user: object
    bid: float
    kind: str  # "utility", "monotonicity" or "threshold"
    gain: float = 0.0


def boundary_grid(instance: Instance, user_id, delta: float = PROBE_DELTA) -> list:
    """Deviation bids for one user: scaled true cost plus every other value +/- delta."""
    cost = instance.costs[user_id]
    grid = {cost * k / 8 for k in range(17)}
    others = [t.revenue for t in instance.tasks] + [u.cost for u in instance.users if u.id != user_id]
    for v in others:
        grid.update((v - delta, v, v + delta))
    return sorted(b for b in grid if b >= 0)


def verify_truthfulness(
    mechanism: Mechanism,
    instance: Instance,
    budget: float,
    deviation_grid=None,
    delta: float = PROBE_DELTA,
    check_threshold: bool = True,
) -> list:
    """Unilateral deviations that pay off, plus monotonicity and threshold breaks.

    Every user's private cost is her ``cost`` in the instance; all others bid
    truthfully while she tries each bid of the grid (an explicit list, or the
    boundary-probing grid when ``None``).
    """
    truthful = instance.truthful_bids()
    base = mechanism(instance, truthful, budget)
    violations = []
    for u in instance.user_ids:
        cost = truthful[u]
        base_utility = base.utility(u, cost)
        grid = sorted(set(deviation_grid)) if deviation_grid is not None else boundary_grid(instance, u, delta)
        wins = []
        for b in grid:
            out = mechanism(instance, truthful.with_bid(u, b), budget)
            gain = out.utility(u, cost) - base_utility
            if gain > UTILITY_TOL:
                violations.append(Violation(u, b, "utility", gain))
            wins.append((b, u in out.payments))
        wins.append((cost, u in base.payments))
        wins.sort(key=lambda p: (p[0], not p[1]))
        lost_at = None
        for b, won in wins:
            if not won and lost_at is None:
                lost_at = b
            elif won and lost_at is not None and b > lost_at:
                violations.append(Violation(u, b, "monotonicity"))
                break
        if check_threshold and u in base.payments:
            p = base.payments[u]
            if u in mechanism(instance, truthful.with_bid(u, p + delta), budget).payments:
                violations.append(Violation(u, p + delta, "threshold"))
            if p - delta >= 0 and u not in mechanism(instance, truthful.with_bid(u, p - delta), budget).payments:
                violations.append(Violation(u, p - delta, "threshold"))
    return violations


def trupretar_mechanism(seed: int = 0) -> Mechanism:
    return partial(run_trupretar, seed=seed)


# --- randomized case generation for the property suites ---------------------


def random_graph_instance(rng: np.random.Generator, max_users=10, max_tasks=8, discrete=None) -> Instance:
    """Random bipartite instance; discrete values (many ties) for about half the draws."""
    n = int(rng.integers(1, max_users + 1))
    k = int(rng.integers(1, max_tasks + 1))
    p = rng.uniform(0.2, 0.9)
    if discrete is None:
        discrete = bool(rng.integers(2))
    if discrete:
        revenues = rng.integers(0, 7, size=k) * 0.5
        costs = rng.integers(0, 7, size=n) * 0.5
    else:
        revenues = rng.uniform(0, 5, size=k)
        costs = rng.uniform(0, 5, size=n)
    users = tuple(User(i, 0.0, 0.0, float(costs[i])) for i in range(n))
    tasks = tuple(Task(j, j, 1, float(revenues[j])) for j in range(k))
    locations = tuple(Location(j, 0.0, 0.0) for j in range(k))
    mask = rng.random((n, k)) < p
    edges = frozenset((int(i), int(j)) for i, j in zip(*np.nonzero(mask)))
    return Instance(users, locations, tasks, edges)


def random_generated_instance(rng: np.random.Generator, max_users=10, max_locations=6) -> Instance:
    """Small instance from the grid/KL generator."""
    world = GridWorld.random(3, 3, 600.0, seed=int(rng.integers(2**31)), concentration=0.5)
    config = InstanceConfig(
        n_users=int(rng.integers(1, max_users + 1)),
        n_locations=int(rng.integers(1, max_locations + 1)),
        range_h=float(rng.choice([300.0, 600.0, 900.0])),
        cost_upper=float(rng.choice([1.0, 2.0, 5.0])),
        gamma=float(rng.choice([10.0, 30.0, 100.0])),
        seed=int(rng.integers(2**31)),
    )
    return generate_instance(config, world)


def random_budget(rng: np.random.Generator, instance: Instance) -> float:
    total = sum(t.revenue for t in instance.tasks)
    mode = rng.integers(3)
    if mode == 0:
        return float(rng.uniform(0, max(total, 1.0)))
    if mode == 1:
        return float(rng.uniform(0, 3 * instance.max_revenue + 1))
    return (len(instance.tasks) + 1) * instance.max_revenue + 1.0


def random_case(rng: np.random.Generator, max_users=10, max_locations=6):
    """One ``(instance, bids, budget)`` triple; bids are truthful or perturbed."""
    if rng.integers(2):
        inst = random_graph_instance(rng, max_users=max_users, max_tasks=max_locations + 2)
    else:
        inst = random_generated_instance(rng, max_users=max_users, max_locations=max_locations)
    bids = inst.truthful_bids()
    if rng.integers(2):
        scale = rng.uniform(0.0, 2.0, size=len(inst.users))
        bids = BidProfile({u.id: u.cost * s for u, s in zip(inst.users, scale)})
    return inst, bids, random_budget(rng, inst)

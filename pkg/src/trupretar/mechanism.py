"""The truthful, budget-feasible reverse auction with predicted task revenue.

Users and tasks are swept together from the highest value (bid or revenue)
down. The sweep maintains a work graph that always has a right-perfect
matching: high-value tasks are admitted while the budget can pay for every
admitted task at the current price, expensive users are dropped whenever
the graph survives without them, and a user is allocated the moment she
becomes indispensable. Every allocation pays the current global price,
which only ever decreases, so each winner is paid her threshold bid.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .bipartite import Graph, WorkGraph
from .model import MONEY_TOL, AuctionOutcome, BidProfile, Instance

TASK = "task"
USER = "user"


@dataclass(frozen=True)
class Element:
    kind: str
    id: object
    value: float

    def __str__(self):
        prefix = "t" if self.kind == TASK else ""
        return f"{prefix}{self.id}"


def prune_edges(graph: Graph, bids, revenues) -> Graph:
    """Drop every edge whose user bids more than the task is worth."""
    missing_bids = [u for u in graph.user_ids if u not in bids]
    missing_revs = [t for t in graph.task_ids if t not in revenues]
    if missing_bids:
        raise ValueError(f"missing bids for users {missing_bids!r}")
    if missing_revs:
        raise ValueError(f"missing revenues for tasks {missing_revs!r}")
    kept = frozenset((u, t) for u, t in graph.edges if bids[u] <= revenues[t])
    return Graph(graph.user_ids, graph.task_ids, kept)


def merged_order(tasks, users, seed: int = 0) -> list:
    """Tasks and users in decreasing value; a task precedes a user of equal value.

    Ties within one kind follow a seeded shuffle. The shuffle runs over the
    id-sorted element list before values are looked at, so an element's tie
    rank does not depend on anybody's bid.
    """
    elements = [Element(TASK, t, float(r)) for t, r in sorted(tasks, key=lambda p: p[0])]
    elements += [Element(USER, u, float(b)) for u, b in sorted(users, key=lambda p: p[0])]
    random.Random(seed).shuffle(elements)
    elements.sort(key=lambda e: (-e.value, 0 if e.kind == TASK else 1))
    return elements


def run_trupretar(
    instance: Instance,
    bids: BidProfile,
    budget: float,
    seed: int = 0,
    record_trace: bool = False,
    observer=None,
) -> AuctionOutcome:
    """Run the auction with the given declared bids.

    ``observer``, if given, is called as ``observer(kind, price, remaining, work)``
    after every admission, deletion and allocation; ``work`` is the live
    :class:`WorkGraph` and must not be modified.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    bids.require_users(instance.user_ids)
    revenues = instance.revenues
    pruned = prune_edges(instance.graph(), bids, revenues)
    task_users = pruned.task_neighbors()
    order = merged_order(revenues.items(), ((u, bids[u]) for u in instance.user_ids), seed)

    work = WorkGraph()
    allocated: dict = {}  # user -> task
    payments: dict = {}
    remaining = float(budget)
    price = None
    gate_fired = False
    trace = []

    def log(kind, msg):
        if record_trace:
            trace.append((kind, msg))
        if observer is not None and kind in ("admit", "delete", "allocate"):
            observer(kind, price, remaining, work)

    if record_trace:
        log("order", " ".join(str(e) for e in order))

    for el in order:
        if el.kind == TASK:
            j, r = el.id, el.value
            if (len(work.task_adj) + 1) * r > remaining + MONEY_TOL:
                gate_fired = True
                log("reject", f"task {j}: budget gate ({len(work.task_adj) + 1}*{r:g} > {remaining:g})")
                continue
            candidates = [u for u in task_users[j] if u not in allocated]
            if not work.try_add_task(j, candidates):
                log("skip", f"task {j}: no right-perfect matching")
                continue
            price = r
            log("admit", f"task {j} with users {candidates}; P={price:g}")
        else:
            i = el.id
            if i not in work or not work.try_remove_user(i):
                continue
            price = bids[i]
            log("delete", f"user {i}; P={price:g}")

        progressed = True
        while progressed:
            progressed = False
            critical = work.critical_users()
            for i in work.users:
                if i not in critical:
                    continue
                for j in sorted(work.user_adj[i]):
                    if work.try_allocate(i, j):
                        break
                else:
                    raise RuntimeError(f"critical user {i!r} has no allocatable edge")
                allocated[i] = j
                payments[i] = price
                remaining -= price
                progressed = True
                log("allocate", f"user {i} -> task {j} at {price:g}; B'={remaining:g}")
                critical = work.critical_users()

    outcome = AuctionOutcome.from_pairs(
        instance, allocated.items(), payments, budget_gate_fired=gate_fired, trace=trace
    )
    log("result", f"revenue {outcome.revenue:g}, profit {outcome.profit:g}")
    return outcome


def budget_guideline(revenue_sufficient: float, beta: float) -> float:
    """Budget ``beta * revenue_sufficient`` for a later, tighter run.

    ``revenue_sufficient`` is the revenue observed under a budget that never
    bound. Since that revenue is at least half the optimum, a budget of
    ``beta * revenue_sufficient`` still guarantees at least ``beta / 2`` of the
    optimal revenue (up to one task's revenue).
    """
    if not 0 < beta <= 2:
        raise ValueError(f"beta must lie in (0, 2], got {beta!r}")
    if revenue_sufficient < 0:
        raise ValueError("revenue_sufficient must be >= 0")
    return beta * revenue_sufficient

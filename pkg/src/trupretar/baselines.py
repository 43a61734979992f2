"""Benchmark mechanisms and the counter-example mechanisms that motivate the auction.

``greedy_matching`` is the allocation-only greedy used in the approximation
argument. ``run_app_opt``, ``run_greedy_auction`` and ``run_surge`` are the
evaluation benchmarks. The three ``*_demo`` mechanisms are deliberately flawed
(budget-infeasible or manipulable) and exist to reproduce those failures.
"""

from __future__ import annotations

import math

from .bipartite import Matching
from .mechanism import prune_edges
from .model import MONEY_TOL, AuctionOutcome, BidProfile, Instance

EXHAUSTIVE_TASK_LIMIT = 20


def _pruned_adjacency(instance: Instance, bids: BidProfile):
    bids.require_users(instance.user_ids)
    pruned = prune_edges(instance.graph(), bids, instance.revenues)
    by_task = pruned.task_neighbors()
    by_user = {u: [] for u in instance.user_ids}
    for u, t in pruned.edges:
        by_user[u].append(t)
    return pruned, by_task, by_user


def greedy_matching(instance: Instance, bids: BidProfile) -> Matching:
    """Give each task, most valuable first, to its lowest-id free neighbour."""
    _, by_task, _ = _pruned_adjacency(instance, bids)
    revenues = instance.revenues
    taken = set()
    pairs = []
    for t in sorted(revenues, key=lambda t: (-revenues[t], t)):
        for u in by_task[t]:
            if u not in taken:
                taken.add(u)
                pairs.append((u, t))
                break
    return Matching(frozenset(pairs))


def run_app_opt(instance: Instance, bids: BidProfile, budget: float) -> AuctionOutcome:
    """Edges by descending revenue/bid, each winner paid exactly her bid."""
    pruned, _, _ = _pruned_adjacency(instance, bids)
    revenues = instance.revenues

    def key(edge):
        u, t = edge
        ratio = math.inf if bids[u] == 0 else revenues[t] / bids[u]
        return (-ratio, t, u)

    remaining = float(budget)
    used_u, used_t = set(), set()
    pairs, payments = [], {}
    for u, t in sorted(pruned.edges, key=key):
        if u in used_u or t in used_t:
            continue
        if bids[u] > remaining + MONEY_TOL:
            break
        used_u.add(u)
        used_t.add(t)
        pairs.append((u, t))
        payments[u] = bids[u]
        remaining -= bids[u]
    return AuctionOutcome.from_pairs(instance, pairs, payments)


def run_greedy_auction(instance: Instance, bids: BidProfile, budget: float) -> AuctionOutcome:
    """Users by ascending bid take their best task; all winners share one price.

    The price is the bid of the first user who is not confirmed, either for
    lack of a feasible task or because confirming the current user at the next
    user's bid would overrun the budget. When everybody would match, the
    highest bidder is left out and prices the rest.
    """
    _, _, by_user = _pruned_adjacency(instance, bids)
    revenues = instance.revenues
    order = sorted(instance.user_ids, key=lambda u: (bids[u], u))
    taken = set()
    winners = []
    price = None
    for k, u in enumerate(order):
        free = [t for t in by_user[u] if t not in taken]
        if not free:
            price = bids[u]
            break
        if k + 1 == len(order):
            price = bids[u]
            break
        if (len(winners) + 1) * bids[order[k + 1]] > budget + MONEY_TOL:
            price = bids[u]
            break
        t = min(free, key=lambda t: (-revenues[t], t))
        taken.add(t)
        winners.append((u, t))
    if price is None:
        return AuctionOutcome()
    return AuctionOutcome.from_pairs(instance, winners, {u: price for u, _ in winners})


def run_surge(instance: Instance, bids: BidProfile, budget: float, alpha: float = 0.8) -> AuctionOutcome:
    """Posted price ``alpha * r_j``: users by ascending bid take the best affordable task."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    bids.require_users(instance.user_ids)
    revenues = instance.revenues
    by_user = {u: [] for u in instance.user_ids}
    for u, t in instance.edges:
        by_user[u].append(t)
    remaining = float(budget)
    taken = set()
    pairs, payments = [], {}
    for u in sorted(instance.user_ids, key=lambda u: (bids[u], u)):
        options = sorted(
            (t for t in by_user[u] if t not in taken and alpha * revenues[t] >= bids[u]),
            key=lambda t: (-revenues[t], t),
        )
        for t in options:
            offer = alpha * revenues[t]
            if offer <= remaining + MONEY_TOL:
                taken.add(t)
                pairs.append((u, t))
                payments[u] = offer
                remaining -= offer
                break
    return AuctionOutcome.from_pairs(instance, pairs, payments)


# --- counter-example mechanisms --------------------------------------------


def _best_matching(users, by_user, weight, allowed=lambda pairs, w: True):
    """Exhaustive search for the max-weight matching; ties go to the lexicographically smallest pair list."""
    best = [-math.inf, None]

    def rec(k, used, pairs, w):
        if k == len(users):
            if not allowed(pairs, w):
                return
            cand = sorted(pairs)
            if w > best[0] + MONEY_TOL or (abs(w - best[0]) <= MONEY_TOL and cand < best[1]):
                best[0], best[1] = w, cand
            return
        u = users[k]
        rec(k + 1, used, pairs, w)
        for t in sorted(by_user[u]):
            if t not in used:
                used.add(t)
                pairs.append((u, t))
                rec(k + 1, used, pairs, w + weight(u, t))
                pairs.pop()
                used.discard(t)

    rec(0, set(), [], 0.0)
    return best[0], best[1]


def run_vcg_demo(instance: Instance, bids: BidProfile) -> AuctionOutcome:
    """Welfare-maximizing matching with Clarke payments; ignores the budget on purpose."""
    _, _, by_user = _pruned_adjacency(instance, bids)
    revenues = instance.revenues
    users = instance.user_ids

    def weight(u, t):
        return revenues[t] - bids[u]

    if len(users) > 12:
        raise ValueError("VCG demo is limited to 12 users")
    welfare, pairs = _best_matching(users, by_user, weight)
    payments = {}
    for u, _ in pairs:
        others = [v for v in users if v != u]
        without, _ = _best_matching(others, by_user, weight)
        payments[u] = bids[u] + welfare - without
    return AuctionOutcome.from_pairs(instance, pairs, payments)


def run_singer_adapted_demo(instance: Instance, bids: BidProfile, budget: float) -> AuctionOutcome:
    """Ratio-greedy allocation with proportional-share payments capped at task revenue.

    Edges are taken by descending ``r_j / b_i`` while the bid stays within the
    user's proportional share of the budget. Each winner is paid
    ``min(r_j, budget * r_j / R)`` with ``R`` the selected revenue. The cap at
    ``r_j`` is what breaks truthfulness.
    """
    pruned, _, _ = _pruned_adjacency(instance, bids)
    revenues = instance.revenues

    def key(edge):
        u, t = edge
        ratio = math.inf if bids[u] == 0 else revenues[t] / bids[u]
        return (-ratio, t, u)

    used_u, used_t = set(), set()
    pairs = []
    total = 0.0
    for u, t in sorted(pruned.edges, key=key):
        if u in used_u or t in used_t:
            continue
        share = budget * revenues[t] / (total + revenues[t]) if total + revenues[t] > 0 else budget
        if bids[u] > share + MONEY_TOL:
            break
        used_u.add(u)
        used_t.add(t)
        pairs.append((u, t))
        total += revenues[t]
    payments = {
        u: min(revenues[t], budget * revenues[t] / total) if total > 0 else 0.0 for u, t in pairs
    }
    return AuctionOutcome.from_pairs(instance, pairs, payments)


def run_optimal_matching_demo(instance: Instance, bids: BidProfile, budget: float) -> AuctionOutcome:
    """Max-revenue matching with total revenue within budget; winners are paid their task's revenue."""
    if len(instance.tasks) > EXHAUSTIVE_TASK_LIMIT:
        raise ValueError(f"exhaustive search is limited to {EXHAUSTIVE_TASK_LIMIT} tasks")
    _, _, by_user = _pruned_adjacency(instance, bids)
    revenues = instance.revenues
    _, pairs = _best_matching(
        instance.user_ids,
        by_user,
        lambda u, t: revenues[t],
        allowed=lambda pairs, w: w <= budget + MONEY_TOL,
    )
    pairs = pairs or []
    return AuctionOutcome.from_pairs(instance, pairs, {u: revenues[t] for u, t in pairs})

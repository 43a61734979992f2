import itertools
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from trupretar.bipartite import Graph
from trupretar.model import Instance, Location, Task, User


def brute_max_matching_size(graph: Graph) -> int:
    """Largest k such that some k edges form a matching (exhaustive)."""
    edges = sorted(graph.edges)
    best = 0
    for k in range(1, min(len(graph.user_ids), len(graph.task_ids)) + 1):
        found = False
        for subset in itertools.combinations(edges, k):
            if len({u for u, _ in subset}) == k and len({t for _, t in subset}) == k:
                found = True
                break
        if not found:
            break
        best = k
    return best


def brute_best_revenue(edges, revenues, bids=None, budget=math.inf) -> float:
    """Max sum of task revenue over matchings (optionally with total winner bid <= budget)."""
    edges = sorted(edges)
    best = 0.0
    for k in range(1, len(edges) + 1):
        for subset in itertools.combinations(edges, k):
            if len({u for u, _ in subset}) != k or len({t for _, t in subset}) != k:
                continue
            if bids is not None and sum(bids[u] for u, _ in subset) > budget + 1e-9:
                continue
            best = max(best, sum(revenues[t] for _, t in subset))
    return best


@st.composite
def small_graphs(draw, max_users=7, max_tasks=7):
    n = draw(st.integers(0, max_users))
    k = draw(st.integers(0, max_tasks))
    users = [f"u{i}" for i in range(n)]
    tasks = list(range(k))
    all_edges = [(u, t) for u in users for t in tasks]
    chosen = draw(st.lists(st.sampled_from(all_edges), unique=True)) if all_edges else []
    return Graph(tuple(users), tuple(tasks), frozenset(chosen))


def make_instance(costs: dict, revenues: dict, edges) -> Instance:
    return Instance(
        tuple(User(u, 0.0, 0.0, float(c)) for u, c in costs.items()),
        tuple(Location(t, 0.0, 0.0) for t in revenues),
        tuple(Task(t, t, 1, float(r)) for t, r in revenues.items()),
        frozenset(edges),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

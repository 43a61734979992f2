import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trupretar.bipartite import (
    Graph,
    Matching,
    WorkGraph,
    has_right_perfect_matching,
    is_user_critical,
    max_matching,
)

from conftest import brute_max_matching_size, small_graphs


def complete(users, tasks):
    return Graph(tuple(users), tuple(tasks), frozenset((u, t) for u in users for t in tasks))


def test_max_matching_two_private_edges():
    g = Graph(("a", "b"), (1, 2), {("a", 1), ("b", 2)})
    assert max_matching(g).pairs == {("a", 1), ("b", 2)}


def test_max_matching_no_edges():
    assert len(max_matching(Graph(("a", "b"), (1, 2)))) == 0


def test_max_matching_path_graph():
    g = Graph(("a", "b"), (1, 2, 3), {("a", 1), ("a", 2), ("b", 2), ("b", 3)})
    m = max_matching(g)
    assert len(m) == 2
    assert m.pairs <= g.edges


def test_max_matching_is_deterministic():
    g = Graph(("a", "b", "c"), (1, 2), {("a", 1), ("b", 1), ("c", 2), ("b", 2)})
    assert max_matching(g) == max_matching(g)


@pytest.mark.parametrize(
    "graph, expected",
    [
        (complete("bc", (1, 2)), True),
        (Graph((), (1,)), False),
        (Graph(("a",), ()), True),
        (Graph((), ()), True),
        (Graph(("a", "b"), (1, 2), {("a", 1), ("b", 1)}), False),
    ],
)
def test_has_right_perfect_matching(graph, expected):
    assert has_right_perfect_matching(graph) is expected


def test_nobody_critical_with_spare_user():
    g = complete("abc", (1, 2))
    assert [is_user_critical(g, u) for u in "abc"] == [False, False, False]


def test_everybody_critical_without_spare_user():
    g = complete("bc", (1, 2))
    assert is_user_critical(g, "b") and is_user_critical(g, "c")


def test_single_edge_user_is_critical():
    assert is_user_critical(Graph(("a",), (1,), {("a", 1)}), "a")


def test_criticality_requires_right_perfect_matching():
    with pytest.raises(ValueError):
        is_user_critical(Graph(("a",), (1, 2), {("a", 1)}), "a")


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(("a",), (1,), {("b", 1)})
    with pytest.raises(ValueError):
        Matching({("a", 1), ("a", 2)})


@settings(max_examples=300, deadline=None)
@given(small_graphs())
def test_max_matching_matches_enumeration(g):
    m = max_matching(g)
    assert m.pairs <= g.edges
    assert len(m) == brute_max_matching_size(g)


@settings(max_examples=200, deadline=None)
@given(small_graphs(max_users=6, max_tasks=5))
def test_non_critical_deletion_keeps_right_perfect_matching(g):
    if not has_right_perfect_matching(g):
        return
    assert len(max_matching(g)) == len(g.task_ids)
    for u in g.user_ids:
        if not is_user_critical(g, u):
            assert has_right_perfect_matching(g.without_user(u))


def _work_graph_from(g: Graph):
    """Build a WorkGraph task by task; returns it with the tasks it accepted."""
    wg = WorkGraph()
    adj = g.task_neighbors()
    accepted = [t for t in sorted(g.task_ids) if wg.try_add_task(t, adj[t])]
    return wg, accepted


@settings(max_examples=200, deadline=None)
@given(small_graphs(max_users=6, max_tasks=6))
def test_work_graph_agrees_with_value_level_checks(g):
    wg, _ = _work_graph_from(g)
    assert wg.has_right_perfect_matching()
    sub = wg.graph()
    assert has_right_perfect_matching(sub)
    assert wg.matching().pairs <= sub.edges
    critical = wg.critical_users()
    for u in sub.user_ids:
        assert (u in critical) == is_user_critical(sub, u)


@settings(max_examples=200, deadline=None)
@given(small_graphs(max_users=6, max_tasks=5), st.data())
def test_work_graph_allocation_matches_definition(g, data):
    wg, _ = _work_graph_from(g)
    sub = wg.graph()
    if not sub.edges:
        return
    u, t = data.draw(st.sampled_from(sorted(sub.edges)))
    # (u, t) is allocatable iff the graph with u restricted to that edge keeps an RPM
    restricted = Graph(sub.user_ids, sub.task_ids, {e for e in sub.edges if e[0] != u} | {(u, t)})
    expected = has_right_perfect_matching(restricted)
    assert wg.try_allocate(u, t) is expected
    assert wg.has_right_perfect_matching()
    if expected:
        assert u not in wg and t not in wg.task_adj
    else:
        assert wg.graph() == sub


@settings(max_examples=200, deadline=None)
@given(small_graphs(max_users=6, max_tasks=5), st.data())
def test_work_graph_user_removal(g, data):
    wg, _ = _work_graph_from(g)
    sub = wg.graph()
    if not sub.user_ids:
        return
    u = data.draw(st.sampled_from(sub.user_ids))
    expected = has_right_perfect_matching(sub.without_user(u))
    assert wg.try_remove_user(u) is expected
    assert wg.has_right_perfect_matching()
    assert (u in wg) is (not expected)


def test_work_graph_rejects_blocking_task():
    wg = WorkGraph()
    assert wg.try_add_task(1, ["a"])
    assert not wg.try_add_task(2, ["a"])
    assert wg.tasks == [1] and wg.users == ["a"]
    assert not wg.try_add_task(3, [])

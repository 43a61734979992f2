import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trupretar.baselines import (
    greedy_matching,
    run_app_opt,
    run_greedy_auction,
    run_optimal_matching_demo,
    run_singer_adapted_demo,
    run_surge,
    run_vcg_demo,
)
from trupretar.instances import FIXTURE_EPS, fixture
from trupretar.model import BidProfile
from trupretar.verify import random_case, random_graph_instance, verify_axioms

from conftest import brute_best_revenue, make_instance

seeds = st.integers(0, 2**32 - 1)


# --- greedy matching ---------------------------------------------------------


def test_greedy_matching_fig1c():
    inst, bids, _ = fixture("fig1c")
    m = greedy_matching(inst, bids["truthful"])
    assert m.pairs == {("a", 2), ("b", 3)}
    assert sum(inst.revenues[t] for _, t in m) == 5


def test_greedy_matching_fig1a_and_empty():
    inst, bids, _ = fixture("fig1a")
    assert greedy_matching(inst, bids["truthful"]).pairs == {("a", 1), ("b", 2)}
    empty = make_instance({"a": 1.0}, {1: 2.0}, set())
    assert len(greedy_matching(empty, empty.truthful_bids())) == 0


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_greedy_matching_half_of_optimum(seed):
    inst = random_graph_instance(np.random.default_rng(seed), max_users=6, max_tasks=6)
    bids = inst.truthful_bids()
    m = greedy_matching(inst, bids)
    edges = {(u, t) for u, t in inst.edges if bids[u] <= inst.revenues[t]}
    assert m.pairs <= edges
    greedy = sum(inst.revenues[t] for _, t in m)
    assert greedy >= 0.5 * brute_best_revenue(edges, inst.revenues) - 1e-9


# --- APP-OPT -----------------------------------------------------------------


def test_app_opt_fig1c():
    inst, bids, _ = fixture("fig1c")
    out = run_app_opt(inst, bids["truthful"], 100.0)
    assert out.matches == [("a", 2), ("b", 3)]
    assert out.revenue == 5 and out.total_payment == 2


def test_app_opt_zero_budget_and_single_edge():
    inst = make_instance({"a": 1.0}, {1: 2.0}, {("a", 1)})
    assert run_app_opt(inst, inst.truthful_bids(), 0.0).matches == []
    out = run_app_opt(inst, inst.truthful_bids(), 1.0)
    assert out.matches == [("a", 1)] and out.payments == {"a": 1.0} and out.profit == 1.0


# --- Greedy auction ------------------------------------------------------------


def test_greedy_auction_last_user_prices_winner():
    inst = make_instance({1: 1.0, 2: 2.0}, {"x": 5.0, "y": 4.0}, {(u, t) for u in (1, 2) for t in "xy"})
    out = run_greedy_auction(inst, inst.truthful_bids(), 100.0)
    assert out.matches == [(1, "x")]
    assert out.payments == {1: 2.0}


def test_greedy_auction_empty_cases():
    lone = make_instance({"a": 1.0}, {1: 2.0}, set())
    assert run_greedy_auction(lone, lone.truthful_bids(), 10.0).matches == []
    inst = make_instance({1: 1.0, 2: 2.0}, {"x": 5.0, "y": 4.0}, {(u, t) for u in (1, 2) for t in "xy"})
    assert run_greedy_auction(inst, inst.truthful_bids(), 0.0).matches == []
    none = make_instance({}, {}, set())
    assert run_greedy_auction(none, BidProfile({}), 10.0).matches == []


# --- Surge ---------------------------------------------------------------------


def test_surge_posted_price():
    inst = make_instance({"a": 1.0}, {1: 2.0}, {("a", 1)})
    out = run_surge(inst, inst.truthful_bids(), 10.0, alpha=0.8)
    assert out.matches == [("a", 1)]
    assert out.payments["a"] == pytest.approx(1.6)
    assert out.profit == pytest.approx(0.4)


def test_surge_rejects_bid_above_offer():
    inst = make_instance({"a": 1.7}, {1: 2.0}, {("a", 1)})
    assert run_surge(inst, inst.truthful_bids(), 10.0).matches == []


def test_surge_budget_gate_skips_task():
    inst = make_instance({"a": 0.5}, {1: 2.0, 2: 1.0}, {("a", 1), ("a", 2)})
    out = run_surge(inst, inst.truthful_bids(), 1.0)
    assert out.matches == [("a", 2)]
    assert out.payments["a"] == pytest.approx(0.8)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.3, 1.5])
def test_surge_alpha_range(alpha):
    inst = make_instance({"a": 0.5}, {1: 2.0}, {("a", 1)})
    with pytest.raises(ValueError):
        run_surge(inst, inst.truthful_bids(), 1.0, alpha=alpha)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_benchmarks_budget_feasible_and_valid(seed):
    rng = np.random.default_rng(seed)
    inst, bids, budget = random_case(rng)
    for run in (run_app_opt, run_surge):
        out = run(inst, bids, budget)
        assert verify_axioms(out, inst, bids, budget).ok
    out = run_greedy_auction(inst, bids, budget)
    report = verify_axioms(out, inst, bids, budget)
    assert report.matching_ok and report.user_ir_ok


# --- counter-example mechanisms ------------------------------------------------


def test_vcg_fig1a_exceeds_budget():
    inst, bids, budget = fixture("fig1a")
    out = run_vcg_demo(inst, bids["truthful"])
    assert out.payments == {"a": pytest.approx(1.0), "b": pytest.approx(1.0)}
    assert out.total_payment == pytest.approx(2.0) and out.total_payment > budget
    assert not verify_axioms(out, inst, bids["truthful"], budget).budget_ok


def test_vcg_single_edge_and_no_edges():
    inst = make_instance({"a": 1.0}, {1: 2.0}, {("a", 1)})
    assert run_vcg_demo(inst, inst.truthful_bids()).payments == {"a": 2.0}
    empty = make_instance({"a": 1.0}, {1: 2.0}, set())
    assert run_vcg_demo(empty, empty.truthful_bids()).matches == []


def test_singer_fig1b():
    inst, bids, budget = fixture("fig1b")
    truthful = run_singer_adapted_demo(inst, bids["truthful"], budget)
    assert truthful.matches == [("a", 1), ("b", 2)]
    assert truthful.payments["a"] == 2.0
    lie = run_singer_adapted_demo(inst, bids["a_bids_eps"], budget)
    assert ("a", 2) in lie.matches and lie.payments["a"] == 3.0
    assert lie.utility("a", inst.costs["a"]) - truthful.utility("a", inst.costs["a"]) == pytest.approx(1.0)


def test_singer_no_edges():
    empty = make_instance({"a": 1.0}, {1: 2.0}, set())
    assert run_singer_adapted_demo(empty, empty.truthful_bids(), 10.0).matches == []


def test_optimal_matching_fig1c():
    inst, bids, budget = fixture("fig1c")
    truthful = run_optimal_matching_demo(inst, bids["truthful"], budget)
    assert truthful.matches == [("a", 2), ("b", 3)]
    assert truthful.payments == {"a": 3.0, "b": 2.0}
    lie = run_optimal_matching_demo(inst, bids["b_bids_3"], budget)
    assert ("b", 2) in lie.matches and lie.payments["b"] == 3.0


def test_optimal_matching_guards():
    empty = make_instance({}, {}, set())
    assert run_optimal_matching_demo(empty, BidProfile({}), 1.0).matches == []
    big = make_instance({"a": 0.0}, {j: 1.0 for j in range(21)}, set())
    with pytest.raises(ValueError):
        run_optimal_matching_demo(big, big.truthful_bids(), 1.0)


def test_fixture_eps_is_small():
    assert 0 < FIXTURE_EPS < 0.01

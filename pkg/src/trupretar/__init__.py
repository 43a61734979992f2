"""Truthful, budget-feasible task allocation for crowdsourced bike rebalancing."""

from .baselines import (
    greedy_matching,
    run_app_opt,
    run_greedy_auction,
    run_optimal_matching_demo,
    run_singer_adapted_demo,
    run_surge,
    run_vcg_demo,
)
from .bipartite import Graph, Matching, WorkGraph, has_right_perfect_matching, is_user_critical, max_matching
from .instances import GridWorld, InstanceConfig, fixture, generate_instance, kl_task_values, read_instance, write_instance
from .mechanism import budget_guideline, merged_order, prune_edges, run_trupretar
from .model import AuctionOutcome, BidProfile, Instance, Location, Task, User
from .verify import (
    check_revenue_bounds,
    oracle_budgeted_opt,
    oracle_opt_matching,
    verify_axioms,
    verify_truthfulness,
)

__version__ = "0.1.0"

"""Core value types shared by the mechanisms, generators and checkers."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .bipartite import Graph

MONEY_TOL = 1e-9


@dataclass(frozen=True)
class User:
    id: object
    x: float
    y: float
    cost: float


@dataclass(frozen=True)
class Location:
    id: object
    x: float
    y: float


@dataclass(frozen=True)
class Task:
    """Park at ``location`` as the ``rank``-th bike, worth ``revenue`` to the platform."""

    id: object
    location: object
    rank: int
    revenue: float


@dataclass(frozen=True)
class Instance:
    users: tuple
    locations: tuple
    tasks: tuple
    edges: frozenset
    range_h: float = float("inf")

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "edges", frozenset(self.edges))
        users = {u.id for u in self.users}
        tasks = {t.id for t in self.tasks}
        if len(users) != len(self.users) or len(tasks) != len(self.tasks):
            raise ValueError("duplicate user or task id")
        for u, t in self.edges:
            if u not in users or t not in tasks:
                raise ValueError(f"edge ({u!r}, {t!r}) has an unknown endpoint")
        for t in self.tasks:
            if t.revenue < 0:
                raise ValueError(f"task {t.id!r} has negative revenue")

    @property
    def user_ids(self) -> list:
        return sorted(u.id for u in self.users)

    @property
    def task_ids(self) -> list:
        return sorted(t.id for t in self.tasks)

    @property
    def revenues(self) -> dict:
        return {t.id: t.revenue for t in self.tasks}

    @property
    def costs(self) -> dict:
        return {u.id: u.cost for u in self.users}

    @property
    def max_revenue(self) -> float:
        return max((t.revenue for t in self.tasks), default=0.0)

    def graph(self) -> Graph:
        return Graph(tuple(self.user_ids), tuple(self.task_ids), self.edges)

    def truthful_bids(self) -> "BidProfile":
        return BidProfile(self.costs)


class BidProfile(Mapping):
    """Immutable declared cost per user."""

    def __init__(self, bids):
        self._bids = dict(bids)
        for u, b in self._bids.items():
            if not b >= 0:
                raise ValueError(f"bid of {u!r} must be >= 0, got {b!r}")

    def __getitem__(self, user_id):
        return self._bids[user_id]

    def __iter__(self):
        return iter(self._bids)

    def __len__(self):
        return len(self._bids)

    def __repr__(self):
        return f"BidProfile({self._bids!r})"

    def with_bid(self, user_id, bid: float) -> "BidProfile":
        bids = dict(self._bids)
        bids[user_id] = bid
        return BidProfile(bids)

    def require_users(self, user_ids):
        missing = [u for u in user_ids if u not in self._bids]
        if missing:
            raise ValueError(f"missing bids for users {missing!r}")


@dataclass
class AuctionOutcome:
    matches: list = field(default_factory=list)  # sorted (user, task) pairs
    payments: dict = field(default_factory=dict)
    revenue: float = 0.0
    total_payment: float = 0.0
    budget_gate_fired: bool = False
    trace: list = field(default_factory=list)

    @property
    def profit(self) -> float:
        return self.revenue - self.total_payment

    @property
    def winners(self) -> set:
        return {u for u, _ in self.matches}

    def utility(self, user_id, cost: float) -> float:
        if user_id not in self.payments:
            return 0.0
        return self.payments[user_id] - cost

    @classmethod
    def from_pairs(cls, instance: Instance, pairs, payments: dict, **kwargs) -> "AuctionOutcome":
        revenues = instance.revenues
        pairs = sorted(pairs)
        return cls(
            matches=pairs,
            payments=dict(payments),
            revenue=sum(revenues[t] for _, t in pairs),
            total_payment=sum(payments[u] for u, _ in pairs),
            **kwargs,
        )

    def to_dict(self) -> dict:
        return {
            "matches": [[u, t] for u, t in self.matches],
            "payments": {str(u): p for u, p in sorted(self.payments.items())},
            "revenue": self.revenue,
            "profit": self.profit,
            "total_payment": self.total_payment,
            "budget_gate_fired": self.budget_gate_fired,
        }

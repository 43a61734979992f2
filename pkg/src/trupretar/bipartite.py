"""Bipartite graphs between users (left) and tasks (right), and matching primitives.

Two layers live here:

* value-level helpers (:func:`max_matching`, :func:`has_right_perfect_matching`,
  :func:`is_user_critical`) on an immutable :class:`Graph`;
* :class:`WorkGraph`, a mutable subgraph that carries a right-perfect matching
  and updates it with single augmenting-path searches. The auction sweep uses
  it to test "add this task" / "drop this user" without recomputing a matching
  from scratch.

Adjacency is always visited in ascending id order, so results are
deterministic for a given input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable

UserId = Hashable
TaskId = Hashable
Edge = tuple  # (user_id, task_id)


@dataclass(frozen=True)
class Graph:
    user_ids: tuple
    task_ids: tuple
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "user_ids", tuple(self.user_ids))
        object.__setattr__(self, "task_ids", tuple(self.task_ids))
        object.__setattr__(self, "edges", frozenset(self.edges))
        if len(set(self.user_ids)) != len(self.user_ids):
            raise ValueError("duplicate user id")
        if len(set(self.task_ids)) != len(self.task_ids):
            raise ValueError("duplicate task id")
        users, tasks = set(self.user_ids), set(self.task_ids)
        for u, t in self.edges:
            if u not in users or t not in tasks:
                raise ValueError(f"edge ({u!r}, {t!r}) has an unknown endpoint")

    def task_neighbors(self) -> dict:
        """Map each task to its users, sorted ascending."""
        adj = {t: [] for t in self.task_ids}
        for u, t in self.edges:
            adj[t].append(u)
        for users in adj.values():
            users.sort()
        return adj

    def without_user(self, user_id) -> "Graph":
        return Graph(
            tuple(u for u in self.user_ids if u != user_id),
            self.task_ids,
            frozenset(e for e in self.edges if e[0] != user_id),
        )


@dataclass(frozen=True)
class Matching:
    pairs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))
        users = [u for u, _ in self.pairs]
        tasks = [t for _, t in self.pairs]
        if len(set(users)) != len(users) or len(set(tasks)) != len(tasks):
            raise ValueError("matching is not injective")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def task_of(self) -> dict:
        return {u: t for u, t in self.pairs}


def _augment(root, task_adj: dict, match_task: dict, match_user: dict, banned=()) -> bool:
    """Search an augmenting path from the uncovered task ``root``; flip it on success.

    ``match_task`` / ``match_user`` are updated in place only when a path is
    found. Users in ``banned`` are never used.
    """
    visited = set(banned)
    reached_from = {}
    stack = [(root, iter(task_adj.get(root, ())))]
    while stack:
        t, it = stack[-1]
        for u in it:
            if u in visited:
                continue
            visited.add(u)
            reached_from[u] = t
            nxt = match_user.get(u)
            if nxt is None:
                # flip the alternating path back to the root
                while True:
                    t = reached_from[u]
                    prev = match_task.get(t)
                    match_task[t] = u
                    match_user[u] = t
                    if t == root:
                        return True
                    u = prev
            stack.append((nxt, iter(task_adj.get(nxt, ()))))
            break
        else:
            stack.pop()
    return False


def max_matching(graph: Graph) -> Matching:
    """Maximum-cardinality matching via one augmenting search per task."""
    adj = graph.task_neighbors()
    match_task: dict = {}
    match_user: dict = {}
    for t in sorted(graph.task_ids):
        _augment(t, adj, match_task, match_user)
    return Matching(frozenset((u, t) for t, u in match_task.items()))


def has_right_perfect_matching(graph: Graph) -> bool:
    """True iff some matching covers every task."""
    if len(graph.task_ids) > len(graph.user_ids):
        return False
    return len(max_matching(graph)) == len(graph.task_ids)


def is_user_critical(graph: Graph, user_id) -> bool:
    """True iff deleting ``user_id`` destroys the graph's right-perfect matching."""
    if user_id not in graph.user_ids:
        raise ValueError(f"unknown user {user_id!r}")
    if not has_right_perfect_matching(graph):
        raise ValueError("graph has no right-perfect matching")
    return not has_right_perfect_matching(graph.without_user(user_id))


class WorkGraph:
    """Mutable bipartite subgraph that always holds a right-perfect matching.

    Every mutating method either succeeds and leaves a right-perfect
    matching in place, or returns ``False`` and leaves the state untouched.
    """

    def __init__(self):
        self.task_adj: dict = {}  # task -> users, ascending
        self.user_adj: dict = {}  # user -> set of tasks
        self.match_task: dict = {}
        self.match_user: dict = {}

    @property
    def users(self) -> list:
        return sorted(self.user_adj)

    @property
    def tasks(self) -> list:
        return sorted(self.task_adj)

    def __contains__(self, user_id) -> bool:
        return user_id in self.user_adj

    def graph(self) -> Graph:
        edges = frozenset((u, t) for t, us in self.task_adj.items() for u in us)
        return Graph(tuple(self.users), tuple(self.tasks), edges)

    def matching(self) -> Matching:
        return Matching(frozenset((u, t) for t, u in self.match_task.items()))

    def has_right_perfect_matching(self) -> bool:
        return len(self.match_task) == len(self.task_adj)

    def try_add_task(self, task_id, users: Iterable) -> bool:
        """Add ``task_id`` with edges to ``users`` if the result keeps a right-perfect matching."""
        if task_id in self.task_adj:
            raise ValueError(f"task {task_id!r} already in work graph")
        users = sorted(set(users))
        if not users:
            return False
        self.task_adj[task_id] = users
        new_users = [u for u in users if u not in self.user_adj]
        for u in new_users:
            self.user_adj[u] = set()
        if _augment(task_id, self.task_adj, self.match_task, self.match_user):
            for u in users:
                self.user_adj[u].add(task_id)
            return True
        del self.task_adj[task_id]
        for u in new_users:
            del self.user_adj[u]
        return False

    def _free(self, user_id) -> bool:
        """Re-route the matching so ``user_id`` is unmatched; False if impossible."""
        t = self.match_user.get(user_id)
        if t is None:
            return True
        del self.match_user[user_id]
        del self.match_task[t]
        if _augment(t, self.task_adj, self.match_task, self.match_user, banned=(user_id,)):
            return True
        self.match_user[user_id] = t
        self.match_task[t] = user_id
        return False

    def try_remove_user(self, user_id) -> bool:
        """Delete ``user_id`` and her edges if a right-perfect matching survives."""
        if not self._free(user_id):
            return False
        self._drop_user(user_id)
        return True

    def _drop_user(self, user_id):
        for t in self.user_adj.pop(user_id):
            self.task_adj[t] = [u for u in self.task_adj[t] if u != user_id]

    def critical_users(self) -> set:
        """Users whose removal would break the right-perfect matching.

        A matched user can be freed iff her task is adjacent to a user that is
        free or can itself be freed; one alternating BFS from the free users
        finds everyone who is not critical.
        """
        free = [u for u in self.user_adj if u not in self.match_user]
        reachable = set(free)
        queue = list(free)
        while queue:
            u = queue.pop()
            for t in self.user_adj[u]:
                v = self.match_task[t]
                if v not in reachable:
                    reachable.add(v)
                    queue.append(v)
        return {u for u in self.user_adj if u not in reachable}

    def is_critical(self, user_id) -> bool:
        return user_id in self.critical_users()

    def try_allocate(self, user_id, task_id) -> bool:
        """Remove ``user_id`` and ``task_id`` as a pair, if the pair extends to a right-perfect matching."""
        if task_id not in self.user_adj.get(user_id, ()):
            return False
        saved_task, saved_user = dict(self.match_task), dict(self.match_user)
        current = self.match_user.get(user_id)
        if current != task_id:
            other = self.match_task[task_id]
            del self.match_user[other]
            del self.match_task[task_id]
            if current is not None:
                del self.match_task[current]
            self.match_user[user_id] = task_id
            self.match_task[task_id] = user_id
            if current is not None and not _augment(
                current, self.task_adj, self.match_task, self.match_user, banned=(user_id,)
            ):
                self.match_task, self.match_user = saved_task, saved_user
                return False
        del self.match_task[task_id]
        del self.match_user[user_id]
        self._drop_user(user_id)
        for u in self.task_adj.pop(task_id):
            self.user_adj[u].discard(task_id)
        return True

"""Synthetic bike-rebalancing instances, the hand-built counter-example fixtures,
and a plain-text instance file format.

A generated instance lives on a grid of square cells. Parking locations sit
at cell centres, user destinations are scattered inside cells, and both
follow the same per-cell demand weights. Task ``(l, x)``, "park at location
``l`` as the ``x``-th extra bike", is worth the drop in KL divergence between
the demand distribution and the smoothed supply distribution that the
``x``-th bike at ``l`` produces, scaled by ``gamma``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import BidProfile, Instance, Location, Task, User

FIXTURE_EPS = 0.001
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GridWorld:
    rows: int = 8
    cols: int = 8
    cell_size: float = 600.0
    demand_weights: tuple = field(default=())

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0 or self.cell_size <= 0:
            raise ValueError("grid dimensions must be positive")
        w = self.demand_weights
        if not w:
            w = (1.0 / (self.rows * self.cols),) * (self.rows * self.cols)
        w = tuple(float(x) for x in w)
        if len(w) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} demand weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise ValueError("demand weights must be nonnegative")
        total = sum(w)
        if total <= 0:
            raise ValueError("demand weights sum to zero")
        object.__setattr__(self, "demand_weights", tuple(x / total for x in w))

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def cell_center(self, cell: int) -> tuple:
        r, c = divmod(cell, self.cols)
        return ((c + 0.5) * self.cell_size, (r + 0.5) * self.cell_size)

    @classmethod
    def random(
        cls, rows=8, cols=8, cell_size=600.0, seed=0, concentration=0.3
    ) -> "GridWorld":
        """Seeded Dirichlet demand over the cells; smaller ``concentration`` is more skewed."""
        rng = np.random.default_rng(seed)
        w = rng.dirichlet(np.full(rows * cols, concentration))
        return cls(rows, cols, cell_size, tuple(w))

    @classmethod
    def from_file(cls, path, rows=8, cols=8, cell_size=600.0) -> "GridWorld":
        """Read whitespace/comma separated weights, row-major; ``#`` starts a comment."""
        values = []
        for line in Path(path).read_text().splitlines():
            line = line.split("#", 1)[0]
            values += [float(tok) for tok in re.split(r"[\s,]+", line.strip()) if tok]
        return cls(rows, cols, cell_size, tuple(values))


@dataclass(frozen=True)
class InstanceConfig:
    n_users: int = 200
    n_locations: int = 60
    range_h: float = 600.0
    cost_upper: float = 5.0
    base_supply: int = 3
    gamma: float = 300.0
    epsilon_s: float = 1.0
    seed: int = 0
    drop_zero_tasks: bool = False
    allow_replacement: bool = True

    def __post_init__(self):
        if self.n_users < 0 or self.n_locations < 0:
            raise ValueError("n_users and n_locations must be >= 0")
        if not self.range_h > 0:
            raise ValueError("range_h must be > 0")
        if not self.cost_upper > 0:
            raise ValueError("cost_upper must be > 0")
        if self.base_supply < 0:
            raise ValueError("base_supply must be >= 0")
        if not self.gamma > 0 or not self.epsilon_s > 0:
            raise ValueError("gamma and epsilon_s must be > 0")


def kl_divergence(d, q) -> float:
    d = np.asarray(d, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = d > 0
    return float(np.sum(d[mask] * np.log(d[mask] / q[mask])))


def kl_task_values(demand, base_supply, location, max_rank, gamma=300.0, epsilon_s=1.0) -> list:
    """Revenue of the 1st..``max_rank``-th extra bike parked at ``location``.

    The x-th bike moves the supply at ``location`` from ``s + eps + x - 1`` to
    ``s + eps + x`` (other locations fixed), and the value is ``gamma`` times
    the resulting decrease of KL(demand || normalized supply), floored at 0.
    """
    d = np.asarray(demand, dtype=float)
    if d.ndim != 1 or np.any(d < 0) or abs(d.sum() - 1.0) > 1e-9:
        raise ValueError("demand must be a normalized distribution")
    s = np.asarray(base_supply, dtype=float)
    if s.shape != d.shape or np.any(s < 0):
        raise ValueError("base_supply must be nonnegative, one count per location")
    a = s + epsilon_s
    a_l, total = a[location], a.sum()
    d_l = d[location]
    x = np.arange(1, max_rank + 1, dtype=float)
    # KL(d||q_{x-1}) - KL(d||q_x); only q_l's numerator and the normalizer move
    drop = d_l * np.log1p(1.0 / (a_l + x - 1)) - np.log1p(1.0 / (total + x - 1))
    return [float(v) for v in np.maximum(0.0, gamma * drop)]


def generate_instance(config: InstanceConfig, world: GridWorld) -> Instance:
    rng = np.random.default_rng(config.seed)
    weights = np.asarray(world.demand_weights)
    m = config.n_locations

    if m > world.n_cells and not config.allow_replacement:
        raise ValueError(f"{m} locations do not fit in {world.n_cells} cells without replacement")
    first = min(m, int(np.count_nonzero(weights)))
    cells = list(rng.choice(world.n_cells, size=first, replace=False, p=weights)) if first else []
    if m > first:
        cells += list(rng.choice(world.n_cells, size=m - first, replace=True, p=weights))
    loc_xy = np.array([world.cell_center(c) for c in cells]).reshape(-1, 2)
    locations = tuple(Location(l, float(x), float(y)) for l, (x, y) in enumerate(loc_xy))

    # locations sharing a cell split its demand
    share = np.array([weights[c] / cells.count(c) for c in cells]) if cells else np.zeros(0)
    demand = share / share.sum() if share.sum() > 0 else np.full(m, 1.0 / max(m, 1))

    n = config.n_users
    user_cells = rng.choice(world.n_cells, size=n, p=weights)
    rows, cols = np.divmod(user_cells, world.cols)
    offsets = rng.uniform(0.0, world.cell_size, size=(n, 2))
    user_xy = np.column_stack([cols * world.cell_size, rows * world.cell_size]) + offsets
    costs = rng.uniform(0.0, config.cost_upper, size=n)
    users = tuple(
        User(i, float(user_xy[i, 0]), float(user_xy[i, 1]), float(costs[i])) for i in range(n)
    )

    supply = np.full(m, float(config.base_supply))
    tasks = []
    tasks_at = {}
    for l in range(m):
        values = kl_task_values(demand, supply, l, n, config.gamma, config.epsilon_s)
        tasks_at[l] = []
        for x, r in enumerate(values, start=1):
            if config.drop_zero_tasks and r <= 0:
                continue
            tid = l * n + (x - 1)
            tasks.append(Task(tid, l, x, r))
            tasks_at[l].append(tid)

    edges = set()
    if n and m:
        dist = np.hypot(
            user_xy[:, None, 0] - loc_xy[None, :, 0], user_xy[:, None, 1] - loc_xy[None, :, 1]
        )
        for i, l in zip(*np.nonzero(dist <= config.range_h)):
            edges.update((int(i), t) for t in tasks_at[int(l)])

    return Instance(users, locations, tuple(tasks), frozenset(edges), float(config.range_h))


def _make(costs: dict, revenues: dict, edges) -> Instance:
    users = tuple(User(u, 0.0, 0.0, float(c)) for u, c in costs.items())
    locations = tuple(Location(t, 0.0, 0.0) for t in revenues)
    tasks = tuple(Task(t, t, 1, float(r)) for t, r in revenues.items())
    return Instance(users, locations, tasks, frozenset(edges))


def _fig1a():
    eps = FIXTURE_EPS
    inst = _make({"a": eps, "b": eps}, {1: 1.0, 2: 1.0}, {("a", 1), ("b", 2)})
    return inst, {"truthful": inst.truthful_bids()}, 1.0


def _fig1b():
    inst = _make({"a": 2.0, "b": 1.0}, {1: 2.0, 2: 3.0}, {("a", 1), ("a", 2), ("b", 2)})
    truthful = inst.truthful_bids()
    return inst, {"truthful": truthful, "a_bids_eps": truthful.with_bid("a", FIXTURE_EPS)}, 100.0


def _fig1c():
    inst = _make(
        {"a": 1.0, "b": 1.0},
        {1: 1.0, 2: 3.0, 3: 2.0},
        {("a", 1), ("a", 2), ("b", 2), ("b", 3)},
    )
    truthful = inst.truthful_bids()
    return inst, {"truthful": truthful, "b_bids_3": truthful.with_bid("b", 3.0)}, 100.0


def _fig2():
    edges = {(u, t) for u in "abc" for t in (1, 2)} | {("d", 3), ("a", 4)}
    inst = _make(
        {"a": 5.0, "b": 4.0, "c": 3.5, "d": 2.0},
        {1: 7.0, 2: 6.0, 3: 3.0, 4: 2.0, 5: 1.5, 6: 1.0},
        edges,
    )
    return inst, {"truthful": inst.truthful_bids()}, 14.0


def _sqrt2(cost_b):
    eps = FIXTURE_EPS
    inst = _make(
        {"a": eps, "b": cost_b},
        {1: 1 + eps, 2: SQRT2 + 1 + eps, 3: SQRT2 + 1},
        {("a", 1), ("a", 2), ("b", 2), ("b", 3)},
    )
    return inst, {"truthful": inst.truthful_bids()}, 100.0


FIXTURES = {
    "fig1a": _fig1a,
    "fig1b": _fig1b,
    "fig1c": _fig1c,
    "fig2": _fig2,
    "sqrt2_case1": lambda: _sqrt2(SQRT2 + 1),
    "sqrt2_case2": lambda: _sqrt2(SQRT2 + 1 + FIXTURE_EPS / 2),
}


def fixture(name: str):
    """Return ``(instance, {label: BidProfile}, budget)`` for a named counter-example."""
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}") from None


# --- instance files ---------------------------------------------------------
#
#   instance <n_users> <n_locations> <range_h> <budget|->
#   user <id> <x> <y> <cost>
#   location <id> <x> <y>
#   task <id> <location_id> <rank> <revenue>
#   edge <user_id> <task_id>
#
# One record per line, whitespace separated, '#' comments. Integer-looking ids
# are read back as int, anything else as str, so ids must not contain spaces.
# Floats are written with repr() and therefore round-trip exactly.

_INT = re.compile(r"^-?\d+$")


def _id(tok: str):
    return int(tok) if _INT.match(tok) else tok


def _check_id(v):
    s = str(v)
    if not s or any(ch.isspace() for ch in s) or s.startswith("#"):
        raise ValueError(f"id {v!r} cannot be written to an instance file")
    if isinstance(v, str) and _INT.match(s):
        raise ValueError(f"string id {v!r} would read back as an int")
    return s


def dumps_instance(instance: Instance, budget=None) -> str:
    out = [
        "# trupretar instance v1",
        f"instance {len(instance.users)} {len(instance.locations)} {instance.range_h!r} "
        + ("-" if budget is None else repr(float(budget))),
    ]
    out += [f"user {_check_id(u.id)} {u.x!r} {u.y!r} {u.cost!r}" for u in instance.users]
    out += [f"location {_check_id(l.id)} {l.x!r} {l.y!r}" for l in instance.locations]
    out += [
        f"task {_check_id(t.id)} {_check_id(t.location)} {t.rank} {t.revenue!r}"
        for t in instance.tasks
    ]
    out += [f"edge {_check_id(u)} {_check_id(t)}" for u, t in sorted(instance.edges, key=str)]
    return "\n".join(out) + "\n"


def loads_instance(text: str):
    """Parse an instance file; returns ``(instance, budget or None)``."""
    users, locations, tasks, edges = [], [], [], []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *f = line.split()
        try:
            if kind == "instance":
                header = (int(f[0]), int(f[1]), float(f[2]), None if f[3] == "-" else float(f[3]))
            elif kind == "user":
                users.append(User(_id(f[0]), float(f[1]), float(f[2]), float(f[3])))
            elif kind == "location":
                locations.append(Location(_id(f[0]), float(f[1]), float(f[2])))
            elif kind == "task":
                tasks.append(Task(_id(f[0]), _id(f[1]), int(f[2]), float(f[3])))
            elif kind == "edge":
                edges.append((_id(f[0]), _id(f[1])))
            else:
                raise ValueError(f"unknown record {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if header is None:
        raise ValueError("missing 'instance' header line")
    n, m, range_h, budget = header
    if n != len(users) or m != len(locations):
        raise ValueError("header counts do not match records")
    return Instance(tuple(users), tuple(locations), tuple(tasks), frozenset(edges), range_h), budget


def write_instance(path, instance: Instance, budget=None):
    Path(path).write_text(dumps_instance(instance, budget))


def read_instance(path):
    return loads_instance(Path(path).read_text())

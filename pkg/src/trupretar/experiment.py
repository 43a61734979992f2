"""Seeded mechanism sweeps over (m, h, B) with per-cell replication statistics.

Config files are flat ``key = value`` text, ``#`` comments, list values
comma separated::

    n_users = 200
    m_list = 10, 20, 30, 40, 50, 60
    h_list = 300, 600
    budget_list = 50, 500
    replications = 10
    seed = 0

Replication ``r`` uses seed ``seed + r`` for the instance; the demand map is
drawn once from ``world_seed`` (or loaded from ``demand_weights_file``) and
shared by every run, like a fixed city.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from statistics import fmean, variance

import numpy as np

from .baselines import run_app_opt, run_greedy_auction, run_surge
from .instances import GridWorld, InstanceConfig, generate_instance
from .mechanism import run_trupretar
from .model import BidProfile, Instance

CSV_COLUMNS = (
    "mechanism", "m", "h", "B", "seed", "revenue", "profit", "matches", "total_payment", "runtime_ms",
)
SUMMARY_COLUMNS = (
    "mechanism", "m", "h", "B", "runs",
    "revenue_mean", "revenue_var", "profit_mean", "profit_var", "matches_mean",
)
MECHANISMS = ("trupretar", "app_opt", "greedy_auction", "surge")


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    n_users: int = 200
    m_list: tuple = (10, 20, 30, 40, 50, 60)
    h_list: tuple = (300.0, 600.0)
    budget_list: tuple = (50.0, 500.0)
    cost_upper: float = 5.0
    gamma: float = 300.0
    epsilon_s: float = 1.0
    base_supply: int = 3
    demand_concentration: float = 0.3
    alpha: float = 0.8
    replications: int = 10
    seed: int = 0
    world_seed: int = 2017
    mechanisms: tuple = MECHANISMS
    grid_rows: int = 8
    grid_cols: int = 8
    cell_size_m: float = 600.0
    demand_weights_file: str | None = None
    bid_markup: float = 0.0
    drop_zero_tasks: bool = True

    def world(self) -> GridWorld:
        if self.demand_weights_file:
            return GridWorld.from_file(
                self.demand_weights_file, self.grid_rows, self.grid_cols, self.cell_size_m
            )
        return GridWorld.random(
            self.grid_rows, self.grid_cols, self.cell_size_m, self.world_seed, self.demand_concentration
        )

    def instance_config(self, m: int, h: float, seed: int) -> InstanceConfig:
        return InstanceConfig(
            n_users=self.n_users,
            n_locations=m,
            range_h=h,
            cost_upper=self.cost_upper,
            base_supply=self.base_supply,
            gamma=self.gamma,
            epsilon_s=self.epsilon_s,
            seed=seed,
            drop_zero_tasks=self.drop_zero_tasks,
        )


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


_LIST_TYPES = {"m_list": int, "h_list": float, "budget_list": float, "mechanisms": str}


def parse_config(text: str) -> ExperimentConfig:
    known = {f.name: f for f in fields(ExperimentConfig)}
    defaults = ExperimentConfig()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {lineno} is not 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(key, "unknown key")
        try:
            if key in _LIST_TYPES:
                conv = _LIST_TYPES[key]
                parsed = tuple(conv(v.strip()) for v in value.split(",") if v.strip())
                if not parsed:
                    raise ValueError("empty list")
            elif key == "demand_weights_file":
                parsed = value or None
            else:
                default = getattr(defaults, key)
                conv = _parse_bool if isinstance(default, bool) else type(default)
                parsed = conv(value)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None
        values[key] = parsed
    config = replace(defaults, **values)
    unknown = [m for m in config.mechanisms if m not in MECHANISMS]
    if unknown:
        raise ConfigError("mechanisms", f"unknown mechanism(s) {unknown}")
    if config.replications < 1:
        raise ConfigError("replications", "must be >= 1")
    if not 0 < config.alpha < 1:
        raise ConfigError("alpha", "must lie in (0, 1)")
    return config


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def _bids(instance: Instance, config: ExperimentConfig) -> BidProfile:
    return BidProfile({u.id: u.cost * (1.0 + config.bid_markup) for u in instance.users})


def _run(name, instance, bids, budget, config, seed):
    if name == "trupretar":
        return run_trupretar(instance, bids, budget, seed=seed)
    if name == "app_opt":
        return run_app_opt(instance, bids, budget)
    if name == "greedy_auction":
        return run_greedy_auction(instance, bids, budget)
    return run_surge(instance, bids, budget, config.alpha)


@dataclass
class ExperimentResult:
    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    errors: list = field(default_factory=list)


def run_sweep(config: ExperimentConfig) -> ExperimentResult:
    world = config.world()
    result = ExperimentResult()
    for m in config.m_list:
        for h in config.h_list:
            for r in range(config.replications):
                seed = config.seed + r
                instance = generate_instance(config.instance_config(m, h, seed), world)
                bids = _bids(instance, config)
                for budget in config.budget_list:
                    for name in config.mechanisms:
                        t0 = time.perf_counter()
                        try:
                            out = _run(name, instance, bids, budget, config, seed)
                        except Exception as exc:  # recorded, reflected in the exit code
                            result.errors.append(f"{name} m={m} h={h} B={budget} seed={seed}: {exc}")
                            continue
                        result.rows.append({
                            "mechanism": name, "m": m, "h": h, "B": budget, "seed": seed,
                            "revenue": out.revenue, "profit": out.profit,
                            "matches": len(out.matches), "total_payment": out.total_payment,
                            "runtime_ms": (time.perf_counter() - t0) * 1000.0,
                        })
    result.rows.sort(key=lambda row: (row["mechanism"], row["m"], row["h"], row["B"], row["seed"]))
    result.summary = summarize(result.rows)
    return result


def summarize(rows) -> list:
    cells = {}
    for row in rows:
        cells.setdefault((row["mechanism"], row["m"], row["h"], row["B"]), []).append(row)
    out = []
    for (name, m, h, b), group in sorted(cells.items()):
        rev = [g["revenue"] for g in group]
        prof = [g["profit"] for g in group]
        out.append({
            "mechanism": name, "m": m, "h": h, "B": b, "runs": len(group),
            "revenue_mean": fmean(rev),
            "revenue_var": variance(rev) if len(rev) > 1 else math.nan,
            "profit_mean": fmean(prof),
            "profit_var": variance(prof) if len(prof) > 1 else math.nan,
            "matches_mean": fmean(g["matches"] for g in group),
        })
    return out


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def to_gnuplot(summary) -> str:
    """Whitespace-separated blocks, one per (mechanism, h, B), rows by m."""
    blocks = {}
    for s in summary:
        blocks.setdefault((s["mechanism"], s["h"], s["B"]), []).append(s)
    lines = []
    for (name, h, b), group in sorted(blocks.items()):
        lines.append(f"# {name} h={h:g} B={b:g}")
        lines.append("# m revenue_mean revenue_var profit_mean profit_var")
        for s in sorted(group, key=lambda s: s["m"]):
            lines.append(
                f"{s['m']} {s['revenue_mean']!r} {s['revenue_var']!r} {s['profit_mean']!r} {s['profit_var']!r}"
            )
        lines += ["", ""]
    return "\n".join(lines)


def run_experiment(config_path, out_path, summary_path=None, gnuplot_path=None) -> ExperimentResult:
    """Run the sweep described by ``config_path`` and write the per-run CSV to ``out_path``."""
    config = load_config(config_path)
    out_path = Path(out_path)
    if not out_path.parent.is_dir():
        raise FileNotFoundError(f"output directory {out_path.parent} does not exist")
    result = run_sweep(config)
    out_path.write_text(to_csv(result.rows, CSV_COLUMNS))
    if summary_path:
        Path(summary_path).write_text(to_csv(result.summary, SUMMARY_COLUMNS))
    if gnuplot_path:
        Path(gnuplot_path).write_text(to_gnuplot(result.summary))
    return result


def revenue_samples(config: ExperimentConfig, mechanism: str, m: int, h: float, budget: float, rounds: int) -> np.ndarray:
    """Revenue of one mechanism over ``rounds`` fresh instances of a single cell."""
    world = config.world()
    out = []
    for r in range(rounds):
        seed = config.seed + r
        inst = generate_instance(config.instance_config(m, h, seed), world)
        out.append(_run(mechanism, inst, _bids(inst, config), budget, config, seed).revenue)
    return np.asarray(out)

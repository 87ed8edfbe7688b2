"""Scenario generation, evaluation and the two experiment sweeps."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from typing import Callable, Sequence

import numpy as np
from scipy.stats import spearmanr

from .baselines import dijkstra_prune, lbas, leach_c, unequal
from .dntd import dntd_to
from .model import Network, Scenario, Server, build_network, link_rate
from .topology import MASTER, OffloadTree, check_tree

RNG_NAME = "numpy PCG64 seeded by SeedSequence(seed, spawn_key=(stream,))"
# stream ids, in draw order
_POSITIONS, _COMPUTE, _SNR = 0, 1, 2

DEFAULT_XI_GRID = (10.0, 30.0, 50.0, 70.0, 90.0, 110.0, 130.0)
ALGORITHMS: dict[str, Callable[..., OffloadTree]] = {
    "dntd": dntd_to,
    "unequal": unequal,
    "leachc": leach_c,
    "lbas": lbas,
    "dijkstra": dijkstra_prune,
}


def _stream(seed: int, purpose: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(purpose,))))


def generate_scenario(
    seed: int,
    n: int,
    area: tuple[float, float] = (100.0, 100.0),
    master_pos: tuple[float, float] = (20.0, 20.0),
    comm_range_m: float = 50.0,
    f_range: tuple[float, float] = (0.1, 10.0),
    snr_db_range: tuple[float, float] = (30.0, 40.0),
    bandwidth_mhz: float = 50.0,
    cycles_per_bit: float = 1.0,
    task_size: float = 100.0,
) -> Scenario:
    """Random layout: uniform positions, compute power and per-pair SNR (dB)."""
    if n < 1:
        raise ValueError(f"need at least one server, got n={n}")
    w, h = area
    if not (w > 0 and h > 0):
        raise ValueError(f"area must have positive extent, got {area}")
    for name, (lo, hi) in (("f_range", f_range), ("snr_db_range", snr_db_range)):
        if hi < lo:
            raise ValueError(f"{name} is inverted: {(lo, hi)}")
    if f_range[0] <= 0:
        raise ValueError(f"compute power must be positive, got f_range={f_range}")

    rng = _stream(seed, _POSITIONS)
    pos = [tuple(map(float, master_pos))]
    while len(pos) < n:
        p = (float(rng.uniform(0.0, w)), float(rng.uniform(0.0, h)))
        if p not in pos:  # coincident servers would have an infinite link rate
            pos.append(p)
    f = _stream(seed, _COMPUTE).uniform(f_range[0], f_range[1], size=n)
    upper = _stream(seed, _SNR).uniform(snr_db_range[0], snr_db_range[1], size=n * (n - 1) // 2)
    table = np.zeros((n, n))
    table[np.triu_indices(n, k=1)] = upper
    table = table + table.T

    servers = tuple(Server(i, x, y, float(fi)) for i, ((x, y), fi) in enumerate(zip(pos, f)))
    return Scenario(
        servers=servers,
        snr_db=table,
        bandwidth_mhz=bandwidth_mhz,
        cycles_per_bit=cycles_per_bit,
        task_size=task_size,
        comm_range_m=comm_range_m,
        seed=seed,
    )


def trial_seed(base_seed: int, n: int, trial: int) -> int:
    """64-bit scenario seed for one trial; independent of the range so a
    range sweep reuses the same layout at every point."""
    words = np.random.SeedSequence([base_seed, n, trial]).generate_state(2, dtype=np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def evaluate_eq1(tree: OffloadTree, scenario: Scenario, network: Network) -> float:
    """Completion time with every share sent on its own over each hop.

    Heads pay their share over the master link (bandwidth split across all
    heads); members pay their share over both their head's link (split
    across the cluster) and the master link.
    """
    check_tree(tree, network, scenario.task_size)
    shares = tree.allocation.shares
    gamma = scenario.gamma
    c0 = len(tree.clusters)
    times = [shares[MASTER] * gamma[MASTER]]
    for c in tree.clusters:
        y = shares[c.head]
        up = y / link_rate(network, scenario, MASTER, c.head, c0) if y > 0 else 0.0
        times.append(up + y * gamma[c.head])
        m = len(c.members)
        for j in c.members:
            yj = shares[j]
            if yj == 0:
                times.append(0.0)
                continue
            hop = 1.0 / link_rate(network, scenario, c.head, j, m)
            hop += 1.0 / link_rate(network, scenario, MASTER, c.head, c0)
            times.append(yj * hop + yj * gamma[j])
    return float(max(times))


@dataclass
class RunResult:
    scenario_id: str
    algorithm: str
    n: int
    xi: float
    model_makespan_s: float
    eq1_makespan_s: float
    ch_count: int
    cm_count: int
    runtime_ms: float | None = None


FIELDS = [f.name for f in fields(RunResult)]


def run_algorithms(
    scenario: Scenario,
    algos: Sequence[str],
    scenario_id: str = "",
    timing: bool = False,
    options: dict | None = None,
) -> list[tuple[RunResult, OffloadTree]]:
    options = options or {}
    network = build_network(scenario)
    out = []
    for name in sorted(algos):
        build = ALGORITHMS[name]
        t0 = time.perf_counter()
        tree = build(scenario, network, **options.get(name, {}))
        elapsed = (time.perf_counter() - t0) * 1000.0
        eq1 = evaluate_eq1(tree, scenario, network)
        out.append(
            (
                RunResult(
                    scenario_id=scenario_id,
                    algorithm=name,
                    n=scenario.n,
                    xi=float(scenario.comm_range_m),
                    model_makespan_s=float(tree.makespan),
                    eq1_makespan_s=eq1,
                    ch_count=tree.ch_count,
                    cm_count=tree.cm_count,
                    runtime_ms=elapsed if timing else None,
                ),
                tree,
            )
        )
    return out


@dataclass
class ExperimentConfig:
    kind: str = "size-sweep"  # size-sweep | range-sweep | single
    n_values: tuple[int, ...] = (20, 100)
    xi_values: tuple[float, ...] = (50.0,)
    trials: int = 10
    seed: int = 0
    algos: tuple[str, ...] = tuple(ALGORITHMS)
    output: str | None = None
    format: str = "csv"
    jobs: int = 1
    timing: bool = False
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("size-sweep", "range-sweep", "single"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(n < 1 for n in self.n_values):
            raise ValueError("every N must be >= 1")
        if any(x < 0 for x in self.xi_values):
            raise ValueError("every range must be >= 0")
        unknown = set(self.algos) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")

    def points(self) -> list[tuple[int, float]]:
        return [(n, xi) for n in self.n_values for xi in self.xi_values]


def _run_unit(unit: tuple[int, float, int], config: ExperimentConfig) -> list[RunResult]:
    n, xi, trial = unit
    seed = trial_seed(config.seed, n, trial)
    scenario = generate_scenario(seed, n, comm_range_m=xi)
    sid = f"n{n}-xi{xi:g}-t{trial}-{seed:016x}"
    return [r for r, _ in run_algorithms(scenario, config.algos, sid, config.timing, config.options)]


def run_experiment(config: ExperimentConfig) -> tuple[list[RunResult], list[dict]]:
    """Run every (point, trial) and return rows plus per-point summaries.

    Rows are ordered by point, trial, then algorithm name regardless of
    ``jobs``.
    """
    units = [(n, xi, t) for n, xi in config.points() for t in range(config.trials)]
    work = partial(_run_unit, config=config)
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(work, units))
    else:
        chunks = [work(u) for u in units]
    rows = [r for chunk in chunks for r in chunk]
    return rows, summarize(rows)


def summarize(rows: Sequence[RunResult]) -> list[dict]:
    groups: dict[tuple[str, int, float], list[RunResult]] = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.n, r.xi), []).append(r)
    out = []
    for (algo, n, xi), rs in sorted(groups.items()):
        eq1 = np.array([r.eq1_makespan_s for r in rs])
        model = np.array([r.model_makespan_s for r in rs])
        out.append(
            {
                "algorithm": algo,
                "n": n,
                "xi": xi,
                "trials": len(rs),
                "eq1_mean": float(eq1.mean()),
                "eq1_std": float(eq1.std()),
                "model_mean": float(model.mean()),
                "model_std": float(model.std()),
            }
        )
    return out


def range_trend(summary: Sequence[dict], metric: str = "eq1_mean") -> dict[tuple[str, int], float]:
    """Spearman correlation of the mean metric against range, per algorithm and N."""
    series: dict[tuple[str, int], list[tuple[float, float]]] = {}
    for s in summary:
        series.setdefault((s["algorithm"], s["n"]), []).append((s["xi"], s[metric]))
    out = {}
    for key, pts in sorted(series.items()):
        if len(pts) < 2:
            continue
        xs, ys = zip(*sorted(pts))
        rho = spearmanr(xs, ys).statistic
        out[key] = float(rho) if not math.isnan(rho) else 0.0
    return out


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def results_to_csv(rows: Sequence[RunResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELDS)
    for r in rows:
        writer.writerow([_cell(getattr(r, k)) for k in FIELDS])
    return buf.getvalue()


def results_to_json(rows: Sequence[RunResult]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2) + "\n"


def read_results(text: str, fmt: str) -> list[RunResult]:
    if fmt == "json":
        return [RunResult(**d) for d in json.loads(text)]
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for d in reader:
        rows.append(
            RunResult(
                scenario_id=d["scenario_id"],
                algorithm=d["algorithm"],
                n=int(d["n"]),
                xi=float(d["xi"]),
                model_makespan_s=float(d["model_makespan_s"]),
                eq1_makespan_s=float(d["eq1_makespan_s"]),
                ch_count=int(d["ch_count"]),
                cm_count=int(d["cm_count"]),
                runtime_ms=float(d["runtime_ms"]) if d["runtime_ms"] else None,
            )
        )
    return rows


"""Network geometry plus the radio and compute cost models.

Canonical units throughout the package: seconds, Gbits, meters.
Bandwidth is given in MHz and compute power in MHz (cycles per microsecond),
so a link rate of ``B*log2(1 + snr/d**2)`` Mbit/s becomes Gbit/s after
dividing by 1000, and processing one Gbit on a server takes ``1000*b/f``
seconds.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np


class ScenarioError(ValueError):
    """Raised when a scenario violates its invariants."""


@dataclass(frozen=True)
class Server:
    id: int
    x: float
    y: float
    compute_mhz: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable world description.

    ``snr_db`` is a symmetric N x N table of link SNRs in dB; the diagonal is
    ignored. Linear ratios are exposed through :attr:`snr`.
    """

    servers: tuple[Server, ...]
    snr_db: np.ndarray
    bandwidth_mhz: float = 50.0
    cycles_per_bit: float = 1.0
    task_size: float = 100.0
    comm_range_m: float = 50.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "servers", tuple(self.servers))
        snr_db = np.array(self.snr_db, dtype=float)
        snr_db.setflags(write=False)
        object.__setattr__(self, "snr_db", snr_db)
        n = len(self.servers)
        if n < 1:
            raise ScenarioError("scenario needs at least the master server")
        if not self.task_size > 0:
            raise ScenarioError(f"task_size must be positive, got {self.task_size}")
        if not self.bandwidth_mhz > 0:
            raise ScenarioError(f"bandwidth_mhz must be positive, got {self.bandwidth_mhz}")
        if not self.cycles_per_bit > 0:
            raise ScenarioError(f"cycles_per_bit must be positive, got {self.cycles_per_bit}")
        if not self.comm_range_m >= 0:
            raise ScenarioError(f"comm_range_m must be >= 0, got {self.comm_range_m}")
        if snr_db.shape != (n, n):
            raise ScenarioError(f"snr table shape {snr_db.shape} does not match {n} servers")
        if not np.array_equal(snr_db, snr_db.T):
            raise ScenarioError("snr table must be symmetric")
        if not np.all(np.isfinite(snr_db)):
            raise ScenarioError("snr table must be finite")
        for s in self.servers:
            if not s.compute_mhz > 0:
                raise ScenarioError(f"server {s.id}: compute_mhz must be positive")

    @property
    def n(self) -> int:
        return len(self.servers)

    @cached_property
    def snr(self) -> np.ndarray:
        """Linear SNR ratios, 10**(dB/10)."""
        return np.power(10.0, self.snr_db / 10.0)

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.servers], dtype=float).reshape(-1, 2)

    @cached_property
    def gamma(self) -> np.ndarray:
        """Per-server processing time in seconds per Gbit."""
        return np.array([unit_compute_time(s, self) for s in self.servers])

    def with_range(self, comm_range_m: float) -> "Scenario":
        return Scenario(
            servers=self.servers,
            snr_db=self.snr_db,
            bandwidth_mhz=self.bandwidth_mhz,
            cycles_per_bit=self.cycles_per_bit,
            task_size=self.task_size,
            comm_range_m=comm_range_m,
            seed=self.seed,
        )

    # -- file format -------------------------------------------------------

    def to_dict(self) -> dict:
        iu = np.triu_indices(self.n, k=1)
        return {
            "seed": int(self.seed),
            "bandwidth_mhz": float(self.bandwidth_mhz),
            "cycles_per_bit": float(self.cycles_per_bit),
            "task_size": float(self.task_size),
            "comm_range_m": float(self.comm_range_m),
            "servers": [
                {"id": s.id, "x": float(s.x), "y": float(s.y), "f_mhz": float(s.compute_mhz)}
                for s in self.servers
            ],
            # row-major upper triangle, i < j
            "snr_db": [float(v) for v in self.snr_db[iu]],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        try:
            servers = tuple(
                Server(int(s["id"]), float(s["x"]), float(s["y"]), float(s["f_mhz"]))
                for s in data["servers"]
            )
            n = len(servers)
            upper = np.asarray(data["snr_db"], dtype=float)
            if upper.size != n * (n - 1) // 2:
                raise ScenarioError(
                    f"snr_db has {upper.size} entries, expected {n * (n - 1) // 2}"
                )
            table = np.zeros((n, n))
            iu = np.triu_indices(n, k=1)
            table[iu] = upper
            table = table + table.T
            return cls(
                servers=servers,
                snr_db=table,
                bandwidth_mhz=float(data["bandwidth_mhz"]),
                cycles_per_bit=float(data["cycles_per_bit"]),
                task_size=float(data["task_size"]),
                comm_range_m=float(data["comm_range_m"]),
                seed=int(data.get("seed", 0)),
            )
        except KeyError as exc:
            raise ScenarioError(f"scenario is missing field {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class Network:
    """Unit-disk graph derived from a scenario.

    ``unit_delay[i, j]`` is the time to push one Gbit over link (i, j) when
    the transmitter uses its whole bandwidth; it is ``inf`` off the edge set.
    """

    adjacency: np.ndarray
    distances: np.ndarray
    neighbor_sets: tuple[tuple[int, ...], ...]
    unit_delay: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.neighbor_sets[i]

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(i.tolist(), j.tolist()))


def build_network(scenario: Scenario) -> Network:
    ids = [s.id for s in scenario.servers]
    if len(set(ids)) != len(ids):
        raise ScenarioError(f"duplicate server ids in {ids}")
    if ids != list(range(len(ids))):
        raise ScenarioError("server ids must be 0..N-1 in order, master first")

    pos = scenario.positions
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(dist, 0.0)
    adj = dist <= scenario.comm_range_m
    np.fill_diagonal(adj, False)
    # coincident distinct servers would have an infinite rate
    if np.any(adj & (dist == 0.0)):
        raise ScenarioError("distinct servers share a position")

    with np.errstate(divide="ignore"):
        spectral = np.log1p(scenario.snr / np.where(adj, dist, 1.0) ** 2) / math.log(2.0)
        delay = np.where(adj, 1000.0 / (scenario.bandwidth_mhz * spectral), np.inf)

    for arr in (adj, dist, delay):
        arr.setflags(write=False)
    neighbor_sets = tuple(tuple(np.flatnonzero(row).tolist()) for row in adj)
    return Network(adjacency=adj, distances=dist, neighbor_sets=neighbor_sets, unit_delay=delay)


def link_rate(network: Network, scenario: Scenario, i: int, j: int, m: int = 1) -> float:
    """Rate in Gbit/s of link i -> j while i feeds ``m`` receivers at once."""
    if i == j:
        raise ValueError(f"no self link for server {i}")
    if not network.adjacency[i, j]:
        raise ValueError(f"servers {i} and {j} are out of range")
    if m < 1:
        raise ValueError(f"receiver count must be >= 1, got {m}")
    d = network.distances[i, j]
    return scenario.bandwidth_mhz / m * math.log1p(scenario.snr[i, j] / d**2) / math.log(2.0) / 1000.0


def unit_compute_time(server: Server, scenario: Scenario) -> float:
    """Seconds to process one Gbit: b * 1e9 cycles at f * 1e6 cycles/s."""
    return 1000.0 * scenario.cycles_per_bit / server.compute_mhz


def make_scenario(
    positions: Sequence[tuple[float, float]],
    compute_mhz: Sequence[float],
    snr_db: float | np.ndarray = 30.0,
    **kwargs,
) -> Scenario:
    """Convenience constructor for hand-built layouts (tests, examples)."""
    servers = tuple(
        Server(i, float(x), float(y), float(f))
        for i, ((x, y), f) in enumerate(zip(positions, compute_mhz, strict=True))
    )
    n = len(servers)
    if np.isscalar(snr_db):
        table = np.full((n, n), float(snr_db))
    else:
        table = np.asarray(snr_db, dtype=float)
    return Scenario(servers=servers, snr_db=table, **kwargs)

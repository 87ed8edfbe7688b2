"""Optimal divisible-task allocation over a fixed set of workers.

A worker is characterised by its capacity: the time in seconds it needs to
receive and process one Gbit. With a min-max objective the optimum loads
every worker equally, so the makespan is ``y / sum(1/alpha)``.

:class:`IncrementalAllocator` maintains that optimum while workers are added
one at a time, which is how cluster members and cluster heads are admitted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


class AllocationError(RuntimeError):
    """Internal consistency failure while updating shares."""


@dataclass(frozen=True)
class Allocation:
    shares: dict[int, float]
    makespan: float

    @property
    def total(self) -> float:
        return math.fsum(self.shares.values())


@dataclass(frozen=True)
class Worker:
    """A server seen from its parent: compute cost plus per-channel link delay."""

    id: int
    gamma: float
    unit_delay: float = 0.0

    def capacity(self, channels: int) -> float:
        return self.gamma + channels * self.unit_delay


def _as_mapping(capacities: Mapping[int, float] | Sequence[float]) -> dict[int, float]:
    if isinstance(capacities, Mapping):
        caps = {int(k): float(v) for k, v in capacities.items()}
    else:
        caps = {i: float(v) for i, v in enumerate(capacities)}
    if not caps:
        raise ValueError("need at least one worker")
    for k, v in caps.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"capacity of worker {k} must be positive and finite, got {v}")
    return caps


def balanced_allocation(
    capacities: Mapping[int, float] | Sequence[float], y: float
) -> Allocation:
    """Closed-form min-max split of ``y`` Gbits.

    Sequences are keyed by position, mappings by their keys.
    """
    caps = _as_mapping(capacities)
    if y < 0:
        raise ValueError(f"task size must be >= 0, got {y}")
    if len(caps) == 1:
        (k, a), = caps.items()
        return Allocation({k: float(y)}, a * y)
    speed = math.fsum(1.0 / a for a in caps.values())
    makespan = y / speed
    return Allocation({k: makespan / a for k, a in caps.items()}, makespan)


def lp_oracle(
    capacities: Mapping[int, float] | Sequence[float], y: float, rtol: float = 1e-12
) -> Allocation:
    """Solve ``min z s.t. z >= alpha_l*y_l, sum(y_l) = y`` by bisection on z.

    A makespan z is feasible iff the workers can absorb ``sum(z/alpha_l) >= y``.
    Independent of the closed form; used to cross-check it.
    """
    caps = _as_mapping(capacities)
    if y < 0:
        raise ValueError(f"task size must be >= 0, got {y}")
    alphas = list(caps.values())
    if y == 0:
        return Allocation({k: 0.0 for k in caps}, 0.0)

    def absorbed(z: float) -> float:
        return math.fsum(z / a for a in alphas)

    lo, hi = 0.0, y * min(alphas)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if absorbed(mid) >= y:
            hi = mid
        else:
            lo = mid
    raw = {k: hi / a for k, a in caps.items()}
    scale = y / math.fsum(raw.values())
    return Allocation({k: v * scale for k, v in raw.items()}, hi)


class IncrementalAllocator:
    """Optimal shares for a growing worker set.

    The first worker is the head (the server that owns the task). Adding a
    worker may change every committed worker's capacity (e.g. because the
    head's bandwidth is split one more way), so each step takes the updated
    capacities of all committed workers alongside the candidate's.
    """

    def __init__(self, head: int, head_capacity: float, y: float):
        if not y > 0:
            raise ValueError(f"task size must be positive, got {y}")
        if not (head_capacity > 0 and math.isfinite(head_capacity)):
            raise ValueError(f"head capacity must be positive and finite, got {head_capacity}")
        self.ids: list[int] = [head]
        self.alpha = np.array([head_capacity], dtype=float)
        self.shares = np.array([y], dtype=float)
        self.y = float(y)
        self.k = 0

    @property
    def head(self) -> int:
        return self.ids[0]

    @property
    def makespan(self) -> float:
        return float(self.shares[0] * self.alpha[0])

    def allocation(self) -> Allocation:
        return Allocation(dict(zip(self.ids, self.shares.tolist())), self.makespan)

    def _check_updated(self, candidate: int, updated: Sequence[float]) -> np.ndarray:
        if candidate in self.ids:
            raise ValueError(f"worker {candidate} is already committed")
        upd = np.asarray(updated, dtype=float)
        if upd.shape != self.alpha.shape:
            raise ValueError(
                f"expected {len(self.ids)} updated capacities, got {upd.shape}"
            )
        return upd

    def indicator(
        self, candidate: int, candidate_capacity: float, updated: Sequence[float]
    ) -> float:
        """Ratio of optimal makespans before and after admitting ``candidate``.

        ``updated`` holds the committed workers' capacities after admission,
        in :attr:`ids` order. A value above 1 means admission helps.
        """
        upd = self._check_updated(candidate, updated)
        before = self.makespan
        # sum_l y_l*alpha_l/alpha_bar_l + J_before/alpha_bar_j, normalised by y
        num = math.fsum((self.shares * self.alpha / upd).tolist()) + before / candidate_capacity
        return num / self.y

    def commit(
        self,
        candidate: int,
        candidate_capacity: float,
        updated: Sequence[float],
        indicator: float | None = None,
    ) -> float:
        """Admit ``candidate`` and rebalance shares; returns the indicator used."""
        upd = self._check_updated(candidate, updated)
        if indicator is None:
            indicator = self.indicator(candidate, candidate_capacity, upd)
        ratio = self.alpha / (indicator * upd)
        new_share = math.fsum(((1.0 - ratio) * self.shares).tolist())
        if new_share < -1e-9 * self.y:
            raise AllocationError(
                f"negative share {new_share} for worker {candidate}; capacities inconsistent"
            )
        self.shares = np.append(self.shares * ratio, max(new_share, 0.0))
        self.alpha = np.append(upd, float(candidate_capacity))
        self.ids.append(candidate)
        self.k += 1
        return indicator


def opti_solver_p1(head: Worker, cluster: Sequence[Worker], y: float) -> dict[int, float]:
    """Optimal split of ``y`` over a head and a fixed, ordered member list.

    Members are admitted one by one regardless of the indicator value; the
    head's bandwidth is shared by all admitted members.
    """
    state = IncrementalAllocator(head.id, head.gamma, y)
    committed: list[Worker] = []
    for k, worker in enumerate(cluster):
        channels = k + 1
        updated = [head.gamma] + [w.capacity(channels) for w in committed]
        state.commit(worker.id, worker.capacity(channels), updated)
        committed.append(worker)
    return dict(zip(state.ids, state.shares.tolist()))

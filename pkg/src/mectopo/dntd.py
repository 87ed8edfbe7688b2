"""Greedy three-layer topology design.

Every server in the master's range forms a candidate cluster by admitting
its neighbors one by one (:func:`lcf`); the master then admits whole
candidate clusters one by one (:func:`dntd_to`). In both loops the cheapest
candidate is tried and admitted only if it strictly lowers the optimal
makespan. Chosen clusters leave the pool, and the remaining candidates
rebuild their clusters from what is left.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .allocation import IncrementalAllocator
from .model import Network, Scenario
from .topology import MASTER, Cluster, OffloadTree, assemble_tree, head_capacity


def lcf(
    head: int,
    pool: Iterable[int],
    y: float,
    scenario: Scenario,
    network: Network,
    trace: list | None = None,
) -> tuple[Cluster, dict[int, float]]:
    """Form a cluster around ``head`` from the candidate ``pool``.

    Returns the cluster and the optimal split of ``y`` across it. When
    ``trace`` is a list, each tried ``(candidate, indicator, admitted)`` is
    appended to it.
    """
    pool = np.array(sorted(set(pool)), dtype=int)
    if pool.size and not network.adjacency[head, pool].all():
        raise ValueError(f"pool contains servers outside the range of {head}")
    gamma = scenario.gamma
    g_pool = gamma[pool]
    u_pool = network.unit_delay[head, pool]
    g_head = float(gamma[head])

    state = IncrementalAllocator(head, g_head, y)
    open_ = np.ones(pool.size, dtype=bool)
    taken: list[int] = []  # indices into pool
    for _ in range(pool.size):
        channels = len(taken) + 1
        caps = np.where(open_, g_pool + channels * u_pool, np.inf)
        pick = int(np.argmin(caps))  # first minimum = lowest id
        cand = int(pool[pick])
        idx = np.array(taken, dtype=int)
        updated = np.concatenate(([g_head], g_pool[idx] + channels * u_pool[idx]))
        ind = state.indicator(cand, float(caps[pick]), updated)
        admitted = ind > 1.0
        if trace is not None:
            trace.append((cand, ind, admitted))
        if not admitted:
            break
        state.commit(cand, float(caps[pick]), updated, ind)
        taken.append(pick)
        open_[pick] = False

    shares = dict(zip(state.ids, state.shares.tolist()))
    split = {k: v / y for k, v in shares.items()}
    team_time = state.makespan / y
    return Cluster(head, tuple(int(pool[i]) for i in taken), team_time, split), shares


def eta_capacity(
    cluster: Cluster, c0_size_after: int, scenario: Scenario, network: Network
) -> float:
    """Capacity of a head and its members as one team, seen by the master.

    The master itself is always worth ``gamma_0``.
    """
    if cluster.head == MASTER:
        return float(scenario.gamma[MASTER])
    return head_capacity(cluster, c0_size_after, network)


def dntd_to(
    scenario: Scenario,
    network: Network,
    total: float | None = None,
    trace: list | None = None,
) -> OffloadTree:
    """Build the tree and its optimal allocation for a task of ``total`` Gbits.

    ``trace`` collects one ``(head, indicator, admitted)`` entry per outer
    iteration.
    """
    y = scenario.task_size if total is None else float(total)
    gamma0 = float(scenario.gamma[MASTER])
    state = IncrementalAllocator(MASTER, gamma0, y)
    in_tree = {MASTER}
    free = list(network.neighbors(MASTER))
    chosen: list[Cluster] = []
    history = [state.makespan]
    cache: dict[int, tuple[tuple[int, ...], Cluster]] = {}

    for _ in range(len(network.neighbors(MASTER))):
        if not free:
            break
        candidates = {}
        for head in free:
            pool = tuple(j for j in network.neighbors(head) if j not in in_tree)
            hit = cache.get(head)
            if hit is None or hit[0] != pool:
                # LCF output depends only on the pool, so reuse unchanged ones
                hit = (pool, lcf(head, pool, y, scenario, network)[0])
                cache[head] = hit
            candidates[head] = hit[1]

        c0_after = len(chosen) + 1
        eta_bar = {h: eta_capacity(c, c0_after, scenario, network) for h, c in candidates.items()}
        best = min(free, key=lambda h: (eta_bar[h], h))
        updated = [gamma0] + [eta_capacity(c, c0_after, scenario, network) for c in chosen]
        ind = state.indicator(best, eta_bar[best], updated)
        admitted = ind > 1.0
        if trace is not None:
            trace.append((best, ind, admitted))
        if not admitted:
            break
        state.commit(best, eta_bar[best], updated, ind)
        cluster = candidates[best]
        chosen.append(cluster)
        in_tree.update(cluster.servers)
        free = [h for h in free if h not in in_tree]
        history.append(state.makespan)

    shares = dict(zip(state.ids, state.shares.tolist()))
    team = {c.head: shares[c.head] for c in chosen}
    return assemble_tree(chosen, team, shares[MASTER], state.makespan, history)

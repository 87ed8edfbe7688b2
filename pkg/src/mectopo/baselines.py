"""Benchmark topology builders.

Each builder only decides who is a cluster head and who joins which head;
the allocation is then computed with :func:`allocate_tree`, the same nested
balancing the greedy designer uses. None of them leaves out a reachable
server, however slow.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

from .model import Network, Scenario
from .topology import MASTER, OffloadTree, allocate_tree

LBAS_WEIGHTS = (1 / 3, 1 / 3, 1 / 3)


def _by_f_desc(ids, scenario: Scenario) -> list[int]:
    return sorted(ids, key=lambda i: (-scenario.servers[i].compute_mhz, i))


def _attach(heads, network: Network, key) -> dict[int, list[int]]:
    """Every other reachable server joins the head minimising ``key(head, j)``."""
    layout = {h: [] for h in heads}
    head_set = set(heads)
    for j in range(1, network.n):
        if j in head_set:
            continue
        options = [h for h in heads if network.adjacency[h, j]]
        if options:
            layout[min(options, key=lambda h: (key(h, j), h))].append(j)
    return layout


def unequal(scenario: Scenario, network: Network) -> OffloadTree:
    """Heads by compute power, no two heads in range; members join the nearest head."""
    heads: list[int] = []
    for i in _by_f_desc(network.neighbors(MASTER), scenario):
        if not any(network.adjacency[i, h] for h in heads):
            heads.append(i)
    heads.sort()
    layout = _attach(heads, network, lambda h, j: network.distances[h, j])
    return allocate_tree(scenario, network, layout)


def leach_c(scenario: Scenario, network: Network, ch_fraction: float = 0.2) -> OffloadTree:
    """Top ``ch_fraction`` of the master's neighbors by compute power become heads.

    Members join the head with the strongest received signal, SNR / d**2.
    """
    if not 0 < ch_fraction <= 1:
        raise ValueError(f"ch_fraction must be in (0, 1], got {ch_fraction}")
    cands = network.neighbors(MASTER)
    count = math.ceil(ch_fraction * len(cands))
    heads = sorted(_by_f_desc(cands, scenario)[:count])
    d2 = network.distances**2
    layout = _attach(heads, network, lambda h, j: -scenario.snr[h, j] / d2[h, j])
    return allocate_tree(scenario, network, layout)


def _normalise(values: np.ndarray) -> np.ndarray:
    top = values.max() if values.size else 0.0
    return values / top if top > 0 else np.zeros_like(values)


def lbas(
    scenario: Scenario, network: Network, weights: tuple[float, float, float] = LBAS_WEIGHTS
) -> OffloadTree:
    """Score-based heads and members.

    Score = w_f*f + w_n*degree + w_d*(1 - distance), each term normalised by
    its maximum. The best-scoring candidate becomes a head and its neighbors
    drop out of head contention; repeat until no candidate is left. Heads
    then claim their still-unassigned neighbors in selection order, each
    ranking members by the same score measured from the head.
    """
    w_f, w_n, w_d = weights
    f = np.array([s.compute_mhz for s in scenario.servers])
    deg = network.adjacency.sum(axis=1).astype(float)
    f_n = _normalise(f)
    deg_n = _normalise(deg)

    def score(frm: int, ids: list[int]) -> dict[int, float]:
        idx = np.array(ids, dtype=int)
        d_n = _normalise(network.distances[frm, idx])
        vals = w_f * f_n[idx] + w_n * deg_n[idx] + w_d * (1.0 - d_n)
        return dict(zip(ids, vals.tolist()))

    remaining = list(network.neighbors(MASTER))
    ranking = score(MASTER, remaining) if remaining else {}
    heads: list[int] = []
    while remaining:
        best = max(remaining, key=lambda i: (ranking[i], -i))
        heads.append(best)
        remaining = [i for i in remaining if i != best and not network.adjacency[best, i]]

    taken = {MASTER, *heads}
    layout: dict[int, list[int]] = {}
    for h in heads:
        free = [j for j in network.neighbors(h) if j not in taken]
        if free:
            s = score(h, free)
            free.sort(key=lambda j: (-s[j], j))
        layout[h] = free
        taken.update(free)
    return allocate_tree(scenario, network, dict(sorted(layout.items())))


def shortest_path_tree(network: Network, source: int = MASTER) -> tuple[dict[int, float], dict[int, int]]:
    """Dijkstra over unit-task link delays; ties settle on the lower id."""
    dist = {source: 0.0}
    parent: dict[int, int] = {}
    done: set[int] = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in network.neighbors(u):
            if v in done:
                continue
            nd = d + float(network.unit_delay[u, v])
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent


def dijkstra_prune(scenario: Scenario, network: Network) -> OffloadTree:
    """Least-delay routes from the master, cut after two hops."""
    _, parent = shortest_path_tree(network)
    heads = sorted(v for v, p in parent.items() if p == MASTER)
    layout = {h: sorted(v for v, p in parent.items() if p == h) for h in heads}
    return allocate_tree(scenario, network, layout)

"""Three-layer offloading trees: master -> cluster heads -> cluster members."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .allocation import Allocation, Worker, balanced_allocation, opti_solver_p1
from .model import Network, Scenario

MASTER = 0


class TopologyError(ValueError):
    """A tree violates the three-layer structure or its allocation."""


@dataclass(frozen=True)
class Cluster:
    head: int
    members: tuple[int, ...]
    # time for the head plus members, as a team, to process one Gbit once
    # it has reached the head (member link delays included)
    per_unit_team_time: float
    # share of the team's task processed by each server, sums to 1
    split: dict[int, float] = field(default_factory=dict)

    @property
    def servers(self) -> tuple[int, ...]:
        return (self.head, *self.members)


@dataclass
class OffloadTree:
    clusters: tuple[Cluster, ...]
    allocation: Allocation
    team_shares: dict[int, float]
    master: int = MASTER
    # model makespan after each committed cluster, starting from master-only
    history: list[float] = field(default_factory=list)

    @property
    def heads(self) -> tuple[int, ...]:
        return tuple(c.head for c in self.clusters)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(m for c in self.clusters for m in c.members)

    @property
    def servers(self) -> tuple[int, ...]:
        return (self.master, *(s for c in self.clusters for s in c.servers))

    @property
    def ch_count(self) -> int:
        return len(self.clusters)

    @property
    def cm_count(self) -> int:
        return len(self.members)

    @property
    def makespan(self) -> float:
        return self.allocation.makespan

    def parent(self) -> dict[int, int]:
        out = {}
        for c in self.clusters:
            out[c.head] = self.master
            for m in c.members:
                out[m] = c.head
        return out

    def to_dict(self) -> dict:
        return {
            "master": self.master,
            "master_share": self.allocation.shares[self.master],
            "model_makespan_s": self.allocation.makespan,
            "clusters": [
                {
                    "head": c.head,
                    "members": list(c.members),
                    "team_share": self.team_shares[c.head],
                    "team_unit_time": c.per_unit_team_time,
                    "shares": {str(s): self.allocation.shares[s] for s in c.servers},
                }
                for c in self.clusters
            ],
        }


def team_cluster(head: int, members: Sequence[int], scenario: Scenario, network: Network) -> Cluster:
    """Balance a fixed cluster internally and report its per-unit team time."""
    gamma = scenario.gamma
    lead = Worker(head, float(gamma[head]))
    workers = [Worker(m, float(gamma[m]), float(network.unit_delay[head, m])) for m in members]
    split = opti_solver_p1(lead, workers, 1.0)
    return Cluster(head, tuple(members), split[head] * lead.gamma, split)


def head_capacity(cluster: Cluster, c0_size: int, network: Network, master: int = MASTER) -> float:
    """Team time plus the master->head link delay with ``c0_size`` heads served."""
    if not network.adjacency[master, cluster.head]:
        raise ValueError(f"server {cluster.head} is not adjacent to the master")
    return cluster.per_unit_team_time + c0_size * float(network.unit_delay[master, cluster.head])


def assemble_tree(
    clusters: Sequence[Cluster],
    team_shares: Mapping[int, float],
    master_share: float,
    makespan: float,
    history: Sequence[float] = (),
    master: int = MASTER,
) -> OffloadTree:
    shares = {master: master_share}
    for c in clusters:
        total = team_shares[c.head]
        for s in c.servers:
            shares[s] = total * c.split[s]
    return OffloadTree(
        clusters=tuple(clusters),
        allocation=Allocation(shares, makespan),
        team_shares=dict(team_shares),
        master=master,
        history=list(history) or [makespan],
    )


def allocate_tree(
    scenario: Scenario,
    network: Network,
    layout: Mapping[int, Sequence[int]],
    total: float | None = None,
) -> OffloadTree:
    """Optimal allocation for a given head -> members layout.

    Each cluster is balanced internally first, then the master balances its
    own compute against every team's capacity.
    """
    y = scenario.task_size if total is None else total
    clusters = [team_cluster(h, list(ms), scenario, network) for h, ms in layout.items()]
    caps = {MASTER: float(scenario.gamma[MASTER])}
    for c in clusters:
        caps[c.head] = head_capacity(c, len(clusters), network)
    alloc = balanced_allocation(caps, y)
    team = {c.head: alloc.shares[c.head] for c in clusters}
    return assemble_tree(clusters, team, alloc.shares[MASTER], alloc.makespan)


def check_tree(tree: OffloadTree, network: Network, total: float, rtol: float = 1e-9) -> None:
    """Raise :class:`TopologyError` unless every structural invariant holds."""
    seen: set[int] = {tree.master}
    for c in tree.clusters:
        if not network.adjacency[tree.master, c.head]:
            raise TopologyError(f"head {c.head} is not adjacent to the master")
        for s in c.servers:
            if s in seen:
                raise TopologyError(f"server {s} appears more than once in the tree")
            seen.add(s)
        for m in c.members:
            if not network.adjacency[c.head, m]:
                raise TopologyError(f"member {m} is not adjacent to head {c.head}")
    if set(tree.allocation.shares) != seen:
        extra = set(tree.allocation.shares) - seen
        raise TopologyError(f"allocation and tree disagree on servers (extra: {sorted(extra)})")
    if any(v < 0 for v in tree.allocation.shares.values()):
        raise TopologyError("negative share in allocation")
    got = math.fsum(tree.allocation.shares.values())
    if abs(got - total) > rtol * total:
        raise TopologyError(f"shares sum to {got!r}, expected {total!r}")

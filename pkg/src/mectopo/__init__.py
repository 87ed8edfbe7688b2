"""Three-layer task-offloading topologies for mobile edge computing."""
from .allocation import (
    Allocation,
    AllocationError,
    IncrementalAllocator,
    Worker,
    balanced_allocation,
    lp_oracle,
    opti_solver_p1,
)
from .baselines import dijkstra_prune, lbas, leach_c, unequal
from .dntd import dntd_to, eta_capacity, lcf
from .harness import ExperimentConfig, RunResult, evaluate_eq1, generate_scenario, run_experiment
from .model import Network, Scenario, ScenarioError, Server, build_network, link_rate, unit_compute_time
from .topology import Cluster, OffloadTree, TopologyError, allocate_tree, check_tree

__version__ = "0.1.0"

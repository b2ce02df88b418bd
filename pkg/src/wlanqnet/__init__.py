"""Throughput and queue-occupancy model for single-station WLAN downloads.

Pipeline: PHY/MAC parameters -> DCF service-time analysis -> closed 3-center
queueing network (analysis) and event-driven simulation (cross-check).
"""

from .dcf import DcfServiceModel, build_service_model
from .enumeration import enumerate_solution
from .params import (ConfigError, PhyMacParams, Scenario, default_scenario,
                     dump_scenario, load_scenario, scenario_to_config, validate)
from .qnet import (QnetSolution, QnetSpec, analyze_scenario,
                   marginal_distribution, normalization_constants,
                   solve_convolution, solve_mva, spec_for_scenario)
from .sim import ReplicationResult, SimResult, run_replication, run_sim

__all__ = [
    "ConfigError", "PhyMacParams", "Scenario", "default_scenario",
    "dump_scenario", "load_scenario", "scenario_to_config", "validate",
    "DcfServiceModel", "build_service_model",
    "QnetSpec", "QnetSolution", "normalization_constants", "solve_convolution",
    "solve_mva", "marginal_distribution", "spec_for_scenario", "analyze_scenario",
    "enumerate_solution",
    "ReplicationResult", "SimResult", "run_replication", "run_sim",
]

__version__ = "0.1.0"

"""Stationary gas networks: isothermal pipe physics and the network model."""
from .network import (Arc, GasModelMap, GasNetwork, Node, build_minlp, fix_tree_flows,
                      gas_big_m, network_state, verify_state)
from .physics import (BAR, DomainError, GasConstants, GasPipeOracle, Pipe, PipeInfeasibleError,
                      PipeParams)

__all__ = ["Arc", "BAR", "DomainError", "GasConstants", "GasModelMap", "GasNetwork",
           "GasPipeOracle", "Node", "Pipe", "PipeInfeasibleError", "PipeParams", "build_minlp",
           "fix_tree_flows", "gas_big_m", "network_state", "verify_state"]

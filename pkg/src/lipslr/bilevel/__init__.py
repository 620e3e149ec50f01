"""Bilevel quadratic problems solved through a value-function reformulation."""
from .instance import BilevelInstance, eliminate_bilinear
from .oracles import Assumption1Error, PhiOracle, QuadraticOracle
from .reformulate import BilevelConfig, BilevelMap, BilevelResult, reformulate, solve_bilevel

__all__ = ["Assumption1Error", "BilevelConfig", "BilevelInstance", "BilevelMap", "BilevelResult",
           "PhiOracle", "QuadraticOracle", "eliminate_bilinear", "reformulate", "solve_bilevel"]

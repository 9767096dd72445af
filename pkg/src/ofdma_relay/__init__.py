"""Resource allocation for downlink OFDMA aided by a decode-and-forward relay."""

from .config import ConfigError, SystemConfig
from .channel import GainTable, Geometry, build_gain_table
from .dual_solver import (Allocation, InfeasibleAllocationError, Protocol,
                          SolveMode, SolveReport, evaluate_wsr, solve)
from .oracle import OracleResult, oracle_solve

__all__ = [
    "Allocation", "ConfigError", "GainTable", "Geometry",
    "InfeasibleAllocationError", "OracleResult", "Protocol", "SolveMode",
    "SolveReport", "SystemConfig", "build_gain_table", "evaluate_wsr",
    "oracle_solve", "solve",
]

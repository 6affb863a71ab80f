"""Proactive monitoring of a malicious cell-free ISAC network by a full-duplex monitor."""

from .scenario import ConfigError, NetworkRealization, SystemParams, generate_realization, reduced_params
from .estimation import EstimationStats, estimation_stats
from .sinr import (
    Eta, PowerAllocation, QCoefficients, SinrBreakdown, default_ap_power_control,
    q_coefficients, sinr_cpu, sinr_monitor, sinr_ue,
)
from .optimizer import solve_p1, solve_p2

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "NetworkRealization", "SystemParams", "generate_realization", "reduced_params",
    "EstimationStats", "estimation_stats", "Eta", "PowerAllocation", "QCoefficients", "SinrBreakdown",
    "default_ap_power_control", "q_coefficients", "sinr_cpu", "sinr_monitor", "sinr_ue",
    "solve_p1", "solve_p2",
]

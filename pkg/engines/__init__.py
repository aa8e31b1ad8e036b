"""
高斯矩展开工具 - 验证引擎包

包含全部独立计算引擎与交叉验证协调机制
"""

from .base_engine import BaseEngine
from .verification_coordinator import VerificationCoordinator
from .expansion_engine import ExpansionEngine
from .song_lee_engine import SongLeeEngine
from .stein_reduce_engine import SteinReduceEngine
from .pairing_engine import PairingEngine
from .operator_engine import OperatorEngine
from .monte_carlo_engine import MonteCarloEngine

__all__ = [
    "BaseEngine",
    "VerificationCoordinator",
    "ExpansionEngine",
    "SongLeeEngine",
    "SteinReduceEngine",
    "PairingEngine",
    "OperatorEngine",
    "MonteCarloEngine",
]

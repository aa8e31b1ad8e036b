"""完美匹配引擎（仅零均值）"""

from models import EngineKind, GaussianSpec, MultiIndex, Number
from utils.oracles import pairing_expectation
from utils.polynomial import Polynomial

from .base_engine import BaseEngine


class PairingEngine(BaseEngine):
    """对每个单项式的带重数标签枚举完美匹配"""

    supports_nonzero_mean = False

    def __init__(self):
        super().__init__(engine_name="完美匹配引擎", engine_kind=EngineKind.PAIRING)

    def expectation(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> Number:
        return pairing_expectation(g.multiply_by_monomial(n), spec)

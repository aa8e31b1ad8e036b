"""Stein 递归引擎"""

from models import EngineKind, GaussianSpec, MultiIndex, Number
from utils.oracles import stein_reduce
from utils.polynomial import Polynomial

from .base_engine import BaseEngine


class SteinReduceEngine(BaseEngine):
    """反复应用一阶 Stein 引理"""

    def __init__(self):
        super().__init__(engine_name="Stein 递归引擎", engine_kind=EngineKind.STEIN_REDUCE)

    def expectation(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> Number:
        return stein_reduce(g.multiply_by_monomial(n), spec)

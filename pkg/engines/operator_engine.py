"""平均平移算子引擎"""

from typing import Dict

from models import EngineKind, GaussianSpec, MultiIndex, Number
from utils.operators import operator_expectation, operator_sequence
from utils.polynomial import Polynomial

from .base_engine import BaseEngine


class OperatorEngine(BaseEngine):
    """依次作用 T_ii、T_ij 后在 mu 处求值"""

    def __init__(self):
        super().__init__(engine_name="平均平移算子引擎", engine_kind=EngineKind.OPERATOR)
        self._last_operators = 0

    def expectation(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> Number:
        self._last_operators = len(operator_sequence(spec))
        return operator_expectation(g.multiply_by_monomial(n), spec)

    def details(self) -> Dict[str, str]:
        return {"operators": str(self._last_operators)}

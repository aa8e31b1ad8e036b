"""生成公式引擎 - 符号展开后逐项代入"""

from typing import Dict, Optional

from models import EngineKind, GaussianSpec, MultiIndex, Number
from utils.polynomial import Polynomial, expansion_value
from utils.stein_expansion import stein_expand

from .base_engine import BaseEngine


class ExpansionEngine(BaseEngine):
    """展开 n 后对每一项代入 mu、C 与 E[d^a g]"""

    def __init__(self, term_cap: Optional[int] = None):
        super().__init__(engine_name="生成公式引擎", engine_kind=EngineKind.EXPAND)
        self.term_cap = term_cap
        self._last_terms = 0

    def expectation(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> Number:
        expansion = stein_expand(n, term_cap=self.term_cap)
        self._last_terms = len(expansion)
        return expansion_value(expansion, g, spec)

    def details(self) -> Dict[str, str]:
        return {"terms": str(self._last_terms)}

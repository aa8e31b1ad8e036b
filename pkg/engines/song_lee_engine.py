"""Song-Lee 闭式引擎"""

from models import EngineKind, GaussianSpec, MultiIndex, Number
from utils.polynomial import Polynomial, gaussian_expectation

from .base_engine import BaseEngine


class SongLeeEngine(BaseEngine):
    """把 g x^n 拆成单项式，逐个代入乘积矩闭式"""

    def __init__(self):
        super().__init__(engine_name="Song-Lee 闭式引擎", engine_kind=EngineKind.SONG_LEE)

    def expectation(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> Number:
        return gaussian_expectation(g.multiply_by_monomial(n), spec)

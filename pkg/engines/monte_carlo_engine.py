"""蒙特卡洛引擎"""

from typing import Optional

from models import EngineKind, EngineResult, GaussianSpec, McReport, MultiIndex, create_engine_result
from utils.oracles import mc_estimate
from utils.polynomial import Polynomial

from .base_engine import BaseEngine


class MonteCarloEngine(BaseEngine):
    """按固定种子抽样估计，结果附带标准误"""

    def __init__(
        self,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
        block_size: Optional[int] = None,
    ):
        super().__init__(engine_name="蒙特卡洛引擎", engine_kind=EngineKind.MC)
        self.samples = samples
        self.seed = seed
        self.workers = workers
        self.block_size = block_size

    def report(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> McReport:
        return mc_estimate(
            g, n, spec,
            samples=self.samples,
            seed=self.seed,
            workers=self.workers,
            block_size=self.block_size,
        )

    def expectation(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> float:
        return self.report(g, n, spec).estimate

    def _evaluate(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> EngineResult:
        report = self.report(g, n, spec)
        result = create_engine_result(self.engine_kind, report.estimate, std_error=report.std_error)
        result.details.update({"samples": str(report.samples), "seed": str(report.seed)})
        return result

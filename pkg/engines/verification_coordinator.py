"""验证协调器 - 多引擎交叉验证总指挥"""

from typing import Any, Dict, List, Optional, Sequence

from loguru import logger

from models import (
    EngineKind,
    EngineResult,
    EngineSettings,
    GaussianSpec,
    InvalidInputError,
    MultiIndex,
    VerificationStatus,
    create_engine_result,
    format_number,
    load_settings,
)
from utils.agreement_checker import AgreementChecker
from utils.polynomial import Polynomial, induction_step_check

from .base_engine import BaseEngine
from .expansion_engine import ExpansionEngine
from .monte_carlo_engine import MonteCarloEngine
from .operator_engine import OperatorEngine
from .pairing_engine import PairingEngine
from .song_lee_engine import SongLeeEngine
from .stein_reduce_engine import SteinReduceEngine


class VerificationCoordinator:
    """验证协调器 - 运行选定引擎并比较结果"""

    def __init__(
        self,
        settings: Optional[EngineSettings] = None,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
    ):
        """
        初始化验证协调器

        Args:
            settings: 计算配置，默认 load_settings()
            samples: 蒙特卡洛样本数
            seed: 蒙特卡洛种子
            workers: 蒙特卡洛线程数
        """
        self.settings = settings or load_settings()
        self.agreement_checker = AgreementChecker(self.settings["rel_tol"], self.settings["mc_band"])
        self.engines: Dict[EngineKind, BaseEngine] = {
            EngineKind.EXPAND: ExpansionEngine(term_cap=self.settings["term_cap"]),
            EngineKind.SONG_LEE: SongLeeEngine(),
            EngineKind.STEIN_REDUCE: SteinReduceEngine(),
            EngineKind.PAIRING: PairingEngine(),
            EngineKind.OPERATOR: OperatorEngine(),
            EngineKind.MC: MonteCarloEngine(
                samples=samples if samples is not None else self.settings["mc_samples"],
                seed=seed if seed is not None else self.settings["mc_seed"],
                workers=workers if workers is not None else self.settings["mc_workers"],
                block_size=self.settings["mc_block_size"],
            ),
        }
        logger.debug(f"🎩 验证协调器初始化完成，可用引擎: {[k.value for k in self.engines]}")

    @staticmethod
    def parse_engines(text: str) -> List[EngineKind]:
        """解析逗号分隔的引擎列表，例如 "stein-reduce,operator" """
        kinds = []
        for name in (part.strip() for part in text.split(",")):
            if not name:
                continue
            try:
                kind = EngineKind(name)
            except ValueError as e:
                valid = ", ".join(k.value for k in EngineKind)
                raise InvalidInputError(f"未知引擎 {name!r}，可选: {valid}") from e
            if kind not in kinds:
                kinds.append(kind)
        if len(kinds) < 2:
            raise InvalidInputError("验证至少需要两个不同的引擎")
        return kinds

    def run_verification(
        self,
        g: Polynomial,
        n: MultiIndex,
        spec: GaussianSpec,
        kinds: Sequence[EngineKind],
    ) -> Dict[str, Any]:
        """
        运行完整的交叉验证

        Args:
            g: 多项式
            n: 幂次多重指标
            spec: 高斯参数
            kinds: 参与比较的引擎

        Returns:
            Dict: 一致性报告
        """
        logger.info(f"🚀 启动交叉验证: n=({n})，引擎 {[k.value for k in kinds]}")
        results: List[EngineResult] = [self.engines[kind].evaluate(g, n, spec) for kind in kinds]
        report = self.agreement_checker.get_agreement_report(results)
        report["n"] = list(n.entries)
        return report

    def run_induction(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> Dict[str, Any]:
        """
        对每个 m 比较 展开(n + e_m) 作用于 g 与 展开(n) 作用于 g x_m
        """
        logger.info(f"🚀 启动归纳步检查: n=({n})")
        steps = []
        statuses = []
        for m in range(1, len(n) + 1):
            lhs, rhs = induction_step_check(n, m, g, spec, term_cap=self.settings["term_cap"])
            left = create_engine_result(EngineKind.EXPAND, lhs)
            left.engine = f"n+e{m}"
            right = create_engine_result(EngineKind.EXPAND, rhs)
            right.engine = f"n*x{m}"
            agree = self.agreement_checker.agree(left, right)
            statuses.append(agree)
            steps.append({"m": m, "lhs": format_number(lhs), "rhs": format_number(rhs), "agree": agree})
        status = VerificationStatus.AGREE if all(statuses) else VerificationStatus.MISMATCH
        return {"status": status.value, "n": list(n.entries), "steps": steps}

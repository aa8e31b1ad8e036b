"""基础引擎抽象类"""

from abc import ABC, abstractmethod
from typing import Any, Callable, Dict

from loguru import logger

from models import (
    EngineKind,
    EngineResult,
    GaussianSpec,
    MultiIndex,
    NonzeroMeanError,
    Number,
    TermCapExceededError,
    create_engine_result,
)
from utils.polynomial import Polynomial


class BaseEngine(ABC):
    """验证引擎基类：计算 E[g(X) prod X_i^{n_i}]"""

    supports_nonzero_mean: bool = True

    def __init__(self, engine_name: str, engine_kind: EngineKind):
        """
        初始化基础引擎

        Args:
            engine_name: 引擎名称
            engine_kind: 引擎类型
        """
        self.engine_name = engine_name
        self.engine_kind = engine_kind
        logger.debug(f"🔧 {self.engine_name} 已初始化")

    @abstractmethod
    def expectation(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> Number:
        """计算期望值"""

    def evaluate(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> EngineResult:
        """计算并包装为 EngineResult，失败时 error 字段记录原因"""
        return self._safe_execute(self._evaluate, g, n, spec)

    def _evaluate(self, g: Polynomial, n: MultiIndex, spec: GaussianSpec) -> EngineResult:
        if not self.supports_nonzero_mean and not spec.is_zero_mean():
            raise NonzeroMeanError(f"{self.engine_name} 只支持零均值")
        logger.info(f"🔄 {self.engine_name} 正在计算...")
        value = self.expectation(g, n, spec)
        result = create_engine_result(self.engine_kind, value)
        result.details.update(self.details())
        logger.info(f"✅ {self.engine_name} 计算完成")
        return result

    def details(self) -> Dict[str, str]:
        """附加到结果中的说明"""
        return {}

    def _safe_execute(self, func: Callable[..., EngineResult], *args: Any, **kwargs: Any) -> EngineResult:
        """安全执行函数；项数超限属于拒绝输入，继续向上抛出"""
        try:
            return func(*args, **kwargs)
        except TermCapExceededError:
            raise
        except Exception as e:
            logger.error(f"❌ {self.engine_name} 执行失败: {e}")
            return EngineResult(
                engine=self.engine_kind.value,
                error=str(e),
                details={"error_type": type(e).__name__},
            )

"""一致性检查器 - 判断多个引擎的结果是否一致"""

import math
from itertools import combinations
from typing import Any, Dict, List, Optional

from loguru import logger

from models import DEFAULT_SETTINGS, EngineResult, VerificationStatus, format_number


class AgreementChecker:
    """一致性检查器"""

    def __init__(self, rel_tol: Optional[float] = None, mc_band: Optional[float] = None):
        """
        初始化一致性检查器

        Args:
            rel_tol: 浮点结果的相对误差
            mc_band: 蒙特卡洛结果的接受带（标准误倍数）
        """
        self.rel_tol = DEFAULT_SETTINGS["rel_tol"] if rel_tol is None else rel_tol
        self.mc_band = DEFAULT_SETTINGS["mc_band"] if mc_band is None else mc_band
        logger.debug(f"📊 一致性检查器已初始化，相对误差 {self.rel_tol}，接受带 {self.mc_band} 倍标准误")

    def tolerance(self, a: EngineResult, b: EngineResult) -> float:
        """
        允许的差值：精确对精确为 0；否则为 rel_tol * max(|a|, |b|, 1)，
        含蒙特卡洛结果时再加 mc_band 倍合成标准误
        """
        if a.exact and b.exact:
            return 0.0
        scale = max(abs(float(a.value)), abs(float(b.value)), 1.0)
        tol = self.rel_tol * scale
        se = math.hypot(a.std_error or 0.0, b.std_error or 0.0)
        if se > 0:
            tol += self.mc_band * se
        return tol

    def agree(self, a: EngineResult, b: EngineResult) -> bool:
        """
        检查两个引擎结果是否一致

        Args:
            a, b: 成功的引擎结果

        Returns:
            bool: 是否一致
        """
        if a.exact and b.exact:
            return a.value == b.value
        return abs(float(a.value) - float(b.value)) <= self.tolerance(a, b)

    def _compare_pairs(self, results: List[EngineResult]) -> List[Dict[str, Any]]:
        pairs = []
        for a, b in combinations([r for r in results if r.ok], 2):
            difference = abs(float(a.value) - float(b.value))
            pairs.append({
                "engines": [a.engine, b.engine],
                "agree": self.agree(a, b),
                "difference": difference,
                "tolerance": self.tolerance(a, b),
            })
        return pairs

    def status(self, results: List[EngineResult]) -> VerificationStatus:
        if any(not r.ok for r in results):
            return VerificationStatus.ERROR
        if all(pair["agree"] for pair in self._compare_pairs(results)):
            return VerificationStatus.AGREE
        return VerificationStatus.MISMATCH

    def get_agreement_report(self, results: List[EngineResult]) -> Dict[str, Any]:
        """生成一致性报告"""
        logger.info(f"📊 正在比较 {len(results)} 个引擎的结果...")

        pairs = self._compare_pairs(results)
        status = self.status(results)

        report = {
            "status": status.value,
            "results": [
                {
                    "engine": r.engine,
                    "value": None if r.value is None else format_number(r.value),
                    "std_error": r.std_error,
                    "exact": r.exact,
                    "error": r.error,
                    **({"details": r.details} if r.details else {}),
                }
                for r in results
            ],
            "pairs": pairs,
            "diagnostics": [],
        }

        for r in results:
            if not r.ok:
                report["diagnostics"].append(f"引擎 {r.engine} 执行失败: {r.error}")
        for pair in pairs:
            if not pair["agree"]:
                a, b = pair["engines"]
                report["diagnostics"].append(
                    f"{a} 与 {b} 不一致: 差值 {pair['difference']:.6g} 超过容差 {pair['tolerance']:.6g}"
                )

        if status is VerificationStatus.AGREE:
            logger.info("✅ 各引擎结果一致")
        else:
            logger.warning(f"❌ 验证未通过: {status.value}")
        return report

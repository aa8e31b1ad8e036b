"""
独立验证计算

与生成公式不共享代码的三条路线：
- 逐次应用 Stein 引理的递归化简
- 完美匹配枚举（仅零均值）
- 计数器型随机数的蒙特卡洛估计
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.special import ndtri

from models import (
    DimensionMismatchError,
    GaussianSpec,
    InvalidInputError,
    McReport,
    MultiIndex,
    NonzeroMeanError,
    NotPositiveSemidefiniteError,
    Number,
    load_settings,
)
from utils.matchings import pair_partitions
from utils.polynomial import Polynomial

PSD_TOLERANCE = 1e-12

# ==================== Stein 递归 ====================

class SteinReducer:
    """
    按 E[x_m q] = mu_m E[q] + sum_j C_mj E[d_j q] 递归计算单项式期望，
    m 取指数为正的最小分量，结果按指数缓存
    """

    def __init__(self, spec: GaussianSpec):
        self.spec = spec
        self._memo: Dict[Tuple[int, ...], Number] = {}

    def monomial(self, exponent: Sequence[int]) -> Number:
        exponent = tuple(exponent)
        if len(exponent) != self.spec.n_dim:
            raise DimensionMismatchError(f"指数 {exponent} 与高斯维度 {self.spec.n_dim} 不一致")
        return self._reduce(exponent)

    def _reduce(self, e: Tuple[int, ...]) -> Number:
        if e in self._memo:
            return self._memo[e]
        positive = [idx for idx, v in enumerate(e) if v > 0]
        if not positive:
            return 1
        m = positive[0]
        q = list(e)
        q[m] -= 1
        value: Number = 0
        mean_m = self.spec.mean[m]
        if mean_m != 0:
            value += mean_m * self._reduce(tuple(q))
        for j, q_j in enumerate(q):
            c = self.spec.cov[m][j]
            if q_j == 0 or c == 0:
                continue
            d = list(q)
            d[j] -= 1
            value += c * q_j * self._reduce(tuple(d))
        self._memo[e] = value
        return value

    def expectation(self, p: Polynomial) -> Number:
        if p.n_dim != self.spec.n_dim:
            raise DimensionMismatchError(f"多项式维度 {p.n_dim} 与高斯维度 {self.spec.n_dim} 不一致")
        return sum((c * self.monomial(exp.entries) for exp, c in p.terms()), 0)


def stein_reduce(p: Polynomial, spec: GaussianSpec) -> Number:
    """E[p(X)]，只用一阶 Stein 引理与线性性"""
    return SteinReducer(spec).expectation(p)

# ==================== 完美匹配 ====================

def monomial_labels(n: MultiIndex) -> List[int]:
    """x^n 对应的带重数标签序列，例如 (2,1) -> [1, 1, 2]"""
    return [i for i, n_i in enumerate(n, start=1) for _ in range(n_i)]


def pairing_moment(labels: Sequence[int], spec: GaussianSpec) -> Number:
    """
    零均值时 E[prod X_label] = sum over 完美匹配 prod C_ij

    Args:
        labels: 分量编号（从 1 开始，可重复）
        spec: 高斯参数，均值必须为零

    Returns:
        奇数长度为 0
    """
    if not spec.is_zero_mean():
        raise NonzeroMeanError("配对公式只适用于零均值")
    for label in labels:
        if not 1 <= label <= spec.n_dim:
            raise InvalidInputError(f"标签 {label} 超出 1..{spec.n_dim}")
    total: Number = 0
    for pairing in pair_partitions(list(labels)):
        total += math.prod((spec.covariance(i, j) for i, j in pairing), start=1)
    return total


def pairing_expectation(p: Polynomial, spec: GaussianSpec) -> Number:
    """逐单项式应用 pairing_moment"""
    if p.n_dim != spec.n_dim:
        raise DimensionMismatchError(f"多项式维度 {p.n_dim} 与高斯维度 {spec.n_dim} 不一致")
    return sum((c * pairing_moment(monomial_labels(exp), spec) for exp, c in p.terms()), 0)

# ==================== Cholesky ====================

def cholesky(spec: GaussianSpec) -> np.ndarray:
    """
    下三角 L，使 L L^T = C

    正定时直接用 numpy；半正定（奇异）时逐列分解，主元落在 [-1e-12, 1e-12] 内视为零列

    Raises:
        NotPositiveSemidefiniteError: 主元小于 -1e-12
    """
    cov = np.array([[float(c) for c in row] for row in spec.cov], dtype=np.float64)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        logger.debug("🔍 协方差矩阵非正定，尝试半正定分解")

    n_dim = cov.shape[0]
    factor = np.zeros_like(cov)
    for j in range(n_dim):
        pivot = cov[j, j] - np.dot(factor[j, :j], factor[j, :j])
        if pivot < -PSD_TOLERANCE:
            raise NotPositiveSemidefiniteError(f"协方差矩阵非半正定：第 {j + 1} 个主元为 {pivot:.3e}")
        if pivot <= PSD_TOLERANCE:
            continue
        factor[j, j] = math.sqrt(pivot)
        for i in range(j + 1, n_dim):
            factor[i, j] = (cov[i, j] - np.dot(factor[i, :j], factor[j, :j])) / factor[j, j]
    if not np.allclose(factor @ factor.T, cov, atol=1e-9, rtol=0.0):
        raise NotPositiveSemidefiniteError("协方差矩阵非半正定：分解无法重构原矩阵")
    return factor

# ==================== 蒙特卡洛 ====================

_UINT53_SCALE = 2.0 ** -53


def _block_uniforms(seed: int, block: int, count: int) -> np.ndarray:
    # 每个块一条独立的 Philox 流，块号作为 spawn_key
    bit_generator = np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,)))
    raw = bit_generator.random_raw(count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _UINT53_SCALE


def _block_moments(
    integrand: Polynomial,
    mean: np.ndarray,
    factor: np.ndarray,
    seed: int,
    block: int,
    size: int,
) -> Tuple[int, float, float]:
    n_dim = mean.shape[0]
    z = ndtri(_block_uniforms(seed, block, size * n_dim)).reshape(size, n_dim)
    x = mean + z @ factor.T
    values = integrand.evaluate_batch(x)
    block_mean = float(np.mean(values))
    m2 = float(np.sum((values - block_mean) ** 2))
    return size, block_mean, m2


def _merge(a: Tuple[int, float, float], b: Tuple[int, float, float]) -> Tuple[int, float, float]:
    """两组 (count, mean, M2) 的合并"""
    n_a, mean_a, m2_a = a
    n_b, mean_b, m2_b = b
    n = n_a + n_b
    delta = mean_b - mean_a
    return n, mean_a + delta * n_b / n, m2_a + m2_b + delta * delta * n_a * n_b / n


def mc_estimate(
    p: Polynomial,
    n: MultiIndex,
    spec: GaussianSpec,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    block_size: Optional[int] = None,
) -> McReport:
    """
    蒙特卡洛估计 E[p(X) prod X_i^{n_i}]

    X = mu + L Z，Z 由 Philox 计数器流经逆正态分布函数得到。样本按固定大小分块，
    每块的流由 (seed, 块号) 决定，块结果按块号顺序合并，因此结果与线程数无关、可逐位复现

    Args:
        p: 多项式 g
        n: 幂次多重指标
        spec: 高斯参数（协方差需半正定）
        samples: 样本数，默认取配置
        seed: 64 位无符号种子，默认取配置
        workers: 线程数，默认取配置（GM_MC_WORKERS）
        block_size: 每块样本数，默认取配置

    Returns:
        McReport
    """
    settings = load_settings()
    samples = settings["mc_samples"] if samples is None else samples
    seed = settings["mc_seed"] if seed is None else seed
    workers = settings["mc_workers"] if workers is None else workers
    block_size = settings["mc_block_size"] if block_size is None else block_size

    if samples < 2:
        raise InvalidInputError(f"样本数至少为 2: {samples}")
    if not 0 <= seed < 2 ** 64:
        raise InvalidInputError(f"种子必须是 64 位无符号整数: {seed}")
    if workers < 1 or block_size < 1:
        raise InvalidInputError("线程数与块大小必须为正")
    if p.n_dim != spec.n_dim or len(n) != spec.n_dim:
        raise DimensionMismatchError(f"维度不一致: 多项式 {p.n_dim}，n {len(n)}，高斯 {spec.n_dim}")

    factor = cholesky(spec)
    mean = np.array([float(m) for m in spec.mean], dtype=np.float64)
    integrand = p.multiply_by_monomial(n)
    sizes = [min(block_size, samples - start) for start in range(0, samples, block_size)]

    logger.info(f"🔍 蒙特卡洛: {samples} 个样本，{len(sizes)} 块，{workers} 个线程，种子 {seed}")

    def run_block(block: int) -> Tuple[int, float, float]:
        return _block_moments(integrand, mean, factor, seed, block, sizes[block])

    if workers == 1:
        partials = [run_block(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run_block, range(len(sizes))))

    merged = partials[0]
    for part in partials[1:]:
        merged = _merge(merged, part)
    count, estimate, m2 = merged
    std_error = math.sqrt(m2 / (count - 1)) / math.sqrt(count)

    logger.info(f"✅ 蒙特卡洛估计 {estimate:.6g} ± {std_error:.3g}")
    return McReport(estimate=estimate, std_error=std_error, samples=count, seed=seed)

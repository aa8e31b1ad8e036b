"""
高斯矩展开工具 - 核心数据模型

定义系统中所有关键数据结构，包括多重指标、符号项、展开式、高斯分布参数、
配置参数与异常类型
"""

import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, TypedDict, Union

from dotenv import load_dotenv
from pydantic import BaseModel, field_validator

Number = Union[int, Fraction, float]

# ==================== 异常类型定义 ====================

class GaussMomentError(Exception):
    """所有领域错误的基类"""


class DimensionMismatchError(GaussMomentError, ValueError):
    """维度不一致"""


class InvalidInputError(GaussMomentError, ValueError):
    """输入格式或取值非法"""


class TermCapExceededError(GaussMomentError):
    """原始项数超过上限"""


class NotPositiveSemidefiniteError(GaussMomentError):
    """协方差矩阵非半正定"""


class NonzeroMeanError(GaussMomentError, ValueError):
    """要求零均值的计算收到了非零均值"""

# ==================== 枚举类型定义 ====================

class CoeffFamily(Enum):
    """组合系数族"""
    HERMITE = "hermite"                      # H_{l,k}
    GLUE = "glue"                            # G_{l1,l2,k}
    MULTINOMIAL = "multinomial"              # n!/prod(parts!)
    FALLING_FACTORIAL = "falling_factorial"  # m(m-1)...(m-l+1)


class EngineKind(Enum):
    """验证引擎类型"""
    EXPAND = "expand"
    SONG_LEE = "song-lee"
    STEIN_REDUCE = "stein-reduce"
    PAIRING = "pairing"
    OPERATOR = "operator"
    MC = "mc"


class OperatorKind(Enum):
    """平均平移算子类型"""
    DIAGONAL = "diagonal"
    CROSS = "cross"


class OutputFormat(str, Enum):
    """输出格式"""
    JSON = "json"
    TEXT = "text"


class VerificationStatus(Enum):
    """验证状态"""
    AGREE = "agree"
    MISMATCH = "mismatch"
    ERROR = "error"

_COEFF_ARITY = {
    CoeffFamily.HERMITE: 2,
    CoeffFamily.GLUE: 3,
    CoeffFamily.FALLING_FACTORIAL: 2,
}


@dataclass(frozen=True)
class CoeffKey:
    """
    组合系数键：HERMITE(l, k)、GLUE(l1, l2, k)、MULTINOMIAL(n, part_1, ..., part_p)、
    FALLING_FACTORIAL(m, l)，参数均非负
    """
    family: CoeffFamily
    arguments: Tuple[int, ...]

    def __post_init__(self):
        arguments = tuple(self.arguments)
        if any(isinstance(a, bool) or not isinstance(a, int) or a < 0 for a in arguments):
            raise InvalidInputError(f"{self.family.value} 的参数必须是非负整数: {arguments}")
        if self.family is CoeffFamily.MULTINOMIAL:
            if not arguments:
                raise InvalidInputError("multinomial 至少需要参数 n")
        elif len(arguments) != _COEFF_ARITY[self.family]:
            raise InvalidInputError(
                f"{self.family.value} 需要 {_COEFF_ARITY[self.family]} 个参数，收到 {len(arguments)} 个"
            )
        object.__setattr__(self, "arguments", arguments)

# ==================== 数值工具 ====================

def is_exact(value: Number) -> bool:
    """判断数值是否为精确有理数"""
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def to_exact(value: Union[Number, str]) -> Number:
    """整数与字符串转为 Fraction，浮点数保持不变"""
    if isinstance(value, bool):
        raise InvalidInputError(f"数值不能是布尔值: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return value
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidInputError(f"无法解析数值: {value!r}") from e


def format_number(value: Number) -> str:
    """精确值输出为 p/q（整数输出为整数），浮点数输出 repr"""
    if is_exact(value):
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))

# ==================== 多重指标 ====================

@dataclass(frozen=True)
class MultiIndex:
    """非负整数序列，承载 n、a、r、l、k 等向量"""
    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        for e in entries:
            if isinstance(e, bool) or not isinstance(e, int) or e < 0:
                raise InvalidInputError(f"多重指标分量必须是非负整数: {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zeros(cls, n_dim: int) -> "MultiIndex":
        return cls((0,) * n_dim)

    @classmethod
    def unit(cls, m: int, n_dim: int) -> "MultiIndex":
        """第 m 个（从 1 开始）单位多重指标 e_m"""
        if not 1 <= m <= n_dim:
            raise InvalidInputError(f"分量编号 {m} 超出 1..{n_dim}")
        return cls(tuple(1 if i == m - 1 else 0 for i in range(n_dim)))

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        """
        解析逗号分隔的多重指标

        Args:
            text: 例如 "1,2"

        Returns:
            MultiIndex
        """
        parts = [p.strip() for p in str(text).split(",")]
        if not parts or any(not (p.isascii() and p.isdigit()) for p in parts):
            raise InvalidInputError(f"多重指标格式错误: {text!r}，应为逗号分隔的非负整数")
        return cls(tuple(int(p) for p in parts))

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def total(self) -> int:
        """|n| = 各分量之和"""
        return sum(self.entries)

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, idx: int) -> int:
        return self.entries[idx]

    def _check_dim(self, other: "MultiIndex") -> None:
        if len(self) != len(other):
            raise DimensionMismatchError(f"多重指标维度不一致: {len(self)} != {len(other)}")

    def __le__(self, other: "MultiIndex") -> bool:
        """偏序：逐分量小于等于"""
        self._check_dim(other)
        return all(a <= b for a, b in zip(self.entries, other.entries))

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        self._check_dim(other)
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        self._check_dim(other)
        return MultiIndex(tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __str__(self) -> str:
        return ",".join(str(e) for e in self.entries)

# ==================== 符号项与展开式 ====================

CovPow = Tuple[Tuple[int, int, int], ...]


def pair_order(n_dim: int) -> List[Tuple[int, int]]:
    """按行优先列出所有 (i, j), 1 <= i < j <= N"""
    return list(combinations(range(1, n_dim + 1), 2))


@dataclass(frozen=True)
class SymbolicTerm:
    """
    展开式中的一项:
    coeff * prod(mu_i^r_i) * prod(sigma_i^(2 v_i)) * prod(C_ij^e_ij) * E[prod(d_i^a_i) g]

    cov_pow 以 (i, j, e) 三元组保存，i < j（从 1 开始），e > 0，按 (i, j) 排序
    """
    coeff: int
    mu_pow: MultiIndex
    var_pow: MultiIndex
    cov_pow: CovPow
    deriv: MultiIndex

    def __post_init__(self):
        n_dim = len(self.mu_pow)
        if len(self.var_pow) != n_dim or len(self.deriv) != n_dim:
            raise DimensionMismatchError("符号项各指数向量维度不一致")
        cov = tuple(tuple(entry) for entry in self.cov_pow)
        for i, j, e in cov:
            if not (1 <= i < j <= n_dim) or e <= 0:
                raise InvalidInputError(f"协方差指数非法: ({i}, {j}, {e})")
        if len({(i, j) for i, j, _ in cov}) != len(cov):
            raise InvalidInputError("协方差指数存在重复的 (i, j)")
        object.__setattr__(self, "cov_pow", tuple(sorted(cov)))

    @classmethod
    def create(
        cls,
        coeff: int,
        mu_pow: Sequence[int],
        var_pow: Sequence[int],
        cov_pow: Optional[Mapping[Tuple[int, int], int]],
        deriv: Sequence[int],
    ) -> "SymbolicTerm":
        """
        由映射形式的协方差指数创建符号项，自动把 (j, i) 归一为 (i, j) 并丢弃零指数
        """
        merged: Dict[Tuple[int, int], int] = {}
        for (i, j), e in (cov_pow or {}).items():
            if i == j:
                raise InvalidInputError(f"协方差键必须满足 i != j: ({i}, {j})")
            key = (min(i, j), max(i, j))
            merged[key] = merged.get(key, 0) + e
        return cls(
            coeff=coeff,
            mu_pow=MultiIndex(tuple(mu_pow)),
            var_pow=MultiIndex(tuple(var_pow)),
            cov_pow=tuple((i, j, e) for (i, j), e in sorted(merged.items()) if e != 0),
            deriv=MultiIndex(tuple(deriv)),
        )

    @property
    def dimension(self) -> int:
        return len(self.mu_pow)

    @property
    def signature(self) -> Tuple[MultiIndex, MultiIndex, CovPow, MultiIndex]:
        return (self.mu_pow, self.var_pow, self.cov_pow, self.deriv)

    def cov_exponent(self, i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        for a, b, e in self.cov_pow:
            if (a, b) == key:
                return e
        return 0

    def cov_flat(self) -> Tuple[int, ...]:
        """按行优先展开的全部协方差指数（含零）"""
        lookup = {(i, j): e for i, j, e in self.cov_pow}
        return tuple(lookup.get(pair, 0) for pair in pair_order(self.dimension))

    def sort_key(self) -> Tuple[Tuple[int, ...], ...]:
        return (self.deriv.entries, self.mu_pow.entries, self.var_pow.entries, self.cov_flat())

    def with_coeff(self, coeff: int) -> "SymbolicTerm":
        return SymbolicTerm(coeff, self.mu_pow, self.var_pow, self.cov_pow, self.deriv)


@dataclass(frozen=True)
class Expansion:
    """规范化后的符号项集合，对应生成公式右端"""
    n_dim: int
    terms: Tuple[SymbolicTerm, ...] = ()

    def __post_init__(self):
        if self.n_dim < 1:
            raise InvalidInputError(f"维度必须为正整数: {self.n_dim}")
        terms = tuple(self.terms)
        for t in terms:
            if t.dimension != self.n_dim:
                raise DimensionMismatchError(f"符号项维度 {t.dimension} 与展开式维度 {self.n_dim} 不一致")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[SymbolicTerm]:
        return iter(self.terms)

    def filter(self, predicate) -> "Expansion":
        """保留满足条件的项（保持规范顺序）"""
        return Expansion(self.n_dim, tuple(t for t in self.terms if predicate(t)))

    def zero_mean_part(self) -> "Expansion":
        return self.filter(lambda t: t.mu_pow.is_zero())

    def deriv_zero_part(self) -> "Expansion":
        return self.filter(lambda t: t.deriv.is_zero())

# ==================== 高斯分布参数 ====================

def _symmetric_enough(a: Number, b: Number) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= 1e-12 * max(1.0, abs(float(a)), abs(float(b)))


@dataclass(frozen=True)
class GaussianSpec:
    """N 维高斯随机向量：均值向量 mu 与对称协方差矩阵 C，sigma_i^2 := C_ii"""
    mean: Tuple[Number, ...]
    cov: Tuple[Tuple[Number, ...], ...]

    def __post_init__(self):
        mean = tuple(to_exact(m) for m in self.mean)
        cov = tuple(tuple(to_exact(c) for c in row) for row in self.cov)
        n_dim = len(mean)
        if n_dim < 1:
            raise InvalidInputError("高斯向量维度必须为正")
        if len(cov) != n_dim or any(len(row) != n_dim for row in cov):
            raise DimensionMismatchError(f"协方差矩阵必须是 {n_dim}x{n_dim}")
        for i in range(n_dim):
            for j in range(i + 1, n_dim):
                if not _symmetric_enough(cov[i][j], cov[j][i]):
                    raise InvalidInputError(f"协方差矩阵不对称: C[{i + 1}][{j + 1}] != C[{j + 1}][{i + 1}]")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def standard(cls, n_dim: int) -> "GaussianSpec":
        """零均值、单位协方差"""
        return cls(
            mean=(0,) * n_dim,
            cov=tuple(tuple(1 if i == j else 0 for j in range(n_dim)) for i in range(n_dim)),
        )

    @property
    def n_dim(self) -> int:
        return len(self.mean)

    @property
    def is_exact(self) -> bool:
        return all(is_exact(m) for m in self.mean) and all(is_exact(c) for row in self.cov for c in row)

    def variance(self, i: int) -> Number:
        """sigma_i^2（i 从 1 开始）"""
        return self.cov[i - 1][i - 1]

    def covariance(self, i: int, j: int) -> Number:
        return self.cov[i - 1][j - 1]

    def is_zero_mean(self) -> bool:
        return all(m == 0 for m in self.mean)


class SpecFile(BaseModel):
    """高斯参数 JSON 文件: {"mean": [...], "cov": [[...]]}，数值可为整数、浮点或 "p/q" 字符串"""
    mean: List[Union[int, float, str]]
    cov: List[List[Union[int, float, str]]]

    @field_validator("mean")
    @classmethod
    def _non_empty(cls, v):
        if not v:
            raise ValueError("mean 不能为空")
        return v

    def to_gaussian_spec(self) -> GaussianSpec:
        return GaussianSpec(mean=tuple(self.mean), cov=tuple(tuple(row) for row in self.cov))

# ==================== 分配方案与报告 ====================

Matrix = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class PartitionAssignment:
    """生成公式求和中的一组 (r, L, K)"""
    r: MultiIndex
    L: Matrix
    K: Matrix

    def __post_init__(self):
        n_dim = len(self.r)
        if len(self.L) != n_dim or len(self.K) != n_dim:
            raise DimensionMismatchError("L、K 必须是 NxN 矩阵")
        for i in range(n_dim):
            if self.L[i][i] < 0 or not 0 <= self.K[i][i] <= self.L[i][i] // 2:
                raise InvalidInputError(f"k_{i + 1}{i + 1} 超出范围")
            for j in range(i + 1, n_dim):
                if self.K[i][j] != self.K[j][i]:
                    raise InvalidInputError("K 必须对称")
                if not 0 <= self.K[i][j] <= min(self.L[i][j], self.L[j][i]):
                    raise InvalidInputError(f"k_{i + 1}{j + 1} 超出范围")


@dataclass(frozen=True)
class OperatorSpec:
    """平均平移算子 T_ii（DIAGONAL, coefficient = sigma_i^2）或 T_ij（CROSS, coefficient = C_ij）"""
    kind: OperatorKind
    i: int
    j: int
    coefficient: Number

    def __post_init__(self):
        if self.kind is OperatorKind.DIAGONAL and self.i != self.j:
            raise InvalidInputError("对角算子要求 i == j")
        if self.kind is OperatorKind.CROSS and self.i == self.j:
            raise InvalidInputError("交叉算子要求 i != j")
        if self.i < 1 or self.j < 1:
            raise InvalidInputError("算子分量编号从 1 开始")


@dataclass(frozen=True)
class McReport:
    """蒙特卡洛估计结果"""
    estimate: float
    std_error: float
    samples: int
    seed: int

    def __post_init__(self):
        if self.std_error < 0:
            raise InvalidInputError("std_error 不能为负")
        if self.samples < 2:
            raise InvalidInputError("样本数至少为 2")


@dataclass
class EngineResult:
    """单个引擎的计算结果"""
    engine: str
    value: Optional[Number] = None
    std_error: Optional[float] = None
    exact: bool = False
    error: Optional[str] = None
    details: Dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.error is None

# ==================== 配置参数 ====================

class EngineSettings(TypedDict):
    """计算与验证配置"""
    term_cap: int          # 原始项数上限
    rel_tol: float         # 浮点比较的相对误差
    mc_band: float         # 蒙特卡洛接受带（标准误倍数）
    mc_samples: int        # 默认样本数
    mc_seed: int           # 默认种子
    mc_block_size: int     # 每个计数器块的样本数
    mc_workers: int        # 并行线程数


DEFAULT_SETTINGS: EngineSettings = {
    "term_cap": 10_000_000,
    "rel_tol": 1e-9,
    "mc_band": 5.0,
    "mc_samples": 1_000_000,
    "mc_seed": 20240601,
    "mc_block_size": 65_536,
    "mc_workers": 1,
}


def _positive_int_env(name: str) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        value = int(raw.strip())
    except ValueError as e:
        raise InvalidInputError(f"环境变量 {name} 必须是正整数: {raw!r}") from e
    if value <= 0:
        raise InvalidInputError(f"环境变量 {name} 必须是正整数: {raw!r}")
    return value


def load_settings() -> EngineSettings:
    """读取 .env 与环境变量（GM_TERM_CAP、GM_MC_WORKERS）覆盖默认配置"""
    load_dotenv()
    settings: EngineSettings = dict(DEFAULT_SETTINGS)  # type: ignore[assignment]
    term_cap = _positive_int_env("GM_TERM_CAP")
    if term_cap is not None:
        settings["term_cap"] = term_cap
    workers = _positive_int_env("GM_MC_WORKERS")
    if workers is not None:
        settings["mc_workers"] = workers
    return settings

# ==================== 工具函数 ====================

def create_engine_result(engine: EngineKind, value: Number, std_error: Optional[float] = None) -> EngineResult:
    """创建引擎结果"""
    return EngineResult(
        engine=engine.value,
        value=value,
        std_error=std_error,
        exact=is_exact(value),
    )

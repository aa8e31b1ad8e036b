"""
稀疏多元多项式

以指数向量到系数的映射表示 g，系数默认为精确有理数（Fraction）；
提供求导、求值、乘单项式以及高斯期望，是符号恒等式到数值校验的桥梁
"""

from math import prod
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError, conint

from models import (
    DimensionMismatchError,
    Expansion,
    GaussianSpec,
    InvalidInputError,
    MultiIndex,
    Number,
    format_number,
    is_exact,
    to_exact,
)
from utils.stein_expansion import song_lee_moment, stein_expand
from utils.symbolic_core import evaluate_term_prefactor

Exponent = Tuple[int, ...]


class Polynomial:
    """N 元稀疏多项式，不保存零系数"""

    __slots__ = ("n_dim", "_terms")

    def __init__(self, n_dim: int, monomials: Mapping[Union[Exponent, MultiIndex], Number] = None):
        if n_dim < 1:
            raise InvalidInputError(f"多项式维度必须为正: {n_dim}")
        self.n_dim = n_dim
        terms: Dict[Exponent, Number] = {}
        for exp, coeff in (monomials or {}).items():
            exp = tuple(exp)
            if len(exp) != n_dim:
                raise DimensionMismatchError(f"指数 {exp} 与维度 {n_dim} 不一致")
            if any(isinstance(e, bool) or not isinstance(e, int) or e < 0 for e in exp):
                raise InvalidInputError(f"指数必须是非负整数: {exp}")
            coeff = to_exact(coeff)
            if coeff != 0:
                terms[exp] = terms.get(exp, 0) + coeff
                if terms[exp] == 0:
                    del terms[exp]
        self._terms = terms

    # ---------- 构造 ----------

    @classmethod
    def constant(cls, n_dim: int, value: Number = 1) -> "Polynomial":
        return cls(n_dim, {(0,) * n_dim: value})

    @classmethod
    def variable(cls, i: int, n_dim: int) -> "Polynomial":
        """x_i（i 从 1 开始）"""
        return cls(n_dim, {MultiIndex.unit(i, n_dim).entries: 1})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff: Number = 1) -> "Polynomial":
        exponent = tuple(exponent)
        return cls(len(exponent), {exponent: coeff})

    @classmethod
    def _raw(cls, n_dim: int, terms: Dict[Exponent, Number]) -> "Polynomial":
        poly = cls.__new__(cls)
        poly.n_dim = n_dim
        poly._terms = {e: c for e, c in terms.items() if c != 0}
        return poly

    # ---------- 基本性质 ----------

    def terms(self) -> Iterator[Tuple[MultiIndex, Number]]:
        """按指数字典序输出 (MultiIndex, 系数)"""
        for exp in sorted(self._terms):
            yield MultiIndex(exp), self._terms[exp]

    def coefficient(self, exponent: Sequence[int]) -> Number:
        return self._terms.get(tuple(exponent), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self._terms.values())

    @property
    def degree(self) -> int:
        """总次数，零多项式为 -1"""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, i: int) -> int:
        """关于 x_i 的次数（i 从 1 开始）"""
        return max((e[i - 1] for e in self._terms), default=-1)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n_dim == other.n_dim and self._terms == other._terms

    def __repr__(self) -> str:
        if not self._terms:
            return f"Polynomial({self.n_dim}, 0)"
        body = " + ".join(
            f"{format_number(c)}*x^({','.join(map(str, e))})" for e, c in sorted(self._terms.items())
        )
        return f"Polynomial({self.n_dim}, {body})"

    # ---------- 算术 ----------

    def _check(self, other: "Polynomial") -> None:
        if self.n_dim != other.n_dim:
            raise DimensionMismatchError(f"多项式维度不一致: {self.n_dim} != {other.n_dim}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, 0) + c
        return Polynomial._raw(self.n_dim, terms)

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.n_dim, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        terms: Dict[Exponent, Number] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Polynomial._raw(self.n_dim, terms)

    __rmul__ = __mul__

    def scale(self, factor: Number) -> "Polynomial":
        return Polynomial._raw(self.n_dim, {e: c * factor for e, c in self._terms.items()})

    # ---------- 求导、平移、求值 ----------

    def partial_derivative(self, a: Union[MultiIndex, Sequence[int]]) -> "Polynomial":
        """
        精确计算 d^a p

        Args:
            a: 各分量求导阶数

        Returns:
            Polynomial: 次数降低 |a| 或为零多项式
        """
        a = tuple(a)
        if len(a) != self.n_dim:
            raise DimensionMismatchError(f"求导指标 {a} 与维度 {self.n_dim} 不一致")
        terms: Dict[Exponent, Number] = {}
        for exp, coeff in self._terms.items():
            if any(e < k for e, k in zip(exp, a)):
                continue
            factor = prod(_falling(e, k) for e, k in zip(exp, a))
            new_exp = tuple(e - k for e, k in zip(exp, a))
            terms[new_exp] = terms.get(new_exp, 0) + coeff * factor
        return Polynomial._raw(self.n_dim, terms)

    def multiply_by_monomial(self, n: Union[MultiIndex, Sequence[int]]) -> "Polynomial":
        """p * x^n（指数平移）"""
        n = tuple(n)
        if len(n) != self.n_dim:
            raise DimensionMismatchError(f"单项式指数 {n} 与维度 {self.n_dim} 不一致")
        return Polynomial._raw(
            self.n_dim,
            {tuple(e + k for e, k in zip(exp, n)): c for exp, c in self._terms.items()},
        )

    def evaluate(self, x: Sequence[Number], exact: bool = False) -> Number:
        """
        在点 x 处求值

        Args:
            x: 长度为 N 的向量
            exact: True 时保持有理运算，否则按双精度求和

        Returns:
            数值
        """
        if len(x) != self.n_dim:
            raise DimensionMismatchError(f"求值点维度 {len(x)} 与多项式维度 {self.n_dim} 不一致")
        if exact:
            return sum((c * prod(xi ** e for xi, e in zip(x, exp)) for exp, c in self._terms.items()), 0)
        xf = [float(v) for v in x]
        return float(sum(float(c) * prod(xi ** e for xi, e in zip(xf, exp)) for exp, c in self._terms.items()))

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """对形状 (S, N) 的样本矩阵逐行求值"""
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != self.n_dim:
            raise DimensionMismatchError(f"样本矩阵形状 {points.shape} 与维度 {self.n_dim} 不一致")
        out = np.zeros(points.shape[0], dtype=np.float64)
        for exp, coeff in sorted(self._terms.items()):
            column = np.full(points.shape[0], float(coeff))
            for i, e in enumerate(exp):
                if e:
                    column *= points[:, i] ** e
            out += column
        return out

    # ---------- JSON ----------

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_dim": self.n_dim,
            "monomials": [
                {"exp": list(exp), "coeff": format_number(c)}
                for exp, c in sorted(self._terms.items())
            ],
        }


def _falling(e: int, k: int) -> int:
    result = 1
    for step in range(k):
        result *= e - step
    return result


class MonomialRecord(BaseModel):
    exp: List[conint(ge=0)]
    coeff: Union[int, float, str]


class PolynomialFile(BaseModel):
    """多项式 JSON: {"n_dim": int, "monomials": [{"exp": [int], "coeff": "p/q"}]}"""
    n_dim: conint(ge=1)
    monomials: List[MonomialRecord]


def parse_polynomial(payload: Union[str, Dict[str, Any]]) -> Polynomial:
    """从 JSON 文本或字典解析多项式，同一指数重复出现时系数相加"""
    try:
        record = PolynomialFile.model_validate_json(payload) if isinstance(payload, str) \
            else PolynomialFile.model_validate(payload)
    except ValidationError as e:
        raise InvalidInputError(f"多项式 JSON 格式错误: {e}") from e
    poly = Polynomial(record.n_dim)
    for m in record.monomials:
        poly = poly + Polynomial(record.n_dim, {tuple(m.exp): m.coeff})
    return poly

# ==================== 高斯期望 ====================

def monomial_moment(exponent: Union[MultiIndex, Sequence[int]], spec: GaussianSpec) -> Number:
    """E[x^n]，由 Song-Lee 闭式逐项代入"""
    n = exponent if isinstance(exponent, MultiIndex) else MultiIndex(tuple(exponent))
    return sum((evaluate_term_prefactor(t, spec) for t in song_lee_moment(n).terms), 0)


def gaussian_expectation(p: Polynomial, spec: GaussianSpec) -> Number:
    """
    E[p(X)] = sum coeff * E[x^exp]

    多项式与高斯参数都精确时返回 Fraction，否则返回浮点数
    """
    if p.n_dim != spec.n_dim:
        raise DimensionMismatchError(f"多项式维度 {p.n_dim} 与高斯维度 {spec.n_dim} 不一致")
    return sum((c * monomial_moment(exp, spec) for exp, c in p.terms()), 0)


def expansion_value(e: Expansion, g: Polynomial, spec: GaussianSpec) -> Number:
    """
    展开式的数值：sum_t prefactor(t) * E[d^{t.deriv} g]
    """
    if e.n_dim != g.n_dim or e.n_dim != spec.n_dim:
        raise DimensionMismatchError(f"维度不一致: 展开式 {e.n_dim}，多项式 {g.n_dim}，高斯 {spec.n_dim}")
    cache: Dict[MultiIndex, Number] = {}
    total: Number = 0
    for t in e.terms:
        if t.deriv not in cache:
            cache[t.deriv] = gaussian_expectation(g.partial_derivative(t.deriv), spec)
        inner = cache[t.deriv]
        if inner != 0:
            total += evaluate_term_prefactor(t, spec) * inner
    return total


def induction_step_check(
    n: MultiIndex,
    m: int,
    g: Polynomial,
    spec: GaussianSpec,
    term_cap: Optional[int] = None,
) -> Tuple[Number, Number]:
    """
    归纳步两侧：展开 n + e_m 作用于 g，与展开 n 作用于 g * x_m

    Returns:
        (左侧, 右侧)，两者应相等
    """
    shifted = n + MultiIndex.unit(m, len(n))
    lhs = expansion_value(stein_expand(shifted, term_cap=term_cap), g, spec)
    rhs = expansion_value(stein_expand(n, term_cap=term_cap), g * Polynomial.variable(m, g.n_dim), spec)
    logger.debug(f"📊 归纳步 n=({n}), m={m}: {lhs} vs {rhs}")
    return lhs, rhs

"""
平均平移算子

T_ii = sum_m sigma_i^{2m} / (2^m m!) d_i^{2m}
T_ij = sum_m C_ij^m / m! d_i^m d_j^m

两类级数作用在多项式上都在有限步后截断；全部算子作用后在 mu 处求值即得 E[g(X)]
"""

from fractions import Fraction
from math import comb, factorial
from typing import List, Optional, Sequence

from loguru import logger

from models import (
    DimensionMismatchError,
    GaussianSpec,
    InvalidInputError,
    Number,
    OperatorKind,
    OperatorSpec,
    is_exact,
)
from utils.coefficients import glue_coeff, hermite_coeff
from utils.polynomial import Polynomial


def _series_coeff(base: Number, power: int, denominator: int) -> Number:
    if is_exact(base):
        return Fraction(base) ** power / denominator
    return float(base) ** power / denominator


def _check_index(p: Polynomial, *indices: int) -> None:
    for i in indices:
        if not 1 <= i <= p.n_dim:
            raise InvalidInputError(f"分量编号 {i} 超出 1..{p.n_dim}")


def apply_diagonal(p: Polynomial, i: int, variance: Number) -> Polynomial:
    """
    T_ii p，m 取到 2m 超过 p 关于 x_i 的次数为止

    Args:
        p: 多项式
        i: 分量编号（从 1 开始）
        variance: sigma_i^2

    Returns:
        Polynomial
    """
    _check_index(p, i)
    result = Polynomial(p.n_dim)
    for m in range(p.degree_in(i) // 2 + 1):
        deriv = [0] * p.n_dim
        deriv[i - 1] = 2 * m
        coeff = _series_coeff(variance, m, 2 ** m * factorial(m))
        result = result + p.partial_derivative(deriv).scale(coeff)
    return result


def apply_cross(p: Polynomial, i: int, j: int, covariance: Number) -> Polynomial:
    """T_ij p，要求 i != j"""
    if i == j:
        raise InvalidInputError(f"交叉算子要求 i != j: ({i}, {j})")
    _check_index(p, i, j)
    result = Polynomial(p.n_dim)
    for m in range(min(p.degree_in(i), p.degree_in(j)) + 1):
        deriv = [0] * p.n_dim
        deriv[i - 1] = m
        deriv[j - 1] = m
        result = result + p.partial_derivative(deriv).scale(_series_coeff(covariance, m, factorial(m)))
    return result


def apply_operator(p: Polynomial, op: OperatorSpec) -> Polynomial:
    if op.kind is OperatorKind.DIAGONAL:
        return apply_diagonal(p, op.i, op.coefficient)
    return apply_cross(p, op.i, op.j, op.coefficient)


def operator_sequence(spec: GaussianSpec) -> List[OperatorSpec]:
    """规范顺序：先按 i 升序的对角算子，再按 (i, j) 字典序的交叉算子；系数为零的算子是恒等算子，略去"""
    n_dim = spec.n_dim
    ops = [
        OperatorSpec(OperatorKind.DIAGONAL, i, i, spec.variance(i))
        for i in range(1, n_dim + 1)
        if spec.variance(i) != 0
    ]
    ops += [
        OperatorSpec(OperatorKind.CROSS, i, j, spec.covariance(i, j))
        for i in range(1, n_dim + 1)
        for j in range(i + 1, n_dim + 1)
        if spec.covariance(i, j) != 0
    ]
    return ops


def apply_all(g: Polynomial, ops: Sequence[OperatorSpec]) -> Polynomial:
    for op in ops:
        g = apply_operator(g, op)
    return g


def operator_expectation(
    g: Polynomial,
    spec: GaussianSpec,
    order: Optional[Sequence[OperatorSpec]] = None,
) -> Number:
    """
    E[g(X)] = (prod T_ii)(prod T_ij) g 在 mu 处的值

    Args:
        g: 多项式
        spec: 高斯参数
        order: 可选的算子顺序（默认 operator_sequence）

    Returns:
        多项式与参数都精确时为 Fraction，否则为浮点数
    """
    if g.n_dim != spec.n_dim:
        raise DimensionMismatchError(f"多项式维度 {g.n_dim} 与高斯维度 {spec.n_dim} 不一致")
    ops = list(order) if order is not None else operator_sequence(spec)
    shifted = apply_all(g, ops)
    logger.debug(f"📊 作用 {len(ops)} 个算子后剩余 {len(shifted)} 个单项式")
    exact = spec.is_exact and shifted.is_exact()
    return shifted.evaluate(spec.mean, exact=exact)

# ==================== 算子作用于乘积的展开 ====================

def diagonal_product_expansion(g: Polynomial, i: int, n_i: int, variance: Number) -> Polynomial:
    """
    T_ii[g x_i^{n_i}] 的展开形式：
    sum_l C(n_i, l) x_i^{n_i-l} sum_k H_{l,k} sigma^{2(l-k)} T_ii[d_i^{l-2k} g]
    """
    _check_index(g, i)
    result = Polynomial(g.n_dim)
    for ell in range(n_i + 1):
        shift = [0] * g.n_dim
        shift[i - 1] = n_i - ell
        for k in range(ell // 2 + 1):
            deriv = [0] * g.n_dim
            deriv[i - 1] = ell - 2 * k
            coeff = comb(n_i, ell) * hermite_coeff(ell, k) * _series_coeff(variance, ell - k, 1)
            inner = apply_diagonal(g.partial_derivative(deriv), i, variance)
            result = result + inner.multiply_by_monomial(shift).scale(coeff)
    return result


def cross_product_expansion(g: Polynomial, i: int, j: int, n_i: int, n_j: int, covariance: Number) -> Polynomial:
    """
    T_ij[g x_i^{n_i} x_j^{n_j}] 的展开形式：
    sum C(n_i,l_i) C(n_j,l_j) x_i^{n_i-l_i} x_j^{n_j-l_j}
        sum_k G_{l_i,l_j,k} C_ij^{l_i+l_j-k} T_ij[d_i^{l_j-k} d_j^{l_i-k} g]
    """
    if i == j:
        raise InvalidInputError(f"交叉算子要求 i != j: ({i}, {j})")
    _check_index(g, i, j)
    result = Polynomial(g.n_dim)
    for ell_i in range(n_i + 1):
        for ell_j in range(n_j + 1):
            shift = [0] * g.n_dim
            shift[i - 1] = n_i - ell_i
            shift[j - 1] = n_j - ell_j
            for k in range(min(ell_i, ell_j) + 1):
                deriv = [0] * g.n_dim
                deriv[i - 1] = ell_j - k
                deriv[j - 1] = ell_i - k
                coeff = (comb(n_i, ell_i) * comb(n_j, ell_j) * glue_coeff(ell_i, ell_j, k)
                         * _series_coeff(covariance, ell_i + ell_j - k, 1))
                inner = apply_cross(g.partial_derivative(deriv), i, j, covariance)
                result = result + inner.multiply_by_monomial(shift).scale(coeff)
    return result

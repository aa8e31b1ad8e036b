"""
组合系数

生成公式中用到的精确整数系数：H（Bessel 数）、G（粘合数）、多项式系数、下降阶乘，
全部使用 Python 任意精度整数
"""

from functools import lru_cache
from math import comb, factorial
from typing import List, Sequence

from models import CoeffFamily, CoeffKey, InvalidInputError


@lru_cache(maxsize=None)
def hermite_coeff(ell: int, k: int) -> int:
    """
    H_{l,k} = l! / (2^k k! (l-2k)!)，k 超出 0..floor(l/2) 时为 0

    Args:
        ell: 非负整数 l
        k: 任意整数

    Returns:
        int: 精确整数
    """
    if ell < 0:
        raise InvalidInputError(f"H 的 l 必须非负: {ell}")
    if k < 0 or 2 * k > ell:
        return 0
    return factorial(ell) // (2 ** k * factorial(k) * factorial(ell - 2 * k))


@lru_cache(maxsize=None)
def glue_coeff(ell1: int, ell2: int, k: int) -> int:
    """
    G_{l1,l2,k} = C(l1,k) C(l2,k) k!，k 超出 0..min(l1,l2) 时为 0
    """
    if ell1 < 0 or ell2 < 0:
        raise InvalidInputError(f"G 的 l1、l2 必须非负: ({ell1}, {ell2})")
    if k < 0 or k > min(ell1, ell2):
        return 0
    return comb(ell1, k) * comb(ell2, k) * factorial(k)


def multinomial(n: int, parts: Sequence[int]) -> int:
    """
    多项式系数 n! / prod(parts_i!)

    Args:
        n: 非负整数
        parts: 和为 n 的非负整数序列

    Returns:
        int: 精确整数
    """
    parts = tuple(parts)
    if any(p < 0 for p in parts) or sum(parts) != n:
        raise InvalidInputError(f"多项式系数的各部分 {parts} 必须非负且和为 {n}")
    return _multinomial(n, parts)


@lru_cache(maxsize=None)
def _multinomial(n: int, parts: tuple) -> int:
    result = 1
    remaining = n
    for p in parts:
        result *= comb(remaining, p)
        remaining -= p
    return result


def falling_factorial(m: int, ell: int) -> int:
    """下降阶乘 m(m-1)...(m-l+1)；l = 0 时为 1，l > m 时为 0"""
    if m < 0 or ell < 0:
        raise InvalidInputError(f"下降阶乘参数必须非负: ({m}, {ell})")
    if ell > m:
        return 0
    return factorial(m) // factorial(m - ell)


def coefficient(key: CoeffKey) -> int:
    """按系数键求值"""
    args = key.arguments
    if key.family is CoeffFamily.MULTINOMIAL:
        return multinomial(args[0], args[1:])
    if key.family is CoeffFamily.HERMITE:
        return hermite_coeff(*args)
    if key.family is CoeffFamily.GLUE:
        return glue_coeff(*args)
    return falling_factorial(*args)


def hermite_row(ell: int) -> List[int]:
    """[H_{l,0}, ..., H_{l,floor(l/2)}]"""
    return [hermite_coeff(ell, k) for k in range(ell // 2 + 1)]


def glue_row(ell1: int, ell2: int) -> List[int]:
    """[G_{l1,l2,0}, ..., G_{l1,l2,min(l1,l2)}]"""
    return [glue_coeff(ell1, ell2, k) for k in range(min(ell1, ell2) + 1)]


def hermite_polynomial_coeffs(ell: int) -> List[int]:
    """
    概率论 Hermite 多项式 He_l 按 x 的降幂系数 (-1)^k H_{l,k}，对应 x^{l-2k}
    """
    return [(-1) ** k * hermite_coeff(ell, k) for k in range(ell // 2 + 1)]

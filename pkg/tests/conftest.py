"""测试共用的随机实例"""

from fractions import Fraction
from typing import Callable

import numpy as np
import pytest

from models import GaussianSpec, MultiIndex
from utils.polynomial import Polynomial


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def make_polynomial(rng) -> Callable[..., Polynomial]:
    """随机多项式：最多 max_terms 个单项式，总次数不超过 degree，系数为小分数"""

    def make(n_dim: int, degree: int = 4, max_terms: int = 4) -> Polynomial:
        monomials = {}
        for _ in range(int(rng.integers(1, max_terms + 1))):
            total = int(rng.integers(0, degree + 1))
            exp = [0] * n_dim
            for _ in range(total):
                exp[int(rng.integers(0, n_dim))] += 1
            numerator = int(rng.integers(-5, 6)) or 1
            monomials[tuple(exp)] = Fraction(numerator, int(rng.integers(1, 4)))
        return Polynomial(n_dim, monomials)

    return make


@pytest.fixture
def make_spec(rng) -> Callable[..., GaussianSpec]:
    """随机高斯参数：C = A A^T（A 为小整数矩阵），均值为小分数"""

    def make(n_dim: int, zero_mean: bool = False) -> GaussianSpec:
        a = rng.integers(-2, 3, size=(n_dim, n_dim))
        a[np.diag_indices(n_dim)] = rng.integers(1, 3, size=n_dim)
        cov = [[int(sum(int(a[i, k]) * int(a[j, k]) for k in range(n_dim))) for j in range(n_dim)]
               for i in range(n_dim)]
        if zero_mean:
            mean = [0] * n_dim
        else:
            mean = [Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) for _ in range(n_dim)]
        return GaussianSpec(mean=tuple(mean), cov=tuple(tuple(row) for row in cov))

    return make


@pytest.fixture
def make_multi_index(rng) -> Callable[..., MultiIndex]:
    """随机多重指标，|n| <= max_total"""

    def make(n_dim: int, max_total: int = 4) -> MultiIndex:
        entries = [0] * n_dim
        for _ in range(int(rng.integers(0, max_total + 1))):
            entries[int(rng.integers(0, n_dim))] += 1
        return MultiIndex(tuple(entries))

    return make


@pytest.fixture
def eq6_spec() -> GaussianSpec:
    """零均值、单位方差、C12 = 1/2"""
    return GaussianSpec(mean=(0, 0), cov=((1, Fraction(1, 2)), (Fraction(1, 2), 1)))

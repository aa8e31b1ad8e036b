"""
Stein 引理推广公式的符号展开

对 E[g(X) prod X_i^{n_i}] 枚举全部 (r, L, K)，生成
prod multinomial(n_i; r_i, l_i1..l_iN) * prod H_{l_ii,k_ii} * prod_{i<j} G_{l_ij,l_ji,k_ij}
乘以对应的 mu、sigma^2、C 单项式与 E[d^a g]；并给出零均值、不相关、
Stein 引理、Isserlis 与 Song-Lee 等特例
"""

from functools import lru_cache
from itertools import product
from math import comb, factorial, prod
from typing import Dict, Iterator, List, Optional, Tuple

from loguru import logger

from models import (
    DEFAULT_SETTINGS,
    Expansion,
    InvalidInputError,
    Matrix,
    MultiIndex,
    PartitionAssignment,
    SymbolicTerm,
    TermCapExceededError,
)
from utils.coefficients import glue_coeff, hermite_coeff, multinomial
from utils.matchings import pair_partitions
from utils.symbolic_core import canonicalize

# ==================== (r, L) 枚举 ====================

def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """把 total 拆成 parts 个非负整数，按余字典序（最后一个分量变化最慢）输出"""
    if parts == 1:
        yield (total,)
        return
    for last in range(total + 1):
        for head in compositions(total - last, parts - 1):
            yield head + (last,)


@lru_cache(maxsize=None)
def _row_options(total: int, parts: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(compositions(total, parts))


def enumerate_partitions(
    n: MultiIndex,
    max_order: Optional[int] = None,
) -> Iterator[Tuple[MultiIndex, Matrix]]:
    """
    枚举满足 r_i + sum_j l_ij = n_i 的全部 (r, L)

    第 i 行为 (r_i, l_i1, ..., l_iN)，行按 i = 1..N 嵌套（第一行最外层）。
    给定 max_order 时剪掉导数总阶 |a| 必然超过它的分支：
    |a| >= sum_i (l_ii mod 2) + sum_{i<j} |l_ij - l_ji|，该下界在 K 取最大时取到。

    Args:
        n: 幂次多重指标
        max_order: 可选的 |a| 上限

    Returns:
        (r, L) 流
    """
    n_dim = len(n)
    options = [_row_options(n_i, n_dim + 1) for n_i in n]

    def walk(i: int, rows: List[Tuple[int, ...]], bound: int):
        if i == n_dim:
            yield MultiIndex(tuple(row[0] for row in rows)), tuple(row[1:] for row in rows)
            return
        for row in options[i]:
            ell = row[1:]
            extra = ell[i] % 2 + sum(abs(rows[p][1 + i] - ell[p]) for p in range(i))
            if max_order is not None and bound + extra > max_order:
                continue
            rows.append(row)
            yield from walk(i + 1, rows, bound + extra)
            rows.pop()

    yield from walk(0, [], 0)


def _k_ranges(L: Matrix) -> List[Tuple[int, int, int]]:
    """行优先列出 (i, j, 上限)，i <= j"""
    n_dim = len(L)
    slots = []
    for i in range(n_dim):
        slots.append((i, i, L[i][i] // 2))
        for j in range(i + 1, n_dim):
            slots.append((i, j, min(L[i][j], L[j][i])))
    return slots


def _k_matrices(L: Matrix) -> Iterator[Matrix]:
    n_dim = len(L)
    slots = _k_ranges(L)
    for values in product(*(range(upper + 1) for _, _, upper in slots)):
        K = [[0] * n_dim for _ in range(n_dim)]
        for (i, j, _), v in zip(slots, values):
            K[i][j] = v
            K[j][i] = v
        yield tuple(tuple(row) for row in K)


def enumerate_assignments(n: MultiIndex, max_order: Optional[int] = None) -> Iterator[PartitionAssignment]:
    """在 (r, L) 流上再枚举全部合法的对称 K"""
    for r, L in enumerate_partitions(n, max_order):
        for K in _k_matrices(L):
            yield PartitionAssignment(r=r, L=L, K=K)


def derivative_orders(L: Matrix, K: Matrix) -> MultiIndex:
    """a_i = (l_ii - 2 k_ii) + sum_{j != i} (l_ji - k_ij)"""
    n_dim = len(L)
    return MultiIndex(tuple(
        L[i][i] - 2 * K[i][i] + sum(L[j][i] - K[i][j] for j in range(n_dim) if j != i)
        for i in range(n_dim)
    ))

# ==================== 原始项与项数保护 ====================

def assignment_term(n: MultiIndex, pa: PartitionAssignment) -> SymbolicTerm:
    """一组 (r, L, K) 对应的原始符号项"""
    L, K = pa.L, pa.K
    n_dim = len(n)
    coeff = prod(multinomial(n[i], (pa.r[i],) + L[i]) for i in range(n_dim))
    coeff *= prod(hermite_coeff(L[i][i], K[i][i]) for i in range(n_dim))
    cov: Dict[Tuple[int, int], int] = {}
    for i in range(n_dim):
        for j in range(i + 1, n_dim):
            coeff *= glue_coeff(L[i][j], L[j][i], K[i][j])
            cov[(i + 1, j + 1)] = L[i][j] + L[j][i] - K[i][j]
    return SymbolicTerm.create(
        coeff=coeff,
        mu_pow=pa.r.entries,
        var_pow=tuple(L[i][i] - K[i][i] for i in range(n_dim)),
        cov_pow=cov,
        deriv=derivative_orders(L, K).entries,
    )


def iter_raw_terms(n: MultiIndex, max_order: Optional[int] = None) -> Iterator[SymbolicTerm]:
    """未合并的原始项流；max_order 给定时只输出 |a| <= max_order 的项"""
    for pa in enumerate_assignments(n, max_order):
        term = assignment_term(n, pa)
        if max_order is not None and term.deriv.total > max_order:
            continue
        yield term


def raw_term_count(n: MultiIndex, max_order: Optional[int] = None, cap: Optional[int] = None) -> int:
    """
    原始项数 sum_{(r,L)} prod(floor(l_ii/2)+1) prod_{i<j}(min(l_ij,l_ji)+1)，不构造任何项

    Args:
        n: 幂次多重指标
        max_order: 与 enumerate_partitions 相同的剪枝
        cap: 超过时立即抛出 TermCapExceededError

    Returns:
        int: 项数
    """
    total = 0
    for _, L in enumerate_partitions(n, max_order):
        total += prod(upper + 1 for _, _, upper in _k_ranges(L))
        if cap is not None and total > cap:
            raise TermCapExceededError(f"n=({n}) 的原始项数超过上限 {cap}")
    return total


def _guard(n: MultiIndex, max_order: Optional[int], cap: int) -> int:
    if max_order is None:
        n_dim = len(n)
        # 每个 (r, L) 至少贡献一项
        lower = prod(comb(n_i + n_dim, n_dim) for n_i in n)
        if lower > cap:
            raise TermCapExceededError(f"n=({n}) 至少有 {lower} 个原始项，超过上限 {cap}")
    return raw_term_count(n, max_order, cap)

# ==================== 生成公式与特例 ====================

def stein_expand(
    n: MultiIndex,
    max_order: Optional[int] = None,
    term_cap: Optional[int] = None,
) -> Expansion:
    """
    生成 E[g(X) prod X_i^{n_i}] 的完整符号展开

    Args:
        n: 幂次多重指标，N = len(n) >= 1
        max_order: 可选，只保留导数总阶 |a| <= max_order 的项
        term_cap: 原始项数上限，默认 DEFAULT_SETTINGS["term_cap"]；环境变量覆盖由调用方 load_settings() 解析

    Returns:
        Expansion: 规范展开式
    """
    if len(n) < 1:
        raise InvalidInputError("维度 N 必须 >= 1")
    cap = term_cap if term_cap is not None else DEFAULT_SETTINGS["term_cap"]
    if cap <= 0:
        raise InvalidInputError(f"项数上限必须为正: {cap}")
    count = _guard(n, max_order, cap)
    logger.info(f"🔍 展开 n=({n})，原始项 {count} 个")
    expansion = canonicalize(iter_raw_terms(n, max_order), len(n))
    logger.debug(f"✅ 合并后 {len(expansion)} 项")
    return expansion


def stein_expand_zero_mean(n: MultiIndex, term_cap: Optional[int] = None) -> Expansion:
    """mu = 0：从一般展开中去掉所有含 mu 的项"""
    return stein_expand(n, term_cap=term_cap).zero_mean_part()


def uncorrelated_expand(n: MultiIndex) -> Expansion:
    """
    C_ij = 0 (i != j) 时的多重指标形式：
    sum_{l<=n} C(n,l) mu^{n-l} sum_{k<=floor(l/2)} H_{l,k} sigma^{2(l-k)} E[d^{l-2k} g]
    """
    n_dim = len(n)
    raw = []
    for ell in product(*(range(n_i + 1) for n_i in n)):
        for k in product(*(range(l_i // 2 + 1) for l_i in ell)):
            coeff = prod(comb(n[i], ell[i]) * hermite_coeff(ell[i], k[i]) for i in range(n_dim))
            raw.append(SymbolicTerm.create(
                coeff=coeff,
                mu_pow=tuple(n[i] - ell[i] for i in range(n_dim)),
                var_pow=tuple(ell[i] - k[i] for i in range(n_dim)),
                cov_pow=None,
                deriv=tuple(ell[i] - 2 * k[i] for i in range(n_dim)),
            ))
    return canonicalize(raw, n_dim)


def stein_lemma_terms(m: int, n_dim: int) -> Expansion:
    """E[g X_m] = mu_m E[g] + sigma_m^2 E[d_m g] + sum_{j != m} C_mj E[d_j g]"""
    if not 1 <= m <= n_dim:
        raise InvalidInputError(f"分量编号 {m} 超出 1..{n_dim}")
    zeros = (0,) * n_dim
    unit = MultiIndex.unit(m, n_dim).entries
    raw = [
        SymbolicTerm.create(1, unit, zeros, None, zeros),
        SymbolicTerm.create(1, zeros, unit, None, unit),
    ]
    for j in range(1, n_dim + 1):
        if j != m:
            raw.append(SymbolicTerm.create(1, zeros, zeros, {(m, j): 1}, MultiIndex.unit(j, n_dim).entries))
    return canonicalize(raw, n_dim)


def isserlis_expansion(n_dim: int) -> Expansion:
    """
    E[X_1 ... X_N]（零均值）：N 为奇数时为空；偶数时每个完美匹配一项 prod C_ij，
    共 (N-1)!! 项
    """
    if n_dim < 1:
        raise InvalidInputError(f"维度必须为正: {n_dim}")
    zeros = (0,) * n_dim
    raw = [
        SymbolicTerm.create(1, zeros, zeros, {pair: 1 for pair in pairing}, zeros)
        for pairing in pair_partitions(range(1, n_dim + 1))
    ]
    return canonicalize(raw, n_dim)


def _song_lee_matrices(n: MultiIndex) -> Iterator[Tuple[Dict[Tuple[int, int], int], Tuple[int, ...]]]:
    """枚举对称 m（只记 i <= j）及对应的 r_i = n_i - sum_j (1 + delta_ij) m_ij >= 0"""
    n_dim = len(n)
    slots = [(i, j) for i in range(n_dim) for j in range(i, n_dim)]

    def walk(s: int, remaining: List[int], chosen: Dict[Tuple[int, int], int]):
        if s == len(slots):
            yield dict(chosen), tuple(remaining)
            return
        i, j = slots[s]
        upper = remaining[i] // 2 if i == j else min(remaining[i], remaining[j])
        for v in range(upper + 1):
            if i == j:
                remaining[i] -= 2 * v
            else:
                remaining[i] -= v
                remaining[j] -= v
            chosen[(i, j)] = v
            yield from walk(s + 1, remaining, chosen)
            if i == j:
                remaining[i] += 2 * v
            else:
                remaining[i] += v
                remaining[j] += v
        chosen.pop((i, j), None)

    yield from walk(0, list(n.entries), {})


@lru_cache(maxsize=4096)
def song_lee_moment(n: MultiIndex) -> Expansion:
    """
    乘积矩 E[prod X_i^{n_i}] 的闭式：
    sum_m d_{n,m} prod_{i<=j} C_ij^{m_ij} prod mu_i^{r_i}，
    d = prod n_i! / (2^{sum m_ii} prod m_ij! prod r_i!)
    """
    n_dim = len(n)
    numerator = prod(factorial(n_i) for n_i in n)
    raw = []
    for m, r in _song_lee_matrices(n):
        diag = sum(m[(i, i)] for i in range(n_dim))
        denominator = 2 ** diag * prod(factorial(v) for v in m.values()) * prod(factorial(r_i) for r_i in r)
        raw.append(SymbolicTerm.create(
            coeff=numerator // denominator,
            mu_pow=r,
            var_pow=tuple(m[(i, i)] for i in range(n_dim)),
            cov_pow={(i + 1, j + 1): v for (i, j), v in m.items() if i != j},
            deriv=(0,) * n_dim,
        ))
    return canonicalize(raw, n_dim)

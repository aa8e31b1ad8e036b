"""
符号展开式的规范化、渲染与数值代入

规范形式：同签名项系数相加、丢弃零系数项、按
(deriv, mu_pow, var_pow, 行优先协方差指数) 字典序排序
"""

import json
from typing import Any, Dict, Iterable, List, Union

from loguru import logger
from pydantic import BaseModel, ValidationError, conint

from models import (
    DimensionMismatchError,
    Expansion,
    GaussianSpec,
    InvalidInputError,
    MultiIndex,
    Number,
    OutputFormat,
    SymbolicTerm,
)


def canonicalize(raw: Iterable[SymbolicTerm], n_dim: int) -> Expansion:
    """
    合并同签名项并排序

    Args:
        raw: 原始符号项
        n_dim: 维度 N

    Returns:
        Expansion: 规范展开式
    """
    merged: Dict[tuple, int] = {}
    prototypes: Dict[tuple, SymbolicTerm] = {}
    for term in raw:
        if term.dimension != n_dim:
            raise DimensionMismatchError(f"符号项维度 {term.dimension} 与 N={n_dim} 不一致")
        sig = term.signature
        if sig in merged:
            merged[sig] += term.coeff
        else:
            merged[sig] = term.coeff
            prototypes[sig] = term
    terms = [prototypes[sig].with_coeff(c) for sig, c in merged.items() if c != 0]
    terms.sort(key=SymbolicTerm.sort_key)
    return Expansion(n_dim, tuple(terms))


def _pair_label(i: int, j: int, n_dim: int) -> str:
    # 两位数编号时加分隔符，避免 C112 这类歧义
    return f"C{i}{j}" if n_dim < 10 else f"C{i}_{j}"


def render_term(term: SymbolicTerm) -> str:
    """单项文本形式，例如 2*s1^1*C12^1*E[d1^2 d2 g]"""
    factors = [str(term.coeff)]
    factors += [f"m{i}^{r}" for i, r in enumerate(term.mu_pow, start=1) if r]
    factors += [f"s{i}^{v}" for i, v in enumerate(term.var_pow, start=1) if v]
    factors += [f"{_pair_label(i, j, term.dimension)}^{e}" for i, j, e in term.cov_pow]
    derivs = [f"d{i}" if a == 1 else f"d{i}^{a}" for i, a in enumerate(term.deriv, start=1) if a]
    factors.append("E[" + " ".join(derivs + ["g"]) + "]")
    return "*".join(factors)


def expansion_to_dict(e: Expansion) -> Dict[str, Any]:
    """JSON 结构，系数以十进制字符串保存"""
    return {
        "n_dim": e.n_dim,
        "terms": [
            {
                "coeff": str(t.coeff),
                "mu_pow": list(t.mu_pow),
                "var_pow": list(t.var_pow),
                "cov_pow": [[i, j, p] for i, j, p in t.cov_pow],
                "deriv": list(t.deriv),
            }
            for t in e.terms
        ],
    }


def render(e: Expansion, fmt: Union[OutputFormat, str] = OutputFormat.JSON) -> str:
    """
    渲染展开式

    Args:
        e: 规范展开式
        fmt: json 或 text

    Returns:
        str: text 每行一项，空展开式为 "0"；json 为确定性紧凑格式
    """
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.TEXT:
        if not e.terms:
            return "0"
        return "\n".join(render_term(t) for t in e.terms)
    return json.dumps(expansion_to_dict(e), separators=(",", ":"))


class TermRecord(BaseModel):
    coeff: str
    mu_pow: List[conint(ge=0)]
    var_pow: List[conint(ge=0)]
    cov_pow: List[List[int]]
    deriv: List[conint(ge=0)]


class ExpansionRecord(BaseModel):
    n_dim: conint(ge=1)
    terms: List[TermRecord]


def parse_expansion(payload: Union[str, Dict[str, Any]]) -> Expansion:
    """
    从 JSON 文本或字典还原展开式（不重新规范化，保持原顺序）
    """
    try:
        record = ExpansionRecord.model_validate_json(payload) if isinstance(payload, str) \
            else ExpansionRecord.model_validate(payload)
    except ValidationError as e:
        raise InvalidInputError(f"展开式 JSON 格式错误: {e}") from e

    terms = []
    for t in record.terms:
        try:
            coeff = int(t.coeff)
        except ValueError as e:
            raise InvalidInputError(f"系数必须是十进制整数字符串: {t.coeff!r}") from e
        if any(len(entry) != 3 for entry in t.cov_pow):
            raise InvalidInputError("cov_pow 每个元素必须是 [i, j, e]")
        terms.append(SymbolicTerm(
            coeff=coeff,
            mu_pow=_multi(t.mu_pow),
            var_pow=_multi(t.var_pow),
            cov_pow=tuple(tuple(entry) for entry in t.cov_pow),
            deriv=_multi(t.deriv),
        ))
    return Expansion(record.n_dim, tuple(terms))


def _multi(entries) -> MultiIndex:
    return MultiIndex(tuple(entries))


def evaluate_term_prefactor(t: SymbolicTerm, spec: GaussianSpec) -> Number:
    """
    coeff * prod(mu_i^r_i) * prod(sigma_i^(2 v_i)) * prod(C_ij^e_ij)，不含 E[d^a g] 因子

    规格全为有理数时结果精确（Fraction），否则为浮点数
    """
    if t.dimension != spec.n_dim:
        raise DimensionMismatchError(f"符号项维度 {t.dimension} 与高斯维度 {spec.n_dim} 不一致")
    value: Number = t.coeff
    for i, r in enumerate(t.mu_pow, start=1):
        if r:
            value *= spec.mean[i - 1] ** r
    for i, v in enumerate(t.var_pow, start=1):
        if v:
            value *= spec.variance(i) ** v
    for i, j, e in t.cov_pow:
        value *= spec.covariance(i, j) ** e
    return value


def moment_value(e: Expansion, spec: GaussianSpec) -> Number:
    """g = 1 时展开式的数值：只有 deriv = 0 的项非零"""
    logger.debug(f"📊 代入 {len(e)} 项")
    return sum((evaluate_term_prefactor(t, spec) for t in e.terms if t.deriv.is_zero()), 0)

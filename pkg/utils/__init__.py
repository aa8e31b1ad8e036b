"""
高斯矩展开工具 - 工具包

包含组合系数、符号展开、多项式、平均平移算子、独立验证计算与一致性判断等核心工具
"""

from .coefficients import glue_coeff, hermite_coeff, multinomial
from .symbolic_core import canonicalize, parse_expansion, render
from .stein_expansion import isserlis_expansion, song_lee_moment, stein_expand
from .polynomial import Polynomial, gaussian_expectation, parse_polynomial
from .operators import operator_expectation
from .oracles import SteinReducer, mc_estimate, pairing_moment
from .agreement_checker import AgreementChecker

__all__ = [
    "hermite_coeff",
    "glue_coeff",
    "multinomial",
    "canonicalize",
    "parse_expansion",
    "render",
    "stein_expand",
    "isserlis_expansion",
    "song_lee_moment",
    "Polynomial",
    "gaussian_expectation",
    "parse_polynomial",
    "operator_expectation",
    "SteinReducer",
    "pairing_moment",
    "mc_estimate",
    "AgreementChecker",
]

from fractions import Fraction

import pytest

from models import GaussianSpec, InvalidInputError, OperatorKind, OperatorSpec
from utils.operators import (
    apply_all,
    apply_cross,
    apply_diagonal,
    cross_product_expansion,
    diagonal_product_expansion,
    operator_expectation,
    operator_sequence,
)
from utils.polynomial import Polynomial, gaussian_expectation

S2 = Fraction(3, 2)
C = Fraction(-2, 5)


def _mono(exp, coeff=1):
    return Polynomial.monomial(exp, coeff)


def test_diagonal_examples():
    assert apply_diagonal(_mono((2,)), 1, S2) == _mono((2,)) + Polynomial.constant(1, S2)
    assert apply_diagonal(_mono((1,)), 1, S2) == _mono((1,))
    expected = _mono((4,)) + _mono((2,), 6 * S2) + Polynomial.constant(1, 3 * S2 ** 2)
    assert apply_diagonal(_mono((4,)), 1, S2) == expected


def test_cross_examples():
    assert apply_cross(_mono((1, 1)), 1, 2, C) == _mono((1, 1)) + Polynomial.constant(2, C)
    assert apply_cross(_mono((2, 0)), 1, 2, C) == _mono((2, 0))
    expected = _mono((2, 2)) + _mono((1, 1), 4 * C) + Polynomial.constant(2, 2 * C ** 2)
    assert apply_cross(_mono((2, 2)), 1, 2, C) == expected


def test_cross_rejects_same_index():
    with pytest.raises(InvalidInputError):
        apply_cross(_mono((1, 1)), 2, 2, C)
    with pytest.raises(InvalidInputError):
        OperatorSpec(OperatorKind.CROSS, 1, 1, C)


def test_operator_expectation_examples():
    assert operator_expectation(Polynomial.constant(2), GaussianSpec.standard(2)) == 1
    spec = GaussianSpec(mean=(Fraction(1, 2),), cov=((S2,),))
    assert operator_expectation(_mono((2,)), spec) == Fraction(1, 4) + S2
    spec2 = GaussianSpec(mean=(0, 0), cov=((1, C), (C, 2)))
    assert operator_expectation(_mono((1, 1)), spec2) == C


def test_operator_sequence_order():
    spec = GaussianSpec(mean=(0, 0, 0), cov=((1, 0, 2), (0, 3, 1), (2, 1, 9)))
    ops = operator_sequence(spec)
    assert [(op.kind, op.i, op.j) for op in ops] == [
        (OperatorKind.DIAGONAL, 1, 1),
        (OperatorKind.DIAGONAL, 2, 2),
        (OperatorKind.DIAGONAL, 3, 3),
        (OperatorKind.CROSS, 1, 3),
        (OperatorKind.CROSS, 2, 3),
    ]


def test_operators_commute(make_polynomial, make_spec, rng):
    for _ in range(100):
        n_dim = int(rng.integers(2, 4))
        p = make_polynomial(n_dim, degree=6)
        ops = operator_sequence(make_spec(n_dim))
        shuffled = [ops[int(i)] for i in rng.permutation(len(ops))]
        assert apply_all(p, ops) == apply_all(p, shuffled)


def test_operators_commute_with_derivative(make_polynomial, make_spec, rng):
    for _ in range(30):
        n_dim = int(rng.integers(1, 4))
        p = make_polynomial(n_dim, degree=5)
        ops = operator_sequence(make_spec(n_dim))
        i = int(rng.integers(0, n_dim))
        d = [0] * n_dim
        d[i] = 1
        assert apply_all(p, ops).partial_derivative(d) == apply_all(p.partial_derivative(d), ops)


def test_diagonal_product_expansion(make_polynomial, rng):
    for _ in range(100):
        n_dim = int(rng.integers(1, 4))
        g = make_polynomial(n_dim, degree=3)
        i = int(rng.integers(1, n_dim + 1))
        n_i = int(rng.integers(0, 5))
        variance = Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        shift = [0] * n_dim
        shift[i - 1] = n_i
        lhs = apply_diagonal(g.multiply_by_monomial(shift), i, variance)
        assert lhs == diagonal_product_expansion(g, i, n_i, variance)


def test_cross_product_expansion(make_polynomial, rng):
    for _ in range(100):
        n_dim = int(rng.integers(2, 4))
        g = make_polynomial(n_dim, degree=3)
        i, j = (int(v) + 1 for v in rng.choice(n_dim, size=2, replace=False))
        n_i, n_j = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        covariance = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
        shift = [0] * n_dim
        shift[i - 1] = n_i
        shift[j - 1] = n_j
        lhs = apply_cross(g.multiply_by_monomial(shift), i, j, covariance)
        assert lhs == cross_product_expansion(g, i, j, n_i, n_j, covariance)


def test_operator_matches_closed_form(make_polynomial, make_spec, rng):
    for _ in range(50):
        n_dim = int(rng.integers(1, 4))
        g = make_polynomial(n_dim)
        spec = make_spec(n_dim)
        assert operator_expectation(g, spec) == gaussian_expectation(g, spec)


def test_operator_float_spec():
    spec = GaussianSpec(mean=(0.0, 0.0), cov=((1.0, 0.5), (0.5, 1.0)))
    assert operator_expectation(_mono((2, 2)), spec) == pytest.approx(1.5, rel=1e-12)

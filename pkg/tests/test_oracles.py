from fractions import Fraction

import numpy as np
import pytest

from models import (
    GaussianSpec,
    InvalidInputError,
    MultiIndex,
    NonzeroMeanError,
    NotPositiveSemidefiniteError,
)
from utils.matchings import double_factorial
from utils.operators import operator_expectation
from utils.oracles import (
    SteinReducer,
    cholesky,
    mc_estimate,
    monomial_labels,
    pairing_moment,
    stein_reduce,
)
from utils.polynomial import Polynomial, expansion_value, gaussian_expectation, monomial_moment
from utils.stein_expansion import compositions, stein_expand


def _mono(exp, coeff=1):
    return Polynomial.monomial(exp, coeff)


def test_stein_reduce_examples():
    spec = GaussianSpec(mean=(Fraction(2, 3),), cov=((5,),))
    mu, s2 = Fraction(2, 3), 5
    assert stein_reduce(_mono((1,)), spec) == mu
    assert stein_reduce(_mono((3,)), spec) == mu ** 3 + 3 * mu * s2
    zero = GaussianSpec(mean=(0, 0), cov=((2, 1), (1, 3)))
    assert stein_reduce(_mono((1, 2)), zero) == 0


def test_stein_reducer_caches_monomials():
    reducer = SteinReducer(GaussianSpec.standard(2))
    assert reducer.monomial((2, 2)) == 1
    assert reducer.monomial((4, 0)) == 3
    assert (2, 2) in reducer._memo


def test_pairing_examples():
    spec = GaussianSpec(mean=(0, 0), cov=((2, Fraction(1, 2)), (Fraction(1, 2), 3)))
    assert pairing_moment([1, 2], spec) == Fraction(1, 2)
    assert pairing_moment([1, 1], spec) == 2
    assert pairing_moment([1, 1, 2, 2], spec) == 2 * 3 + 2 * Fraction(1, 4)
    assert pairing_moment([1, 2, 2], spec) == 0
    assert pairing_moment([], spec) == 1


def test_pairing_rejects_nonzero_mean():
    spec = GaussianSpec(mean=(1, 0), cov=((1, 0), (0, 1)))
    with pytest.raises(NonzeroMeanError):
        pairing_moment([1, 2], spec)


def test_monomial_labels():
    assert monomial_labels(MultiIndex((2, 0, 1))) == [1, 1, 3]


def test_matching_count_on_distinct_labels():
    for m in range(1, 6):
        n_dim = 2 * m
        # 全 1 协方差矩阵下，每个匹配贡献 1
        ones = GaussianSpec(mean=(0,) * n_dim, cov=tuple((1,) * n_dim for _ in range(n_dim)))
        assert pairing_moment(range(1, n_dim + 1), ones) == double_factorial(2 * m - 1)


@pytest.mark.slow
def test_zero_mean_oracles_agree(make_spec):
    for n_dim in (1, 2, 3, 4):
        spec = make_spec(n_dim, zero_mean=True)
        for total in range(9):
            for entries in compositions(total, n_dim):
                n = MultiIndex(entries)
                p = Polynomial.monomial(entries)
                expected = pairing_moment(monomial_labels(n), spec)
                assert stein_reduce(p, spec) == expected, n
                assert monomial_moment(n, spec) == expected, n
                assert operator_expectation(p, spec) == expected, n


def test_general_mean_oracles_agree(make_polynomial, make_spec, rng):
    for _ in range(100):
        n_dim = int(rng.integers(1, 4))
        p = make_polynomial(n_dim)
        spec = make_spec(n_dim)
        expected = gaussian_expectation(p, spec)
        assert stein_reduce(p, spec) == expected
        assert operator_expectation(p, spec) == expected


@pytest.mark.slow
def test_odd_moments_vanish_for_zero_mean(make_spec):
    for n_dim in (1, 2, 3):
        spec = make_spec(n_dim, zero_mean=True)
        for total in (1, 3, 5, 7):
            for entries in compositions(total, n_dim):
                n = MultiIndex(entries)
                p = Polynomial.monomial(entries)
                assert stein_reduce(p, spec) == 0
                assert pairing_moment(monomial_labels(n), spec) == 0
                assert monomial_moment(n, spec) == 0
                assert operator_expectation(p, spec) == 0
                assert expansion_value(stein_expand(n), Polynomial.constant(n_dim), spec) == 0


def test_cholesky_examples():
    np.testing.assert_allclose(cholesky(GaussianSpec.standard(3)), np.eye(3))
    diag = GaussianSpec(mean=(0, 0), cov=((4, 0), (0, 4)))
    np.testing.assert_allclose(cholesky(diag), 2 * np.eye(2))
    rho = GaussianSpec(mean=(0, 0), cov=((1, 0.5), (0.5, 1)))
    np.testing.assert_allclose(cholesky(rho), [[1.0, 0.0], [0.5, np.sqrt(0.75)]], atol=1e-12)


def test_cholesky_semidefinite():
    spec = GaussianSpec(mean=(0, 0, 0), cov=((1, 1, 0), (1, 1, 0), (0, 0, 2)))
    factor = cholesky(spec)
    np.testing.assert_allclose(factor @ factor.T, np.array(spec.cov, dtype=float), atol=1e-12)


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveSemidefiniteError):
        cholesky(GaussianSpec(mean=(0, 0), cov=((1, 2), (2, 1))))


def test_mc_constant_integrand():
    report = mc_estimate(Polynomial.constant(2), MultiIndex((0, 0)), GaussianSpec.standard(2),
                         samples=1000, seed=7)
    assert report.estimate == 1.0
    assert report.std_error == 0.0
    assert report.samples == 1000


def test_mc_is_reproducible_and_worker_independent(eq6_spec):
    g = Polynomial.variable(1, 2)
    n = MultiIndex((1, 2))
    first = mc_estimate(g, n, eq6_spec, samples=10_000, seed=99, workers=1, block_size=1_000)
    again = mc_estimate(g, n, eq6_spec, samples=10_000, seed=99, workers=1, block_size=1_000)
    threaded = mc_estimate(g, n, eq6_spec, samples=10_000, seed=99, workers=4, block_size=1_000)
    assert first == again == threaded
    other = mc_estimate(g, n, eq6_spec, samples=10_000, seed=100, workers=1, block_size=1_000)
    assert other.estimate != first.estimate


def test_mc_rejects_bad_arguments():
    g = Polynomial.constant(1)
    with pytest.raises(InvalidInputError):
        mc_estimate(g, MultiIndex((1,)), GaussianSpec.standard(1), samples=1, seed=0)
    with pytest.raises(InvalidInputError):
        mc_estimate(g, MultiIndex((1,)), GaussianSpec.standard(1), samples=10, seed=-1)


@pytest.mark.slow
def test_mc_unit_variance():
    report = mc_estimate(Polynomial.constant(1), MultiIndex((2,)), GaussianSpec.standard(1),
                         samples=1_000_000, seed=20240601)
    assert abs(report.estimate - 1.0) <= 5 * report.std_error


@pytest.mark.slow
def test_mc_matches_expansion(eq6_spec):
    g = Polynomial.variable(1, 2)
    n = MultiIndex((1, 2))
    report = mc_estimate(g, n, eq6_spec, samples=1_000_000, seed=20240601)
    truth = expansion_value(stein_expand(n), g, eq6_spec)
    assert truth == Fraction(3, 2)
    assert abs(report.estimate - 1.5) <= 5 * report.std_error

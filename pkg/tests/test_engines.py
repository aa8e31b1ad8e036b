from fractions import Fraction

import pytest

from engines import (
    ExpansionEngine,
    MonteCarloEngine,
    OperatorEngine,
    PairingEngine,
    SongLeeEngine,
    SteinReduceEngine,
    VerificationCoordinator,
)
from models import (
    DEFAULT_SETTINGS,
    EngineKind,
    EngineResult,
    GaussianSpec,
    InvalidInputError,
    MultiIndex,
    TermCapExceededError,
    VerificationStatus,
    load_settings,
)
from utils.agreement_checker import AgreementChecker
from utils.polynomial import Polynomial

EXACT_ENGINES = [ExpansionEngine, SongLeeEngine, SteinReduceEngine, PairingEngine, OperatorEngine]


@pytest.mark.parametrize("engine_cls", EXACT_ENGINES)
def test_exact_engines_on_example(engine_cls, eq6_spec):
    result = engine_cls().evaluate(Polynomial.variable(1, 2), MultiIndex((1, 2)), eq6_spec)
    assert result.ok
    assert result.exact
    assert result.value == Fraction(3, 2)


def test_expansion_engine_reports_term_count(eq6_spec):
    result = ExpansionEngine().evaluate(Polynomial.constant(2), MultiIndex((1, 1)), eq6_spec)
    assert result.value == Fraction(1, 2)
    assert int(result.details["terms"]) > 0


def test_pairing_engine_refuses_nonzero_mean():
    spec = GaussianSpec(mean=(1, 0), cov=((1, 0), (0, 1)))
    result = PairingEngine().evaluate(Polynomial.constant(2), MultiIndex((1, 1)), spec)
    assert not result.ok
    assert result.details["error_type"] == "NonzeroMeanError"


def test_monte_carlo_engine_reports_std_error(eq6_spec):
    engine = MonteCarloEngine(samples=2_000, seed=3)
    result = engine.evaluate(Polynomial.variable(1, 2), MultiIndex((1, 2)), eq6_spec)
    assert result.ok
    assert not result.exact
    assert result.std_error > 0
    assert result.details == {"samples": "2000", "seed": "3"}


def test_monte_carlo_engine_psd_failure_is_engine_error():
    spec = GaussianSpec(mean=(0, 0), cov=((1, 2), (2, 1)))
    result = MonteCarloEngine(samples=100, seed=1).evaluate(Polynomial.constant(2), MultiIndex((1, 1)), spec)
    assert not result.ok
    assert result.details["error_type"] == "NotPositiveSemidefiniteError"


def test_term_cap_propagates():
    engine = ExpansionEngine(term_cap=2)
    with pytest.raises(TermCapExceededError):
        engine.evaluate(Polynomial.constant(2), MultiIndex((2, 2)), GaussianSpec.standard(2))


def test_agreement_rules():
    checker = AgreementChecker(rel_tol=1e-9, mc_band=5.0)
    exact_a = EngineResult(engine="a", value=Fraction(1, 3), exact=True)
    exact_b = EngineResult(engine="b", value=Fraction(1, 3), exact=True)
    exact_c = EngineResult(engine="c", value=Fraction(1, 3) + Fraction(1, 10 ** 15), exact=True)
    close_float = EngineResult(engine="d", value=1 / 3 + 1e-12)
    far_float = EngineResult(engine="e", value=0.34)
    mc = EngineResult(engine="mc", value=0.335, std_error=0.001)
    assert checker.agree(exact_a, exact_b)
    assert not checker.agree(exact_a, exact_c)
    assert checker.agree(exact_a, close_float)
    assert not checker.agree(exact_a, far_float)
    assert checker.agree(exact_a, mc)
    assert not checker.agree(far_float, EngineResult(engine="mc", value=0.3, std_error=0.001))


def test_agreement_report_with_error():
    checker = AgreementChecker()
    results = [
        EngineResult(engine="song-lee", value=Fraction(1), exact=True),
        EngineResult(engine="pairing", error="只支持零均值"),
    ]
    report = checker.get_agreement_report(results)
    assert report["status"] == VerificationStatus.ERROR.value
    assert report["diagnostics"]
    assert report["results"][0]["value"] == "1"


def test_coordinator_agreement(make_polynomial, make_spec):
    coordinator = VerificationCoordinator()
    g, spec = make_polynomial(3), make_spec(3)
    kinds = [EngineKind.EXPAND, EngineKind.SONG_LEE, EngineKind.STEIN_REDUCE, EngineKind.OPERATOR]
    report = coordinator.run_verification(g, MultiIndex((1, 0, 2)), spec, kinds)
    assert report["status"] == "agree"
    assert len(report["pairs"]) == 6
    assert report["n"] == [1, 0, 2]


def test_coordinator_with_monte_carlo(eq6_spec):
    coordinator = VerificationCoordinator(samples=200_000, seed=11)
    report = coordinator.run_verification(
        Polynomial.variable(1, 2), MultiIndex((1, 2)), eq6_spec, [EngineKind.SONG_LEE, EngineKind.MC]
    )
    assert report["status"] == "agree"


def test_coordinator_induction(make_polynomial, make_spec):
    report = VerificationCoordinator().run_induction(make_polynomial(2), MultiIndex((1, 1)), make_spec(2))
    assert report["status"] == "agree"
    assert [step["m"] for step in report["steps"]] == [1, 2]


def test_parse_engines():
    assert VerificationCoordinator.parse_engines("stein-reduce, operator,stein-reduce") == [
        EngineKind.STEIN_REDUCE,
        EngineKind.OPERATOR,
    ]
    with pytest.raises(InvalidInputError):
        VerificationCoordinator.parse_engines("expand")
    with pytest.raises(InvalidInputError):
        VerificationCoordinator.parse_engines("expand,unknown")


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("GM_TERM_CAP", "500")
    monkeypatch.setenv("GM_MC_WORKERS", "3")
    settings = load_settings()
    assert settings["term_cap"] == 500
    assert settings["mc_workers"] == 3
    assert settings["rel_tol"] == DEFAULT_SETTINGS["rel_tol"]


def test_settings_reject_invalid_environment(monkeypatch):
    monkeypatch.setenv("GM_TERM_CAP", "many")
    with pytest.raises(InvalidInputError):
        load_settings()


def test_coordinator_passes_term_cap_down(monkeypatch):
    monkeypatch.setenv("GM_TERM_CAP", "3")
    coordinator = VerificationCoordinator()
    assert coordinator.settings["term_cap"] == 3
    with pytest.raises(TermCapExceededError):
        coordinator.run_induction(Polynomial.variable(1, 2), MultiIndex((1, 1)), GaussianSpec.standard(2))
    relaxed = VerificationCoordinator(settings={**DEFAULT_SETTINGS, "term_cap": 1_000})
    report = relaxed.run_induction(Polynomial.variable(1, 2), MultiIndex((1, 1)), GaussianSpec.standard(2))
    assert report["status"] == "agree"

import pytest

from passive_qkd.config import ParamRanges, ProtocolConfig
from passive_qkd.keyrate import Scenario
from passive_qkd.validation import CHECKS, apply_inject, parse_inject, run_validation
from passive_qkd.mismatch import MismatchCertificate


@pytest.fixture(scope="module")
def scenario():
    return Scenario(ParamRanges.from_width(0.01))


def test_zero_trials_is_empty_pass(scenario):
    res = run_validation(scenario, 0, 10**5)
    assert res.ok and sum(res.violations.values()) == 0
    assert set(res.violations) == set(CHECKS)


def test_short_run_has_no_violations(scenario):
    res = run_validation(scenario, 10, 10**5, seed=42)
    assert res.ok, res.violations
    assert all(v >= 0 for v in res.min_slack.values())


def test_memory_mode_has_no_violations(scenario):
    sc = scenario.with_(protocol=ProtocolConfig(l_c=5), correlated=True)
    res = run_validation(sc, 5, 10**5, seed=7)
    assert res.ok and res.correlated


def test_doubled_lambda_is_caught(scenario):
    res = run_validation(scenario, 10, 10**5, seed=0, inject=parse_inject("lambda_min*2"))
    assert not res.ok
    assert res.violations["multi_photon_cap"] > 0


def test_same_seed_same_report(scenario):
    a = run_validation(scenario, 3, 10**4, seed=5).as_dict()
    b = run_validation(scenario, 3, 10**4, seed=5).as_dict()
    assert a == b


def test_parse_inject_forms():
    assert parse_inject("lambda_min*2") == {"lambda_min": 2.0}
    assert parse_inject("delta=0, q_z*0.5") == {"delta=": 0.0, "q_z": 0.5}
    assert parse_inject(None) == {}
    with pytest.raises(ValueError):
        parse_inject("n_rounds*2")


def test_apply_inject():
    cert = MismatchCertificate(0.2, 0.3, 0.01, 1e-6, 0.4)
    out = apply_inject(cert, {"lambda_min": 2.0, "delta=": 0.0})
    assert out.lambda_min == 0.8 and out.delta == 0.0 and out.a_lo == 0.2


def test_report_dict_shape(scenario):
    d = run_validation(scenario, 1, 10**4).as_dict()
    assert d["total_violations"] == 0 and d["ok"] is True
    assert set(d["min_slack"]) == set(CHECKS)

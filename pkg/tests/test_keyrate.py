import warnings

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from passive_qkd.config import ChannelConfig, EpsilonBudget, ParamPoint, ParamRanges, ProtocolConfig
from passive_qkd.decoy import Observations
from passive_qkd.keyrate import (
    Scenario,
    binary_entropy,
    correlation_length,
    evaluate_point,
    expected_observations,
    key_length,
    lambda_ec,
    optimize_intensities,
    parse_values,
    scenario_for,
    sweep,
)
from passive_qkd.mismatch import MismatchCertificate

EPS = EpsilonBudget.uniform(1e-12)
PROTO = ProtocolConfig()


@pytest.fixture(scope="module")
def nominal_scenario():
    return Scenario(ParamRanges.from_width(0.01), delta_width=0.01)


def test_binary_entropy_examples():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.75) == 1.0


def test_lambda_ec_examples():
    assert lambda_ec(1e6, 0.0, 1.16) == 0.0
    assert lambda_ec(1e6, 0.5, 1.0) == 1e6
    mpmath.mp.dps = 30
    x = mpmath.mpf("0.02")
    h = -x * mpmath.log(x, 2) - (1 - x) * mpmath.log(1 - x, 2)
    assert lambda_ec(1e6, 0.02, 1.16) == pytest.approx(float(1.16e6 * h), rel=1e-13)
    assert float(h) == pytest.approx(0.14144, abs=1e-5)


def _cert(**kw):
    base = dict(a_lo=9 / 49, a_hi=9 / 49, delta=0.0, q_z=1.4e-6, lambda_min=0.42)
    base.update(kw)
    return MismatchCertificate(**base)


def _obs(scale=1.0):
    return Observations(
        (4e8 * scale, 2e8 * scale, 1e6 * scale),
        (9e9 * scale, 4e9 * scale, 2e6 * scale),
        (5e6 * scale, 2e6 * scale, 5e5 * scale),
        1e8 * scale,
        0.02,
        1e12,
    )


def test_saturated_entropy_gives_zero():
    res = key_length(_obs(), _cert(delta=5.0), PROTO, EPS)
    assert res.status == "saturated_entropy" and res.key_length_bits == 0.0 and res.be >= 0.5


def test_vacuous_rounds_give_zero():
    res = key_length(_obs(1e-6), _cert(), PROTO, EPS)
    assert res.status == "vacuous_b1" and res.key_length_bits == 0.0 and res.b1 <= 0


def test_vacuous_lambda_has_priority():
    res = key_length(_obs(), _cert(lambda_min=0.0), PROTO, EPS)
    assert res.status == "vacuous_lambda_min" and res.key_length_bits == 0.0


def test_perfect_detectors_produce_key():
    sc = Scenario(
        ParamRanges.point_box(ParamPoint.uniform(1.0, 0.0, 0.5)),
        protocol=ProtocolConfig(p_x_alice=0.5),
        channel=ChannelConfig(loss_db=0.0, misalignment_deg=0.0),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, res = optimize_intensities(sc)
    assert res.status == "ok" and res.key_length_bits > 0
    assert res.certificate.delta == 0.0 and res.certificate.q_z == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-8, 10.0), st.floats(0.0, 0.2), st.floats(0.0, 0.6), st.floats(0.0, 1e-4))
def test_clamp_and_status(scale, delta, lam, qz):
    res = key_length(_obs(scale), _cert(delta=delta, lambda_min=lam, q_z=qz), PROTO, EPS)
    assert res.key_length_bits >= 0.0
    if res.status != "ok":
        assert res.key_length_bits == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 10.0), st.floats(0.0, 0.05), st.floats(0.05, 0.6))
def test_correlated_never_exceeds_memoryless(scale, delta, lam):
    o, c = _obs(scale), _cert(delta=delta, lambda_min=lam)
    assert key_length(o, c, PROTO, EPS, correlated=True).key_length_bits <= key_length(o, c, PROTO, EPS).key_length_bits


def test_key_nonincreasing_as_box_widens():
    rates = [
        evaluate_point(Scenario(ParamRanges.from_width(w), grid_step=2e-3)).key_length_bits for w in (0.0, 0.005, 0.01, 0.02)
    ]
    assert all(b <= a for a, b in zip(rates, rates[1:]))


def test_single_point_grid(nominal_scenario):
    mu, res = optimize_intensities(nominal_scenario, [0.6], [0.1])
    assert mu == (0.6, 0.1, 0.0)
    assert res.key_length_bits == evaluate_point(nominal_scenario.with_(protocol=PROTO.with_(mu=mu))).key_length_bits


def test_optimizer_prefers_positive_rate():
    sc = Scenario(
        ParamRanges.point_box(ParamPoint.uniform(1.0, 0.0, 0.5)),
        protocol=ProtocolConfig(p_x_alice=0.5),
        channel=ChannelConfig(misalignment_deg=0.0),
    )
    assert evaluate_point(sc.with_(protocol=sc.protocol.with_(mu=(0.9, 0.1, 0.0)))).key_length_bits == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mu, res = optimize_intensities(sc, [0.3, 0.9], [0.1])
    assert mu[0] == 0.3 and res.key_length_bits > 0


def test_boundary_optimum_warns(nominal_scenario):
    with pytest.warns(UserWarning, match="boundary"):
        mu, _ = optimize_intensities(nominal_scenario)
    assert mu[:2] == (0.3, 0.2)


def test_no_admissible_pair_raises(nominal_scenario):
    with pytest.raises(ValueError):
        optimize_intensities(nominal_scenario, [0.1], [0.2])


def test_delta_axis_ordering(nominal_scenario):
    rows = sweep(nominal_scenario, "delta_width", [0.0, 0.01, 0.05], mu1_grid=[0.4, 0.6], mu2_grid=[0.1, 0.2])
    r = [row.result.rate_per_signal for row in rows]
    assert r[0] >= r[1] > 0 and r[2] == 0.0
    assert [row.axis_value for row in rows] == [0.0, 0.01, 0.05]


def test_loss_axis_monotone(nominal_scenario):
    rows = sweep(nominal_scenario, "loss_db", parse_values("0:40:5"), mu1_grid=[0.5, 0.7], mu2_grid=[0.1, 0.2])
    r = [row.result.rate_per_signal for row in rows]
    assert all(b <= a for a, b in zip(r, r[1:]))
    assert r[-1] == 0.0


def test_lc_axis_uses_memory_formulas(nominal_scenario):
    sc = scenario_for(nominal_scenario, "l_c", 0)
    assert sc.correlated and sc.protocol.l_c == 0


def test_repetition_rate_axis():
    sc = scenario_for(Scenario(ParamRanges.from_width(0.01)), "repetition_rate", 1e10, 100.0, 1e-9)
    assert sc.protocol.n_rounds == 10**12 and sc.protocol.l_c == 10 and sc.correlated
    sc = scenario_for(Scenario(ParamRanges.from_width(0.01)), "repetition_rate", 1e9, 100.0, 1e-9)
    assert sc.protocol.n_rounds == 10**11 and sc.protocol.l_c == 0 and not sc.correlated


def test_correlation_length():
    assert correlation_length(1e9, 1e-9) == 0
    assert correlation_length(1e10, 1e-9) == 10
    assert correlation_length(2.5e9, 1e-9) == 3


def test_unknown_axis():
    with pytest.raises(ValueError):
        scenario_for(Scenario(ParamRanges.from_width(0.01)), "temperature", 1.0)


def test_parse_values():
    assert len(parse_values("0:40:2")) == 21
    assert parse_values("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_values("1, 2,5") == [1.0, 2.0, 5.0]
    assert parse_values([3, 4]) == [3.0, 4.0]
    with pytest.raises(ValueError):
        parse_values("0:1:0")


def test_expected_observations_scale_with_n(nominal_scenario):
    a = expected_observations(nominal_scenario)
    b = expected_observations(nominal_scenario.with_(protocol=PROTO.with_(n_rounds=10**11)))
    assert a.n_k == pytest.approx(10 * b.n_k, rel=1e-12)

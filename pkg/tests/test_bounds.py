import math
from dataclasses import replace

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from passive_qkd.bounds import (
    BoundInputs,
    azuma_sampling_cap,
    b_imp,
    b_k,
    failure_probability,
    gamma0,
    multi_photon_cap,
    phase_error_certificate,
    zero_photon_cap,
)
from passive_qkd.config import EpsilonBudget

mpmath.mp.dps = 40
EPS = EpsilonBudget.uniform(1e-12)


def inputs(**kw):
    base = dict(
        n_rounds=1e12, n_mc=1e3, lambda_min=0.42, q_z=1.4e-6, delta=0.0, a=9 / 49,
        eps=EPS, n_x=1e6, n_k=1e9, n_error=1e4, correlated=False,
    )
    base.update(kw)
    return BoundInputs(**base)


def test_gamma0_oracle():
    assert gamma0(1e12, 1e-12) == pytest.approx(float(mpmath.sqrt(-mpmath.log(mpmath.mpf("1e-12")) / 10**12)), rel=1e-14)
    assert gamma0(1e12, 1e-12) == pytest.approx(5.2565e-6, rel=1e-4)


def test_gamma0_limits():
    assert gamma0(1e6, 1.0) == 0.0
    assert gamma0(4e6, 1e-9) == pytest.approx(gamma0(1e6, 1e-9) / 2, rel=1e-14)


def test_multi_photon_cap_without_multi_clicks():
    lam, eps = 0.42, 1e-12
    assert multi_photon_cap(0.0, lam, eps) == pytest.approx(-math.log(eps) / lam**2, rel=1e-14)


def test_multi_photon_cap_zero_confidence():
    assert multi_photon_cap(250.0, 0.5, 1.0) == pytest.approx(500.0)


def test_multi_photon_cap_oracle():
    value = multi_photon_cap(100.0, 1.0, math.exp(-1))
    assert value == pytest.approx(100 + math.sqrt(401) / 2 + 0.5, rel=1e-14)
    assert value == pytest.approx(110.51, abs=0.01)


def test_multi_photon_cap_vacuous_lambda():
    assert multi_photon_cap(10.0, 0.0, 1e-12) == math.inf


def test_b_k_without_subtractions():
    assert b_k(12345.0, inputs(q_z=0.0, n_mc=0.0, eps=EpsilonBudget.uniform(1.0))) == 12345.0


def test_b_k_correlated_excess():
    free = b_k(1e9, inputs())
    corr = b_k(1e9, inputs(correlated=True))
    assert free - corr == pytest.approx(math.sqrt(-math.log(1e-12) * 1e12), rel=1e-9)


def test_b_k_oracle():
    n, nk, qz, lam, nmc = mpmath.mpf(10) ** 12, mpmath.mpf(10) ** 9, mpmath.mpf("1.4e-6"), mpmath.mpf("0.42"), mpmath.mpf(1000)
    le = -mpmath.log(mpmath.mpf("1e-12"))
    zero = n * (qz + mpmath.sqrt(le / n))
    multi = nmc / lam + mpmath.sqrt(le * (le + 4 * lam * nmc)) / (2 * lam**2) + 2 * le / (4 * lam**2)
    assert b_k(1e9, inputs()) == pytest.approx(float(nk - zero - multi), rel=1e-12)


def test_b_imp_error_free_limit():
    assert b_imp(inputs(n_error=0.0, eps=EpsilonBudget.uniform(1.0)), 1e6) == 0.0


def test_b_imp_delta_term_is_linear():
    b = 1e6
    base = b_imp(inputs(delta=0.0), b)
    one = b_imp(inputs(delta=0.01), b) - base
    two = b_imp(inputs(delta=0.02), b) - base
    assert two == pytest.approx(2 * one, rel=1e-9)


def test_b_imp_oracle():
    a, nerr, nx, bb = mpmath.mpf(9) / 49, mpmath.mpf(10) ** 4, mpmath.mpf(10) ** 6, mpmath.mpf(10) ** 6
    la = -2 * mpmath.log(mpmath.mpf("1e-12") ** 2)
    spread = nx / bb**2 + 1 / bb
    oracle = nerr / (a * bb) + mpmath.sqrt(la / a * spread) + mpmath.sqrt(la * spread)
    value = b_imp(inputs(a=9 / 49, delta=0.0, n_error=1e4, n_x=1e6), 1e6)
    assert value == pytest.approx(float(oracle), rel=1e-12)
    strict = nerr / (a * bb) + mpmath.sqrt(la * spread) / a + mpmath.sqrt(la * spread)
    assert b_imp(inputs(a=9 / 49, n_error=1e4, n_x=1e6), 1e6, strict_scaling=True) == pytest.approx(float(strict), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0.0, 0.1), st.floats(0.0, 1e5), st.floats(1e3, 1e8), st.floats(0.05, 2.0), st.floats(1e3, 1e9),
    st.sampled_from(["delta", "n_error", "n_x", "a", "b"]), st.floats(1.0, 3.0), st.booleans(),
)
def test_b_imp_monotone(delta, nerr, nx, a, bb, which, factor, strict):
    base = inputs(delta=delta, n_error=nerr, n_x=nx, a=a)
    v0 = b_imp(base, bb, strict)
    if which == "b":
        assert b_imp(base, bb * factor, strict) <= v0 * (1 + 1e-12)
    elif which == "a":
        assert b_imp(replace(base, a=a * factor), bb, strict) <= v0 * (1 + 1e-12)
    else:
        bumped = replace(base, **{which: getattr(base, which) * factor + (1e-3 if which == "delta" else 1.0)})
        assert b_imp(bumped, bb, strict) >= v0 * (1 - 1e-12)


def test_b_imp_vacuous_rounds():
    assert b_imp(inputs(), 0.0) == math.inf
    assert phase_error_certificate(inputs(n_k=0.0)).vacuous


def test_azuma_limits():
    assert azuma_sampling_cap(50.0, 1e6, 0.5, 0.0, 1.0, 1.0) == pytest.approx(100.0)
    assert azuma_sampling_cap(50.0, 0.0, 0.5, 0.1, 1e-12, 1e-12) == pytest.approx(100.0)


def test_azuma_oracle():
    dev = mpmath.sqrt(-2 * mpmath.log(mpmath.mpf("1e-24")) * 10**6)
    oracle = 1000 + dev + 1000 + dev
    value = azuma_sampling_cap(1e3, 1e6, 1.0, 1e-3, 1e-12, 1e-12)
    assert value == pytest.approx(float(oracle), rel=1e-13)
    assert float(-2 * mpmath.log(mpmath.mpf("1e-24"))) == pytest.approx(110.524, abs=1e-3)
    assert value == pytest.approx(2000 + 2 * 10512.8, abs=0.5)


def test_zero_photon_cap_examples():
    assert zero_photon_cap(1e6, 0.0, 1.0) == 0.0
    n = 1e12
    assert zero_photon_cap(n, 1.4e-6, 1e-12, True) - zero_photon_cap(n, 1.4e-6, 1e-12) == pytest.approx(
        n * gamma0(n, 1e-12), rel=1e-9
    )
    assert zero_photon_cap(n, 1.4e-6, 1e-12) == pytest.approx(6.657e6, rel=1e-3)


def test_failure_probability_identity():
    e = EpsilonBudget(1e-10, 2e-10, 3e-10, 4e-10, 5e-10, 6e-10, 7e-10)
    plain = 1e-20 + 4e-20 + 9e-20 + 16e-20
    assert failure_probability(e, decoy=False) == pytest.approx(plain, rel=1e-14)
    assert failure_probability(e) == pytest.approx(plain + 9 * 25e-20, rel=1e-14)

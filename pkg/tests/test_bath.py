import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinboson import bath
from spinboson.bath import BathParameters
from spinboson.errors import DegenerateParameterError, InvalidParameterError

REF = BathParameters(1.0, 0.25, 0.5, 2.0)


@pytest.mark.parametrize("kwargs", [
    dict(w0=0, gamma=1, kappa=1, beta=1), dict(w0=1, gamma=-1, kappa=1, beta=1),
    dict(w0=1, gamma=1, kappa=-1, beta=1), dict(w0=1, gamma=1, kappa=1, beta=0),
    dict(w0=1, gamma=1, kappa=1, beta=1, p0=1.5), dict(w0=math.nan, gamma=1, kappa=1, beta=1),
])
def test_parameter_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        BathParameters(**kwargs)


def test_from_temperature():
    assert BathParameters.from_temperature(1, 1, 1, 0).zero_temperature
    assert BathParameters.from_temperature(1, 1, 1, 0.5).beta == 2.0


def test_reorganization_energy_matches_quadrature():
    for p in (REF, BathParameters(2.0, 3.0, 1.5, 1.0)):
        assert bath.reorganization_energy_quadrature(p) == pytest.approx(p.kappa ** 2 / p.w0, rel=1e-10)


def test_spectral_density_shape():
    assert bath.spectral_density(0.0, REF) == 0.0
    peak = bath.spectral_density(REF.w0, REF)
    assert peak == pytest.approx(2 * REF.kappa ** 2 / REF.gamma, rel=1e-14)
    with pytest.raises(InvalidParameterError):
        bath.spectral_density(-1.0, REF)


@pytest.mark.parametrize("p", [REF, BathParameters(1, 2, 1, 0.5), BathParameters(1, 0.999, 3, 20),
                               BathParameters(1, 0.3, 1, math.inf), BathParameters(1, 2, 1, math.inf)])
def test_f0sq_is_equal_time_correlation(p):
    d = bath.derive(p)
    assert d.f0sq == pytest.approx(bath.force_autocorrelation(0.0, p).real, rel=1e-10)
    assert d.st_variance == pytest.approx(d.f0sq / 2)
    assert d.xi == pytest.approx(d.er / (2 * math.sqrt(d.st_variance)))


def test_derived_coefficients_reference():
    d = bath.derive(REF)
    assert d.er == pytest.approx(0.25)
    assert d.delta.real == pytest.approx(math.sqrt(1 - 0.0625))
    assert d.z == pytest.approx(d.delta + 0.25j)
    assert d.c == pytest.approx(4 * 0.25 * 0.25 / 2)
    assert d.beta_tilde == pytest.approx(1 / math.pi)


def test_derive_degenerate_at_critical_damping():
    with pytest.raises(DegenerateParameterError):
        bath.derive(BathParameters(1.0, 1.0, 0.5, 2.0))


@pytest.mark.parametrize("p", [
    REF, BathParameters(1, 2, 1, 2), BathParameters(2, 0.5, 1.5, 0.5),
    BathParameters(1, 0.999, 1, 2), BathParameters(1, 1.0, 1, 2), BathParameters(1, 1 + 3e-7, 1, 2),
])
def test_full_matches_quadrature(p):
    times = [0.05, 0.7, 3.0, 12.0]
    got = bath.g_eval(np.array(times), p)
    want = np.array([bath.g_oracle(t, p) for t in times])
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-9


@pytest.mark.parametrize("p", [BathParameters(1, 0.3, 1, math.inf), BathParameters(1, 2, 1, math.inf),
                               BathParameters(0.5, 0.2, 2, math.inf)])
def test_zero_temperature_matches_quadrature(p):
    times = [0.1, 1.0, 7.0, 20.0]
    got = bath.g_eval(np.array(times), p, bath.ZERO_T)
    want = np.array([bath.g_oracle(t, p) for t in times])
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-9


def test_zero_temperature_critical_matches_quadrature():
    p = BathParameters(1.0, 1.0, 1.0, math.inf)
    times = [0.1, 1.0, 7.0, 20.0]
    got = bath.g_eval(np.array(times), p, bath.ZERO_T_CRITICAL)
    want = np.array([bath.g_oracle(t, p) for t in times])
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-9


def test_model_preconditions():
    with pytest.raises(InvalidParameterError):
        bath.g_eval(1.0, REF, bath.ZERO_T)
    with pytest.raises(InvalidParameterError):
        bath.g_eval(1.0, BathParameters(1, 0.5, 1, math.inf), bath.ZERO_T_CRITICAL)
    with pytest.raises(InvalidParameterError):
        bath.g_eval(-1.0, REF)
    with pytest.raises(InvalidParameterError):
        bath.g_eval(0.0, BathParameters(1, 0.5, 1, math.inf), bath.ZERO_T)


def test_g_vanishes_at_origin_and_without_coupling():
    assert bath.g_eval(0.0, REF) == 0
    p = BathParameters(1, 0.25, 0.0, 2)
    for model in (bath.FULL, bath.F3, bath.SHORT_TIME, bath.MATSUBARA):
        assert np.all(bath.g_eval(np.array([0.5, 3.0]), p, model) == 0)


def test_short_time_expansion_is_second_order():
    def gap(t):
        return abs(bath.g_eval(t, REF) - bath.g_eval(t, REF, bath.SHORT_TIME))
    # The remainder is O(t^3): halving t divides it by about eight.
    assert gap(1e-3) / gap(5e-4) == pytest.approx(8.0, rel=0.01)


def test_small_time_branch_is_continuous():
    d = bath.derive(REF)
    t = bath.small_time_threshold(REF) * 1.001
    closed = bath.g_eval(t, REF)
    taylor = 1j * d.er * t + 0.5 * d.f0sq * t ** 2
    assert abs(closed - taylor) < 1e-8 * abs(taylor)


def test_k_terms_are_real_and_log_term_closed_form():
    times = np.array([0.2, 1.0, 5.0])
    k1, k2, k3 = bath.k_terms(times, REF)
    for arr in (k1, k2, k3):
        assert arr.dtype == float
    d = bath.derive(REF)
    expected = 4 * d.er * REF.gamma / (math.pi * REF.w0 ** 2) * np.log(-np.expm1(-times / d.beta_tilde))
    assert np.allclose(k2, expected, rtol=1e-13)


def test_f3_is_full_minus_k_terms():
    times = np.array([0.3, 2.0])
    diff = bath.g_eval(times, REF) - bath.g_eval(times, REF, bath.F3)
    assert np.allclose(diff, sum(bath.k_terms(times, REF)), rtol=1e-12, atol=0)


@settings(max_examples=12, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.1, 4.0), st.floats(0.05, 3.0), st.floats(0.3, 10.0))
def test_full_agrees_with_matsubara_sum(w0, gamma_ratio, kappa, beta):
    p = BathParameters(w0, gamma_ratio * w0, kappa, beta)
    if bath.relative_detuning(p) < 1e-3:
        return
    times = np.array([0.05, 1.0, 6.0])
    full = bath.g_eval(times, p)
    ref = bath.g_eval(times, p, bath.MATSUBARA)
    assert np.max(np.abs(full - ref) / np.abs(ref)) < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.1, 4.0), st.floats(0.05, 3.0), st.floats(0.3, 10.0))
def test_real_part_non_negative(w0, gamma_ratio, kappa, beta):
    p = BathParameters(w0, gamma_ratio * w0, kappa, beta)
    g = bath.g_eval(np.array([0.1, 1.0, 10.0]), p)
    assert np.all(g.real >= -1e-12)


def test_force_autocorrelation_symmetry():
    c = bath.force_autocorrelation(1.3, REF)
    assert c.imag < 0 or abs(c.imag) < 1e-14
    with pytest.raises(InvalidParameterError):
        bath.force_autocorrelation(-1.0, REF)


def test_model_parse():
    assert bath.CorrelationModel.parse("F3b") == bath.F3B
    with pytest.raises(InvalidParameterError):
        bath.CorrelationModel.parse("nope")

"""Acceptance criteria AC-1 .. AC-9.

Each test records a PASS/FAIL line that is printed in the pytest summary; run
``pytest tests/test_acceptance.py`` (or this file directly) to see them.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from spinboson import bath, dynamics, mapper, oracles
from spinboson.bath import BathParameters
from spinboson.dynamics import KernelSpec

LOG_TIMES = np.logspace(-2, math.log10(20.0), 50)
AC1_SETS = [BathParameters(w0, g * w0, k * w0, b) for w0, g, k, b in oracles.G_CASES]
S_POINTS = (0.5, 1.0, 2.0, 1 + 1j, 2 + 2j)
REF = BathParameters(1.0, 0.25, 0.5, 2.0)


def _rel(got, want):
    return float(np.max(np.abs(got - want) / np.abs(want)))


def test_ac1_full_g_against_quadrature(record):
    start = time.perf_counter()
    res = oracles.compare_g(tol=1e-8)
    elapsed = time.perf_counter() - start
    ok = res.passed and res.points == 300 and elapsed < 120
    record("AC-1", ok, f"max rel err {res.max_error:.2e} over {res.points} points "
                       f"(tol 1e-8), {elapsed:.1f} s (limit 120 s)")
    assert ok


def test_ac2_full_against_matsubara(record):
    worst = max(_rel(bath.g_eval(LOG_TIMES, p), bath.g_eval(LOG_TIMES, p, bath.MATSUBARA))
                for p in AC1_SETS)
    ok = worst <= 1e-8
    record("AC-2", ok, f"max rel err {worst:.2e} on the AC-1 grid (tol 1e-8)")
    assert ok


def test_ac3_zero_temperature_forms(record):
    times = np.logspace(-1, math.log10(20.0), 50)
    cases = [(BathParameters(1.0, g, k, math.inf), bath.ZERO_T)
             for g in (0.25, 2.0) for k in (0.1, 10.0)]
    cases += [(BathParameters(1.0, 1.0, k, math.inf), bath.ZERO_T_CRITICAL) for k in (0.1, 10.0)]
    worst = 0.0
    for p, model in cases:
        want = np.array([bath.g_oracle(t, p) for t in times])
        worst = max(worst, _rel(bath.g_eval(times, p, model), want))
    ok = worst <= 1e-7
    record("AC-3", ok, f"max rel err {worst:.2e} for ZeroT and ZeroTCritical on [0.1, 20] "
                       f"(tol 1e-7)")
    assert ok


def test_ac4_undamped_cosine(record):
    p = BathParameters(1.0, 0.5, 0.0, 1.0)
    trace = dynamics.solve_volterra(KernelSpec(bath.FULL), p, 4 * math.pi, 1e-3)
    err = float(np.max(np.abs(trace.values - np.cos(trace.times))))
    ok = err < 1e-6
    record("AC-4", ok, f"max |P - cos t| = {err:.2e} on [0, 4 pi] (tol 1e-6)")
    assert ok


def _kernel_transform(model, p, s, t_max=80.0):
    return dynamics.laplace_of_function(
        lambda t: dynamics.niba_kernel(t, KernelSpec(model, p.v), p), s, t_max)


def test_ac5_laplace_consistency(record):
    lower, upper = [], []
    for s in S_POINTS:
        numeric = _kernel_transform(bath.F3, REF, s)
        lower.append(abs(dynamics.laplace_k_f3(s, REF).value - numeric))
        upper.append(abs(dynamics.laplace_k_f3(s, REF, convention="upper").value - numeric))
    trace = dynamics.solve_volterra(KernelSpec(bath.SHORT_TIME), REF, 80.0, 0.005)
    p_st = [abs(dynamics.numerical_laplace(trace.times, trace.values, s)
                - dynamics.laplace_p_st(s, REF)) for s in S_POINTS]
    ok = max(lower) < 1e-4 and min(upper) > 1e-4 and max(p_st) < 1e-4
    record("AC-5", ok, f"K_F3 lower convention max err {max(lower):.1e}, upper convention "
                       f"min err {min(upper):.1e} (rejected), P_st max err {max(p_st):.1e} "
                       f"(tol 1e-4)")
    assert ok


def test_ac6_markov_closed_form(record):
    p = BathParameters(0.1, 1.0, 10.0, 1.0)
    t_f, _ = mapper.choose_tf(p)
    times = np.linspace(0.0, t_f, 2001)
    sol = integrate.solve_ivp(lambda t, y: -dynamics.markov_kernel_integral(t, p) * y,
                              (0.0, t_f), [p.p0], t_eval=times, method="DOP853",
                              rtol=1e-12, atol=1e-14)
    err = float(np.max(np.abs(sol.y[0] - dynamics.markov_population(times, p))))
    ok = sol.success and err < 1e-8
    record("AC-6", ok, f"max |closed form - ODE| = {err:.2e} on [0, {t_f:g}] (tol 1e-8)")
    assert ok


def _order(p, t_f=10.0):
    """Observed order from successive differences at h, h/2, h/4, h/8.

    h is the default step, snapped so that every step divides t_f.
    """
    k = KernelSpec(bath.FULL)
    n = max(800, math.ceil(t_f / dynamics.default_step(p)))
    traces = [dynamics.solve_volterra(k, p, t_f, t_f / (n * 2 ** i)) for i in range(4)]
    coarse = [tr.values[::2 ** i] for i, tr in enumerate(traces)]
    diffs = [np.max(np.abs(coarse[i] - coarse[i + 1])) for i in range(3)]
    return float(-np.polyfit(np.arange(3) * math.log(2), np.log(diffs), 1)[0])


@pytest.mark.slow
def test_ac7_solver_order(record):
    slopes = [_order(p) for p in AC1_SETS]
    ok = all(abs(s - 2.0) <= 0.2 for s in slopes)
    record("AC-7", ok, "convergence exponents " + ", ".join(f"{s:.2f}" for s in slopes)
                       + " (target 2 +/- 0.2)")
    assert ok


@pytest.fixture(scope="module")
def validity_map():
    grid = mapper.SweepGrid.logspaced(0.1, 8)
    start = time.perf_counter()
    vmap = mapper.sweep(grid)
    return vmap, time.perf_counter() - start


@pytest.mark.slow
def test_ac8_validity_map_structure(record, validity_map):
    vmap, elapsed = validity_map
    grid = vmap.grid
    labels = vmap.labels()
    nb = grid.shape[2]
    corner = labels[:, -1, :]
    corner_ok = bool(np.all(np.isin(corner, ("Markov", "ShortTime"))))
    markov_kappa = [grid.kappa_axis[j] for (i, j, m), _ in grid.cells()
                    if labels[i, j, m] == "Markov"]
    markov_ok = all(k > grid.w0 for k in markov_kappa)
    full_by_beta = [int(np.sum(labels[:, :, m] == "FullRequired")) for m in range(nb)]
    # all FullRequired cells in the colder half of the beta axis, the coldest slice included
    full_ok = full_by_beta[-1] > 0 and sum(full_by_beta[:nb // 2]) == 0
    errors = int(np.sum(labels == mapper.ERROR_LABEL))
    ok = corner_ok and markov_ok and full_ok and errors == 0 and elapsed < 1800
    record("AC-8", ok, f"(i) kappa = {grid.kappa_axis[-1]:g} column Markov/ShortTime: {corner_ok}; "
                       f"(ii) Markov only at kappa > w0: {markov_ok}; "
                       f"(iii) FullRequired per beta {full_by_beta}; "
                       f"{errors} error cells; {elapsed:.0f} s (limit 1800 s)")
    assert ok


def test_ac9_specfun_oracles(record):
    results = oracles.run_suite(include_g=False)
    worst = max(r.max_error for r in results)
    ok = all(r.passed and r.tolerance <= 1e-10 and r.points >= 50 for r in results)
    record("AC-9", ok, f"{len(results)} suites, worst rel err {worst:.1e} (tol 1e-10)")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))

"""Slow, independent reference implementations and the verification suite.

Each special function in :mod:`spinboson.specfun` has a second implementation
here built from a different algorithm (high-precision series, recurrences or
contour quadrature in mpmath).  :func:`run_suite` compares the two on fixed
grids of at least fifty points; the ``verify`` command prints the result.
"""

import math
import warnings
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from . import bath, specfun

DPS = 40
TOL = 1e-10


def _c(x):
    return complex(x)


def digamma(z):
    """Recurrence up to Re z >= 25, then the Stirling-type asymptotic series."""
    with mp.workdps(DPS):
        z = mp.mpc(z)
        shift = mp.mpf(0)
        while mp.re(z) < 25:
            shift += 1 / z
            z += 1
        inv2 = 1 / (z * z)
        acc = mp.log(z) - 1 / (2 * z)
        power = inv2
        for k in range(1, 30):
            acc -= mp.bernoulli(2 * k) / (2 * k) * power
            power *= inv2
        return _c(acc - shift)


def harmonic(z):
    return digamma(complex(z) + 1) + specfun.EULER_GAMMA


def exponential_integral(z):
    """Ei(z) = gamma + log z + sum z^k / (k k!) in extended precision."""
    with mp.workdps(DPS + 20):
        z = mp.mpc(z)
        term = mp.mpf(1)
        total = mp.mpf(0)
        k = 0
        while True:
            k += 1
            term *= z / k
            inc = term / k
            total += inc
            if abs(inc) < mp.mpf(10) ** (-DPS) * max(abs(total), 1):
                break
        return _c(mp.euler + mp.log(z) + total)


def exp1(z):
    """E1(z) = -gamma - log z - sum (-z)^k / (k k!)."""
    with mp.workdps(DPS + 20):
        z = mp.mpc(z)
        term = mp.mpf(1)
        total = mp.mpf(0)
        k = 0
        while True:
            k += 1
            term *= -z / k
            inc = term / k
            total += inc
            if abs(inc) < mp.mpf(10) ** (-DPS) * max(abs(total), 1):
                break
        return _c(-mp.euler - mp.log(z) - total)


def incomplete_gamma_upper(s, x):
    """Quadrature of t^(s-1) e^(-t) along the horizontal ray from x to +infinity."""
    with mp.workdps(30):
        s, x = mp.mpc(s), mp.mpc(x)
        f = lambda r: mp.exp((s - 1) * mp.log(x + r) - (x + r))
        cuts = [0, 1, 5, 20, 60, mp.inf]
        return _c(mp.quad(f, cuts))


def lower_gamma_scaled(s, x):
    """x^-s gamma(s, x) as sum_k (-x)^k / (k! (s + k))."""
    with mp.workdps(DPS + 20):
        s, x = mp.mpc(s), mp.mpc(x)
        term = mp.mpf(1)
        total = 1 / s
        k = 0
        while True:
            k += 1
            term *= -x / k
            inc = term / (s + k)
            total += inc
            if abs(inc) < mp.mpf(10) ** (-DPS) * abs(total) and k > abs(x):
                break
        return _c(total)


def incomplete_beta_two_arg(x, a):
    """Quadrature of u^(a-1) / (1 - u) on [0, x].

    The singular u^(a-1) piece is integrated exactly, leaving u^a / (1 - u).
    """
    with mp.workdps(30):
        a, x = mp.mpc(a), mp.mpf(x)
        f = lambda u: mp.exp(a * mp.log(u)) / (1 - u)
        return _c(mp.exp(a * mp.log(x)) / a + mp.quad(f, [0, x / 2, x]))


def lerch_sum(u, alpha):
    with mp.workdps(DPS):
        x = mp.exp(-mp.mpf(u))
        return _c(x * mp.lerchphi(x, 1, 1 + mp.mpc(alpha)))


def faddeeva(z):
    """w(z) from (i/pi) int e^{-t^2} / (z - t) dt, reflected into Im z > 0."""
    z = complex(z)
    with mp.workdps(30):
        if z.imag == 0:
            x = mp.mpf(z.real)
            return _c(mp.exp(-x * x) + 2j / mp.sqrt(mp.pi) * dawson_mp(x))
        if z.imag < 0:
            zm = mp.mpc(z)
            return _c(2 * mp.exp(-zm * zm) - mp.mpc(faddeeva(-z)))
        zm = mp.mpc(z)
        f = lambda t: mp.exp(-t * t) / (zm - t)
        pts = sorted({-mp.inf, -8, mp.re(zm) - 2, mp.re(zm), mp.re(zm) + 2, 8, mp.inf})
        return _c(1j / mp.pi * mp.quad(f, pts))


def erfi(z):
    """Taylor series 2/sqrt(pi) sum z^(2n+1) / (n! (2n+1))."""
    with mp.workdps(DPS + 20):
        z = mp.mpc(z)
        z2 = z * z
        term = z
        total = z
        n = 0
        while True:
            n += 1
            term *= z2 / n
            inc = term / (2 * n + 1)
            total += inc
            if abs(inc) < mp.mpf(10) ** (-DPS) * max(abs(total), mp.mpf(10) ** -300):
                break
        return _c(2 / mp.sqrt(mp.pi) * total)


def dawson_mp(x):
    x = mp.mpf(x)
    return mp.quad(lambda t: mp.exp(t * t - x * x), [0, x / 2, x])


def dawson(x):
    """exp(-x^2) int_0^x exp(t^2) dt by quadrature of exp(t^2 - x^2)."""
    with mp.workdps(30):
        return float(dawson_mp(x))


# --- grids -----------------------------------------------------------------

def _mesh(xs, ys):
    return [complex(x, y) for x in xs for y in ys]


GRIDS = {
    "complex_digamma": _mesh([-3.5, -1.3, -0.5, 0.2, 1.0, 2.5, 7.0, 15.0],
                             [-10.0, -2.0, -0.3, 0.3, 1.0, 5.0, 20.0]),
    "complex_harmonic": _mesh([-2.5, -0.7, 0.0, 0.4, 1.0, 3.0, 9.0, 40.0],
                              [-6.0, -1.0, -0.2, 0.5, 2.0, 8.0, 30.0]),
    "exponential_integral": [r * complex(math.cos(a), math.sin(a))
                             for r in (0.05, 0.5, 1.0, 3.0, 8.0, 20.0)
                             for a in np.linspace(-0.95 * math.pi, 0.95 * math.pi, 9)],
    "exp1": [r * complex(math.cos(a), math.sin(a))
             for r in (0.05, 0.5, 1.0, 3.0, 8.0, 20.0)
             for a in np.linspace(-0.95 * math.pi, 0.95 * math.pi, 9)],
    "incomplete_gamma_upper": [(s, x) for s in (0.5 + 0.5j, 1.0, 2.5 - 1j, -0.5 + 2j, 0.3 - 0.7j, 4.0)
                               for x in (0.2, 1.5, 4.0, 35.0, 0.5 + 2j, -0.3 + 0.1j, -2 - 3j,
                                         3 - 4j, -1 + 0.5j)],
    "lower_gamma_scaled": [(s, x) for s in (0.5 + 0.5j, 1.0, 2.5 - 1j, 7.0 + 3j, 0.3 - 0.7j, 20 + 10j)
                           for x in (0.2, 1.5, 4.0, 12.0, 0.5 + 2j, -0.3 + 0.1j, -2 - 3j,
                                     -6 + 4j, 3 - 4j)],
    "incomplete_beta_two_arg": [(x, a) for x in (0.01, 0.1, 0.3, 0.5, 0.8, 0.97)
                                for a in (1.0, 0.3, 2.5, 1 + 1j, 0.5 - 2j, 3 + 7j, 10.0, 0.05 + 0.5j,
                                          6 - 1j)],
    "lerch_sum": [(u, a) for u in (1e-3, 0.05, 0.7, 4.0)
                  for a in (0.0, 0.5, 3.0 + 2j, -0.5 + 1j, 20j, -20j, 150 + 40j, -37.3 + 0.5j,
                            -1.5 - 3j, 2.2, 70j, -150.2 + 0.1j, 0.3 - 0.3j, 12.0)],
    "faddeeva": _mesh([-6.0, -2.5, -1.0, -0.2, 0.0, 0.7, 1.5, 4.0],
                      [-1.5, -0.4, 0.0, 0.3, 1.0, 2.0, 6.0]),
    "erfi": _mesh([-3.5, -1.4, -0.6, 0.0, 0.3, 0.7, 2.0, 3.9],
                  [-3.0, -1.0, -0.3, 0.25, 1.2, 2.5, 4.0]),
    "dawson": [float(x) for x in np.concatenate([np.linspace(-30, 30, 41),
                                                 np.linspace(-2.2, 2.7, 19)])],
}

PAIRS = {
    "complex_digamma": (specfun.complex_digamma, digamma),
    "complex_harmonic": (specfun.complex_harmonic, harmonic),
    "exponential_integral": (specfun.exponential_integral, exponential_integral),
    "exp1": (lambda z: complex(specfun.exp1(z)), exp1),
    "incomplete_gamma_upper": (specfun.incomplete_gamma_upper, incomplete_gamma_upper),
    "lower_gamma_scaled": (specfun.lower_gamma_scaled, lower_gamma_scaled),
    "incomplete_beta_two_arg": (specfun.incomplete_beta_two_arg, incomplete_beta_two_arg),
    "lerch_sum": (lambda u, a: complex(specfun.lerch_sum(u, a)[0]), lerch_sum),
    "faddeeva": (specfun.faddeeva, faddeeva),
    "erfi": (specfun.erfi, erfi),
    "dawson": (specfun.dawson, dawson),
}


@dataclass
class SuiteResult:
    name: str
    points: int
    max_error: float
    tolerance: float

    @property
    def passed(self):
        return self.max_error <= self.tolerance


def relative_difference(got, want):
    return abs(got - want) / max(abs(want), 1e-300)


def compare(name, tol=TOL):
    impl, oracle = PAIRS[name]
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", specfun.BranchCutWarning)
        for point in GRIDS[name]:
            args = point if isinstance(point, tuple) else (point,)
            worst = max(worst, relative_difference(impl(*args), oracle(*args)))
    return SuiteResult(name, len(GRIDS[name]), worst, tol)


G_CASES = (
    (1.0, 0.25, 0.1, 0.5), (1.0, 2.0, 10.0, 20.0), (1.0, 0.25, 10.0, 20.0),
    (1.0, 2.0, 0.1, 0.5), (1.0, 0.25, 0.1, 20.0), (1.0, 2.0, 10.0, 0.5),
)


def compare_g(cases=G_CASES, times=None, tol=1e-8):
    """Full closed-form G(t) against frequency quadrature, worst relative error."""
    times = np.logspace(-2, math.log10(20), 50) if times is None else times
    worst = 0.0
    for w0, gamma, kappa, beta in cases:
        p = bath.BathParameters(w0, gamma * w0, kappa * w0, beta)
        got = bath.g_eval(times, p)
        want = np.array([bath.g_oracle(t, p) for t in times])
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-300))))
    return SuiteResult("g_full_vs_quadrature", len(cases) * len(times), worst, tol)


def run_suite(include_g=True):
    results = [compare(name) for name in PAIRS]
    if include_g:
        results.append(compare_g())
    return results


# --- an independent Volterra reference ---------------------------------------

def volterra_reference(kernel, p0, t_f, h):
    """Trapezoid solution of P = p0 - int K1(t-s) P(s) ds with Richardson extrapolation.

    ``kernel`` is a vectorized K(t).  K1 is accumulated with Simpson's rule on
    a grid four times finer than the step.  Returns (times, values) on the
    grid of step ``h``.
    """
    def trapezoid_solution(step):
        n = int(round(t_f / step))
        fine = np.linspace(0.0, n * step, 4 * n + 1)
        kv = kernel(fine)
        # Simpson on each pair of fine intervals gives K1 at every coarse node.
        pairs = (kv[0:-1:2] + 4 * kv[1::2] + kv[2::2]) * (fine[1] - fine[0]) / 3
        k1 = np.concatenate([[0.0], np.cumsum(pairs)])[::2]
        vals = np.zeros(n + 1)
        vals[0] = p0
        for i in range(1, n + 1):
            acc = 0.5 * k1[i] * vals[0] + np.dot(k1[i - 1:0:-1], vals[1:i])
            vals[i] = (p0 - step * acc) / (1 + 0.5 * step * k1[0])
        return vals

    coarse = trapezoid_solution(h)
    fine = trapezoid_solution(h / 2)[::2]
    times = np.arange(coarse.size) * h
    return times, (4 * fine - coarse) / 3

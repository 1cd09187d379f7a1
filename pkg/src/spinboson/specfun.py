"""Complex special functions used by the bath correlation closed forms.

Everything here works on Python/NumPy complex scalars; the functions that the
time-domain evaluators call in bulk (``lerch_sum``, ``faddeeva``, ``erfi``)
also accept arrays.  Multivalued functions use principal branches.  Arguments
within ``BRANCH_TOL`` of a cut emit :class:`BranchCutWarning`, and results that
would overflow raise :class:`NumericalOverflowError` instead of returning inf.
"""

import math
import warnings

import numpy as np
from scipy import special

from .errors import (
    BranchCutWarning,
    ConvergenceError,
    DomainError,
    NumericalOverflowError,
    PoleError,
)

EULER_GAMMA = float(np.euler_gamma)
POLE_TOL = 1e-12
BRANCH_TOL = 1e-12

# Bernoulli numbers B_2, B_4, B_6, B_8 for the Euler-Maclaurin tail.
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)


def _near_nonpositive_integer(z):
    z = complex(z)
    if z.real > 0.5:
        return False
    return abs(z - round(z.real)) < POLE_TOL


def _warn_cut(x, what):
    x = complex(x)
    if x.real < 0 and abs(x.imag) <= BRANCH_TOL * max(1.0, abs(x)):
        warnings.warn(f"{what}: argument {x!r} lies on the negative real axis; "
                      "principal branch (upper side) used", BranchCutWarning, stacklevel=3)


def _check_finite(value, what):
    if not np.all(np.isfinite(value)):
        raise NumericalOverflowError(f"{what} overflows double precision")
    return value


def complex_digamma(z):
    """Digamma function psi(z) for complex z."""
    if _near_nonpositive_integer(z):
        raise PoleError(f"digamma has a pole at {z!r}")
    return complex(special.psi(complex(z)))


def complex_harmonic(z):
    """Harmonic number H(z) = psi(1 + z) + Euler's gamma."""
    if _near_nonpositive_integer(1 + complex(z)):
        raise PoleError(f"harmonic number has a pole at {z!r}")
    return complex(special.psi(1 + complex(z))) + EULER_GAMMA


def exponential_integral(z):
    """Ei(z) on the principal branch (cut along the negative real axis)."""
    z = complex(z)
    if z == 0:
        raise DomainError("Ei is singular at z = 0")
    _warn_cut(z, "Ei")
    return _check_finite(complex(special.expi(z)), "Ei")


def exp1(z):
    """E1(z) on the principal branch; the cut is approached from above."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("E1 is singular at z = 0")
    return _check_finite(special.exp1(z), "E1")


def exp1_continued(z):
    """E1 continued across the negative real axis from the upper half plane.

    Below the negative real axis this is the principal value minus 2*pi*i, i.e.
    the branch reached by crossing the cut upwards-to-downwards continuously.
    Used where an integration contour starts below the cut and runs up.
    """
    z = np.asarray(z, dtype=complex)
    value = exp1(z)
    below = (z.real < 0) & (z.imag < 0)
    return np.where(below, value - 2j * np.pi, value)


def _lower_gamma_scaled(s, x, max_terms=4000):
    """x**(-s) * gamma(s, x), which is entire in x."""
    s = complex(s)
    x = complex(x)
    if x.real >= 0:
        # e^{-x} sum x^k / (s (s+1) ... (s+k)); positive terms for x > 0.
        term = 1.0 / s
        total = term
        for k in range(1, max_terms):
            term *= x / (s + k)
            total += term
            if abs(term) < 1e-17 * abs(total):
                return total * np.exp(-x)
    else:
        term = 1.0 + 0j
        total = 1.0 / s
        for k in range(1, max_terms):
            term *= -x / k
            inc = term / (s + k)
            total += inc
            if abs(inc) < 1e-17 * abs(total):
                return total
    raise ConvergenceError(f"lower incomplete gamma series did not converge at s={s}, x={x}",
                           achieved=abs(term))


def _upper_gamma_cf(s, x, max_iter=2000):
    # Modified Lentz evaluation of the Legendre continued fraction.
    tiny = 1e-300
    b = x + 1 - s
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - s)
        b += 2
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < 1e-16:
            return np.exp(-x + s * np.log(x)) * h
    raise ConvergenceError(f"upper incomplete gamma continued fraction failed at s={s}, x={x}")


def incomplete_gamma_lower(s, x):
    """Lower incomplete gamma gamma(s, x) = int_0^x t^(s-1) e^(-t) dt (principal x**s)."""
    s = complex(s)
    x = complex(x)
    if _near_nonpositive_integer(s):
        raise PoleError(f"lower incomplete gamma has a pole at s={s}")
    if x == 0:
        return 0j
    _warn_cut(x, "incomplete gamma")
    return _check_finite(np.exp(s * np.log(x)) * _lower_gamma_scaled(s, x), "gamma(s, x)")


def lower_gamma_scaled(s, x):
    """x**(-s) gamma(s, x) = sum_k (-x)^k / (k! (s + k)); branch free."""
    if _near_nonpositive_integer(s):
        raise PoleError(f"lower incomplete gamma has a pole at s={s}")
    return _check_finite(_lower_gamma_scaled(s, x), "x^-s gamma(s, x)")


def incomplete_gamma_upper(s, x):
    """Upper incomplete gamma Gamma(s, x) = int_x^inf t^(s-1) e^(-t) dt."""
    s = complex(s)
    x = complex(x)
    if x == 0:
        if s.real <= 0:
            raise PoleError("Gamma(s, 0) diverges for Re(s) <= 0")
        return complex(special.gamma(s))
    _warn_cut(x, "incomplete gamma")
    if abs(x) > 30 and x.real > 0:
        return _check_finite(complex(_upper_gamma_cf(s, x)), "Gamma(s, x)")
    if _near_nonpositive_integer(s):
        n = -int(round(s.real))
        acc = 0j
        for k in range(n):
            acc += (-1) ** k * math.factorial(k) / x ** (k + 1)
        e1 = complex(special.exp1(x))
        return (-1) ** n / math.factorial(n) * (e1 - np.exp(-x) * acc)
    value = complex(special.gamma(s)) - incomplete_gamma_lower(s, x)
    return _check_finite(value, "Gamma(s, x)")


def _euler_maclaurin_tail(u, n, alpha):
    """sum_{m>n} e^{-u m} / (m + alpha) by Euler-Maclaurin from the integral."""
    w = n + alpha
    total = np.exp(u * alpha) * special.exp1(u * w)
    decay = np.exp(-u * n)
    total = total - 0.5 * decay / w
    for k, b2k in enumerate(_BERNOULLI, start=1):
        order = 2 * k - 1
        deriv = 0j
        for i in range(order + 1):
            deriv = deriv + (math.comb(order, i) * (-u) ** (order - i)
                             * (-1) ** i * math.factorial(i) / w ** (i + 1))
        total = total - b2k / math.factorial(2 * k) * decay * deriv
    return total


def lerch_sum(u, alpha, chunk=2_000_000):
    """S(u, alpha) = sum_{m>=1} exp(-u m) / (m + alpha) for u > 0.

    Terms up to ``m ~ |alpha| + 30`` are summed explicitly; beyond that the
    summand is smooth on the unit scale and the remainder comes from an
    Euler-Maclaurin expansion around the exact tail integral.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    alpha = complex(alpha)
    if np.any(u <= 0):
        raise DomainError("lerch_sum requires u > 0")
    if _near_nonpositive_integer(1 + alpha) or any(
            abs(alpha + m) < POLE_TOL for m in range(1, int(abs(alpha)) + 2)):
        raise PoleError(f"lerch_sum has a pole at alpha={alpha}")
    n_lim = int(math.ceil(abs(alpha))) + 30
    need = np.minimum(n_lim, np.ceil(40.0 / u)).astype(np.int64)
    order = np.argsort(need, kind="stable")
    out = np.empty(u.shape, dtype=complex)
    start = 0
    while start < order.size:
        width = int(need[order[start]])
        stop = start + 1
        while stop < order.size:
            cand = int(need[order[stop]])
            if (stop - start + 1) * cand > chunk:
                break
            width = cand
            stop += 1
        idx = order[start:stop]
        m = np.arange(1, width + 1)
        terms = np.exp(-np.outer(u[idx], m)) / (m + alpha)
        out[idx] = terms.sum(axis=1)
        start = stop
    tail = (need == n_lim) & (u * n_lim < 40.0)
    if np.any(tail):
        out[tail] += _euler_maclaurin_tail(u[tail], n_lim, alpha)
    return out


def incomplete_beta_two_arg(x, a):
    """B(x, a) = int_0^x u^(a-1) / (1 - u) du = sum_{m>=0} x^(a+m) / (a+m)."""
    if not 0.0 < x < 1.0:
        raise DomainError("incomplete beta requires 0 < x < 1")
    a = complex(a)
    if a.real <= 0:
        raise ConvergenceError("incomplete beta integral diverges for Re(a) <= 0")
    u = -math.log(x)
    value = np.exp(a * math.log(x)) * (1.0 / a + lerch_sum(u, a)[0])
    return complex(value)


def faddeeva(z):
    """w(z) = exp(-z^2) erfc(-i z)."""
    value = special.wofz(np.asarray(z, dtype=complex))
    _check_finite(value, "faddeeva")
    return complex(value) if np.ndim(value) == 0 else value


def erfi(z):
    """Imaginary error function erfi(z) = -i erf(i z)."""
    value = special.erfi(np.asarray(z, dtype=complex))
    _check_finite(value, "erfi")
    return complex(value) if np.ndim(value) == 0 else value


def dawson(x):
    """Dawson integral D(x) = exp(-x^2) int_0^x exp(t^2) dt for real x."""
    value = special.dawsn(np.asarray(x, dtype=float))
    return float(value) if np.ndim(value) == 0 else value

"""Peaked (damped-oscillator) spectral density and its bath correlation function G(t).

Units: hbar = k_B = 1 and every frequency is measured in units of the
tunnelling splitting V.  ``beta = math.inf`` denotes zero temperature.

G(t) is the twice time-integrated force autocorrelation plus ``i E_r t``.  With
``z = Delta + i gamma`` and ``z~ = Delta - i gamma`` (``Delta = sqrt(w0^2 - gamma^2)``,
continued to ``i sqrt(gamma^2 - w0^2)`` in the overdamped regime) the exact
finite-temperature result is

    G(t) = c t + a (1 - e^{i z t}) + b (1 - e^{-i z~ t}) + K1 + K2 + K3,

where the K terms collect the Matsubara poles (harmonic numbers, a logarithm and
a Lerch-type series).  Writing everything with ``z~`` rather than ``conj(z)``
keeps the expressions analytic across the critical-damping point.
"""

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import specfun
from .errors import (
    ConvergenceError,
    DegenerateParameterError,
    InvalidParameterError,
    PoleError,
)

#: |gamma - w0| / w0 below which the finite-temperature closed forms are singular.
DEGENERATE_TOL = 1e-10
#: |gamma - w0| / w0 below which evaluators interpolate across the critical point.
CRITICAL_ROUTE_TOL = 1e-6
# Offset of the interpolation nodes in Delta^2 / w0^2.
_CRITICAL_OFFSET = 1e-5
# Below t = SMALL_T_FACTOR / max(w0, gamma, 1/beta~) G is replaced by its Taylor series.
SMALL_T_FACTOR = 1e-5


@dataclass(frozen=True)
class BathParameters:
    """Physical inputs, all in units of the tunnelling splitting ``v``."""

    w0: float
    gamma: float
    kappa: float
    beta: float
    v: float = 1.0
    p0: float = 1.0

    def __post_init__(self):
        for name in ("w0", "gamma", "kappa", "beta", "v", "p0"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise InvalidParameterError(f"{name} must be a real number, got {value!r}")
            object.__setattr__(self, name, float(value))
            if math.isnan(getattr(self, name)):
                raise InvalidParameterError(f"{name} is NaN")
        if not (self.w0 > 0 and math.isfinite(self.w0)):
            raise InvalidParameterError("w0 must be positive and finite")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise InvalidParameterError("gamma must be positive and finite")
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise InvalidParameterError("kappa must be non-negative and finite")
        if not self.beta > 0:
            raise InvalidParameterError("beta must be positive (math.inf for T = 0)")
        if not (self.v >= 0 and math.isfinite(self.v)):
            raise InvalidParameterError("v must be non-negative and finite")
        if abs(self.p0) > 1:
            raise InvalidParameterError("|p0| must not exceed 1")

    @classmethod
    def from_temperature(cls, w0, gamma, kappa, temperature, v=1.0, p0=1.0):
        beta = math.inf if temperature == 0 else 1.0 / temperature
        return cls(w0, gamma, kappa, beta, v, p0)

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in ("w0", "gamma", "kappa", "beta", "v", "p0")}
        values.update(changes)
        return BathParameters(**values)


@dataclass(frozen=True)
class DerivedCoefficients:
    """Per-parameter-set constants of the closed forms.

    ``f0sq`` is the equal-time force autocorrelation <F(0)^2>; the short-time
    expansion of G is ``st_variance * t^2 + i E_r t`` with ``st_variance = f0sq / 2``
    and ``xi = E_r / (2 sqrt(st_variance))``.
    """

    delta: complex
    theta: complex
    z: complex
    z_tilde: complex
    er: float
    a: complex
    b: complex
    c: float
    f0sq: float
    st_variance: float
    xi: float
    beta_tilde: float


class Variant(enum.Enum):
    FULL = "full"
    F3 = "f3"
    F3B = "f3b"
    SHORT_TIME = "st"
    ZERO_T = "zerot"
    ZERO_T_CRITICAL = "zerot-critical"
    MATSUBARA = "matsubara"


@dataclass(frozen=True)
class CorrelationModel:
    variant: Variant
    matsubara_tolerance: float = 1e-12

    @classmethod
    def parse(cls, name, matsubara_tolerance=1e-12):
        try:
            return cls(Variant(name.lower()), matsubara_tolerance)
        except ValueError:
            choices = ", ".join(v.value for v in Variant)
            raise InvalidParameterError(f"unknown model {name!r}; choose from {choices}") from None

    @property
    def name(self):
        return self.variant.value


FULL = CorrelationModel(Variant.FULL)
F3 = CorrelationModel(Variant.F3)
F3B = CorrelationModel(Variant.F3B)
SHORT_TIME = CorrelationModel(Variant.SHORT_TIME)
ZERO_T = CorrelationModel(Variant.ZERO_T)
ZERO_T_CRITICAL = CorrelationModel(Variant.ZERO_T_CRITICAL)
MATSUBARA = CorrelationModel(Variant.MATSUBARA)


def spectral_density(omega, p):
    """J(w) = 8 kappa^2 gamma w0 w / ((w^2 - w0^2)^2 + 4 gamma^2 w^2)."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise InvalidParameterError("spectral density is defined for omega >= 0")
    num = 8.0 * p.kappa ** 2 * p.gamma * p.w0 * omega
    den = (omega ** 2 - p.w0 ** 2) ** 2 + 4.0 * p.gamma ** 2 * omega ** 2
    value = num / den
    return float(value) if value.ndim == 0 else value


def relative_detuning(p):
    return abs(p.gamma - p.w0) / p.w0


def _delta(p):
    if p.gamma < p.w0:
        return complex(math.sqrt((p.w0 - p.gamma) * (p.w0 + p.gamma)), 0.0)
    return complex(0.0, math.sqrt((p.gamma - p.w0) * (p.gamma + p.w0)))


def _f0sq(p, delta, z, zt, er, a, b, bt):
    if p.kappa == 0:
        return 0.0
    w0sq = p.w0 ** 2
    if math.isinf(p.beta):
        # (1/2pi) int_0^inf J dw in closed form.
        integral = 0.5 * (np.log(-zt ** 2) - np.log(-z ** 2)) / (z ** 2 - zt ** 2)
        return float((8 * p.kappa ** 2 * p.gamma * p.w0 * integral / (2 * np.pi)).real)
    al = 1j * bt * z
    alt = 1j * bt * zt
    for arg in (1 + al, 1 - al, 1 + alt, 1 - alt):
        if specfun._near_nonpositive_integer(arg):
            raise PoleError("a spectral pole coincides with a Matsubara frequency")
    psi = special.psi
    matsubara = (1j * er * w0sq / (2 * np.pi * delta)) * (
        psi(1 + alt) + psi(1 - alt) - psi(1 + al) - psi(1 - al))
    return float((a * z ** 2 + b * zt ** 2 - matsubara).real)


def derive(p):
    """Compute :class:`DerivedCoefficients` for ``p``."""
    if not p.zero_temperature and relative_detuning(p) < DEGENERATE_TOL:
        raise DegenerateParameterError(
            "gamma == w0 makes the finite-temperature closed form singular; "
            "use the interpolating evaluators or ZeroTCritical at T = 0")
    delta = _delta(p)
    z = delta + 1j * p.gamma
    zt = delta - 1j * p.gamma
    if delta == 0:
        theta = complex(math.pi / 2)
    else:
        theta = complex(-0.5j * np.log(z / zt))
    er = p.kappa ** 2 / p.w0
    if p.zero_temperature:
        bt = math.inf
        a = 0j
        b = (er / delta) * (z / zt) if delta != 0 else complex(math.nan, math.nan)
        c = 0.0
    else:
        bt = p.beta / (2 * np.pi)
        ez = np.exp(-p.beta * z)
        ezt = np.exp(-p.beta * zt)
        if abs(1 - ez) < 1e-12 or abs(1 - ezt) < 1e-12:
            raise PoleError("a spectral pole coincides with a Matsubara frequency")
        a = complex((er / delta) * (zt / z) * ez / (1 - ez))
        b = complex((er / delta) * (z / zt) / (1 - ezt))
        c = 4.0 * er * p.gamma / (p.beta * p.w0 ** 2)
    if delta == 0:
        f0sq = _critical_f0sq_zero_t(p)
    else:
        f0sq = _f0sq(p, delta, z, zt, er, a, b, bt)
    st_var = 0.5 * f0sq
    xi = er / (2 * math.sqrt(st_var)) if st_var > 0 else math.nan
    return DerivedCoefficients(delta=delta, theta=theta, z=z, z_tilde=zt, er=er, a=a, b=b,
                               c=c, f0sq=f0sq, st_variance=st_var, xi=xi, beta_tilde=bt)


def _critical_f0sq_zero_t(p):
    # (1/2pi) int J dw with gamma == w0: J = 8 k^2 w0^2 w / (w^2 + w0^2)^2.
    return 2 * p.kappa ** 2 / np.pi


def _critical_nodes(p):
    """Two parameter sets straddling gamma == w0 and the interpolation weight."""
    w0 = p.w0
    d2 = _CRITICAL_OFFSET * w0 ** 2
    lo = p.replace(gamma=math.sqrt(w0 ** 2 - d2))   # Delta^2 = +d2
    hi = p.replace(gamma=math.sqrt(w0 ** 2 + d2))   # Delta^2 = -d2
    target = w0 ** 2 - p.gamma ** 2
    weight = (target + d2) / (2 * d2)                # 1 at lo, 0 at hi
    return lo, hi, weight


def short_time_variance(p):
    """Coefficient of t^2 in the short-time G(t); removable singularity handled."""
    if not p.zero_temperature and relative_detuning(p) < CRITICAL_ROUTE_TOL:
        lo, hi, w = _critical_nodes(p)
        return w * derive(lo).st_variance + (1 - w) * derive(hi).st_variance
    return derive(p).st_variance


def _cexpm1(x):
    return np.expm1(np.asarray(x, dtype=complex))


def _pole_terms(t, d):
    t = np.asarray(t, dtype=float)
    return d.c * t - d.a * _cexpm1(1j * d.z * t) - d.b * _cexpm1(-1j * d.z_tilde * t)


def _q_parts(u, alpha):
    harmonic = specfun.complex_harmonic(alpha)
    log_part = np.log(-np.expm1(-u))
    lerch = specfun.lerch_sum(u, alpha)
    return harmonic, log_part, lerch


def k_terms(t, p, d=None):
    """The three real low-temperature contributions (K1, K2, K3) at times t > 0.

    K1 collects the harmonic numbers, K2 the logarithm log(1 - e^{-t/beta~}) and
    K3 the Lerch-type series.  Returned as three float arrays.
    """
    d = derive(p) if d is None else d
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if p.zero_temperature:
        raise InvalidParameterError("K terms are defined at finite temperature only")
    if np.any(t <= 0):
        raise InvalidParameterError("K terms are evaluated at t > 0")
    u = t / d.beta_tilde
    er, delta, z, zt, bt = d.er, d.delta, d.z, d.z_tilde, d.beta_tilde
    al = 1j * bt * z
    alt = 1j * bt * zt
    if delta.imag == 0:
        pref = -er / (np.pi * delta.real)
        rot = zt / z
        h1, lg, l1 = _q_parts(u, al)
        h2, _, l2 = _q_parts(u, -al)
        k1 = pref * np.imag(rot * (h1 + h2)) * np.ones_like(u)
        k2 = pref * np.imag(rot) * 2 * lg
        k3 = pref * np.imag(rot * (l1 + l2))
    else:
        pref = 1j * er / (2 * np.pi * delta)
        parts = {}
        for key, alpha in (("p", al), ("m", -al), ("pt", alt), ("mt", -alt)):
            parts[key] = _q_parts(u, alpha)
        rz, rzt = zt / z, z / zt
        k1 = np.real(pref * (rz * (parts["p"][0] + parts["m"][0])
                             - rzt * (parts["pt"][0] + parts["mt"][0]))) * np.ones_like(u)
        lg = parts["p"][1]
        k2 = np.real(pref * (rz - rzt) * 2 * lg)
        k3 = np.real(pref * (rz * (parts["p"][2] + parts["m"][2])
                             - rzt * (parts["pt"][2] + parts["mt"][2])))
    return k1, k2, k3


def _g_finite_t(t, p, d, with_k=True):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = _pole_terms(t, d)
    if not with_k:
        return out
    small = t < small_time_threshold(p)
    big = ~small
    if np.any(big):
        k1, k2, k3 = k_terms(t[big], p, d)
        out[big] += k1 + k2 + k3
    if np.any(small):
        ts = t[small]
        taylor = 1j * d.er * ts + 0.5 * d.f0sq * ts ** 2
        out[small] = taylor
    return out


def small_time_threshold(p):
    """Times below this use the quadratic expansion of G (relative error ~1e-10)."""
    rate = max(p.w0, p.gamma, 0.0 if p.zero_temperature else 2 * math.pi / p.beta)
    return SMALL_T_FACTOR / rate


def _exp1_scaled(zeta):
    """e^zeta E1(zeta), continued across the negative real axis from above."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    out = np.empty_like(zeta)
    near = np.abs(zeta) < 30
    if np.any(near):
        zn = zeta[near]
        out[near] = np.exp(zn) * specfun.exp1_continued(zn)
    if np.any(~near):
        zf = zeta[~near]
        total = np.zeros_like(zf)
        term = 1.0 / zf
        for k in range(60):
            total += term
            term = term * (-(k + 1)) / zf
        out[~near] = total
    return out


def _g_zero_t(t, p, d):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise InvalidParameterError("zero-temperature G(t) requires t > 0")
    z, zt = d.z, d.z_tilde
    poles = (z, -z, zt, -zt)
    acc = (np.log(t) + np.euler_gamma + 0.5j * np.pi) / p.w0 ** 4
    for i, pole in enumerate(poles):
        denom = pole
        for j, other in enumerate(poles):
            if j != i:
                denom = denom * (pole - other)
        acc = acc + (1.0 / denom) * (-np.log(-pole) - _exp1_scaled(-1j * pole * t))
    return 4 * d.er * p.w0 ** 2 * p.gamma / np.pi * acc


def _g_zero_t_critical(t, p):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise InvalidParameterError("zero-temperature G(t) requires t > 0")
    om = p.w0
    er = p.kappa ** 2 / p.w0
    x = om * t
    # e^{x} Ei(-x) = -e^{x} E1(x); e^{-x} Ei(x) via the scaled helper on -x.
    ep = -_exp1_scaled(x + 0j).real
    em = np.exp(-x) * special.expi(x)
    bracket = ((2 - x) * ep + (x + 2) * (em + 1j * np.pi * np.exp(-x))
               - 4 * (np.log(x) + 0.5j * np.pi + np.euler_gamma))
    return -(er / (np.pi * om)) * bracket


def _coth_half(beta, pole, tol):
    """coth(beta p / 2) from its Matsubara partial-fraction series."""
    bt = beta / (2 * np.pi)
    w = bt * pole
    m_min = max(64, int(math.ceil(beta * abs(pole))) + 1, int(math.ceil(4 * abs(w))))
    m_max = 10 ** 6
    m = m_min
    while True:
        if m > m_max:
            raise ConvergenceError("Matsubara coth series exceeded 1e6 terms", achieved=m)
        # Size of the first omitted Euler-Maclaurin correction relative to the sum.
        remainder = abs(1.0 / (m ** 6))
        if remainder < tol * abs(1.0 / m) or m >= m_max:
            break
        m *= 2
    k = np.arange(1, m + 1)
    s = np.sum(1.0 / (k ** 2 + w ** 2))
    # Euler-Maclaurin remainder of sum_{k>m} 1/(k^2 + w^2).
    q = m ** 2 + w ** 2
    g = 1.0 / q
    g1 = -2 * m / q ** 2
    g3 = 24 * m / q ** 3 - 48 * m ** 3 / q ** 4
    tail = np.arctan(w / m) / w - 0.5 * g - g1 / 12 + g3 / 720
    return 1.0 / (np.pi * w) + (2 * w / np.pi) * (s + tail)


def _g_matsubara(t, p, d, tol):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if p.zero_temperature:
        raise InvalidParameterError("the Matsubara reference needs finite beta")
    z, zt, er, delta = d.z, d.z_tilde, d.er, d.delta
    n_z = 0.5 * (_coth_half(p.beta, z, tol) - 1)
    n1_zt = 0.5 * (_coth_half(p.beta, zt, tol) + 1)
    a_m = (er / delta) * (zt / z) * n_z
    b_m = (er / delta) * (z / zt) * n1_zt
    poles = d.c * t - a_m * _cexpm1(1j * z * t) - b_m * _cexpm1(-1j * zt * t)

    bt = d.beta_tilde
    scale = bt * max(p.w0, p.gamma, 1.0)
    m_count = max(int(math.ceil(p.beta * max(p.w0, p.gamma))) + 1,
                  int(math.ceil(scale * (0.25 / tol) ** 0.25)), 64)
    if m_count > 10 ** 6:
        raise ConvergenceError("Matsubara sum needs more than 1e6 terms", achieved=m_count)
    pref = 8 * er * p.w0 ** 2 * p.gamma / p.beta
    nu = np.arange(1, m_count + 1) / bt
    f = 1.0 / (nu * ((nu ** 2 + p.w0 ** 2) ** 2 - 4 * p.gamma ** 2 * nu ** 2))
    s = np.empty(t.shape)
    for start in range(0, t.size, 64):
        block = t[start:start + 64]
        s[start:start + 64] = -(np.expm1(-np.outer(block, nu)) @ f)
    # Asymptotic tail of sum_{m>M} F(nu_m), weighted by (1 - e^{-nu t}).
    big_a = 2 * (p.w0 ** 2 - 2 * p.gamma ** 2)
    big_b = p.w0 ** 4
    q = m_count + 1
    tail = bt ** 5 * (special.zeta(5, q) - big_a * bt ** 2 * special.zeta(7, q)
                      + (big_a ** 2 - big_b) * bt ** 4 * special.zeta(9, q))
    s = s + tail * (-np.expm1(-q * t / bt))
    return poles + pref * s


def _evaluate(t, p, m):
    v = m.variant
    if v is Variant.SHORT_TIME:
        sigma = short_time_variance(p)
        return sigma * t ** 2 + 1j * (p.kappa ** 2 / p.w0) * t
    if v is Variant.ZERO_T_CRITICAL:
        if not p.zero_temperature:
            raise InvalidParameterError("ZeroTCritical requires beta = inf")
        if relative_detuning(p) >= DEGENERATE_TOL:
            raise InvalidParameterError("ZeroTCritical requires gamma == w0 (relative 1e-10)")
        return _g_zero_t_critical(t, p)
    if v is Variant.ZERO_T and not p.zero_temperature:
        raise InvalidParameterError("ZeroT requires beta = inf")
    if v is Variant.FULL and p.zero_temperature:
        v = Variant.ZERO_T
    if p.zero_temperature and v in (Variant.F3, Variant.F3B, Variant.MATSUBARA):
        raise InvalidParameterError(f"{m.name} needs finite beta")

    if relative_detuning(p) < CRITICAL_ROUTE_TOL:
        if p.zero_temperature and relative_detuning(p) < DEGENERATE_TOL:
            return _g_zero_t_critical(t, p)
        lo, hi, w = _critical_nodes(p)
        sub = CorrelationModel(v, m.matsubara_tolerance)
        return w * _evaluate(t, lo, sub) + (1 - w) * _evaluate(t, hi, sub)

    d = derive(p)
    if v is Variant.ZERO_T:
        return _g_zero_t(t, p, d)
    if v is Variant.FULL:
        return _g_finite_t(t, p, d, with_k=True)
    if v in (Variant.F3, Variant.F3B):
        return _g_finite_t(t, p, d, with_k=False)
    if v is Variant.MATSUBARA:
        return _g_matsubara(t, p, d, m.matsubara_tolerance)
    raise InvalidParameterError(f"unsupported model {m!r}")


def g_eval(t, p, m=FULL):
    """Evaluate G(t) for the correlation model ``m``.

    ``t`` may be a scalar or an array.  Models with a logarithm at the origin
    (ZeroT, ZeroTCritical) need t > 0; for the others G(0) = 0.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise InvalidParameterError("G(t) is evaluated for t >= 0")
    out = np.zeros(t.shape, dtype=complex)
    needs_positive = m.variant in (Variant.ZERO_T, Variant.ZERO_T_CRITICAL) or (
        m.variant is Variant.FULL and p.zero_temperature)
    if needs_positive and np.any(t == 0):
        raise InvalidParameterError(f"{m.name} G(t) requires t > 0")
    pos = t > 0
    if np.any(pos):
        out[pos] = _evaluate(t[pos], p, m)
    return complex(out[0]) if scalar else out


# --- quadrature references ------------------------------------------------

def _coth_factor(p):
    if p.zero_temperature:
        return lambda w: 1.0
    half = 0.5 * p.beta
    return lambda w: 1.0 / math.tanh(half * w)


def _breakpoints(p, hi):
    pts = {p.w0, max(p.w0 - 5 * p.gamma, 0.0), p.w0 + 5 * p.gamma,
           p.w0 + 25 * p.gamma}
    return sorted(x for x in pts if 0 < x < hi)


def _quad(f, lo, hi, tol, weight=None, wvar=None):
    kwargs = dict(epsabs=tol, epsrel=1e-13, limit=2000)
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar)
        if math.isinf(hi):
            kwargs.pop("epsrel")
            kwargs.pop("limit")
            kwargs["limlst"] = 200
    with warnings.catch_warnings():
        # The error estimate is checked below instead.
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(f, lo, hi, full_output=0, **kwargs)[:2]
    if not math.isfinite(value) or err > max(100 * tol, 1e-6 * abs(value)):
        raise ConvergenceError(f"quadrature did not converge (error estimate {err:.3g})",
                               achieved=err)
    return value


def _oscillatory(f, lo, t, kind, tol, p):
    """int_lo^inf f(w) cos|sin(w t) dw, split so the spectral peak is resolved."""
    hi = max(p.w0 + 40 * p.gamma, 20 * p.w0, lo * 2, 20.0 / t)
    cuts = [lo] + [x for x in _breakpoints(p, hi) if x > lo] + [hi]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += _quad(f, a, b, tol, weight=kind, wvar=t)
    total += _quad(f, hi, math.inf, tol, weight=kind, wvar=t)
    return total


def force_autocorrelation(t, p, tol=1e-12):
    """<F(t)F(0)>_T by adaptive quadrature over frequency."""
    if t < 0 or tol <= 0:
        raise InvalidParameterError("need t >= 0 and tol > 0")
    coth = _coth_factor(p)
    jc = lambda w: spectral_density(w, p) * coth(w) if w > 0 else (
        0.0 if p.zero_temperature else 16 * p.kappa ** 2 * p.gamma / (p.w0 ** 3 * p.beta))
    jj = lambda w: spectral_density(w, p)
    if t == 0:
        hi = p.w0 + 40 * p.gamma
        cuts = [0.0] + _breakpoints(p, hi) + [hi]
        re = sum(_quad(jc, a, b, tol) for a, b in zip(cuts[:-1], cuts[1:]))
        re += _quad(jc, hi, math.inf, tol)
        return complex(re / (2 * np.pi), 0.0)
    re = _oscillatory(jc, 0.0, t, "cos", tol, p)
    im = _oscillatory(jj, 0.0, t, "sin", tol, p)
    return complex(re, -im) / (2 * np.pi)


def g_oracle(t, p, tol=1e-13):
    """Reference G(t) from frequency quadrature.

    The two time integrals of cos(w t) and sin(w t) are done analytically, so

        Re G = (1/2pi) int J coth(beta w/2) (1 - cos w t) / w^2 dw
        Im G = (1/2pi) int J sin(w t) / w^2 dw,

    each evaluated by adaptive (and, in the tail, Fourier-weighted) quadrature.
    ``beta = inf`` uses coth = 1.
    """
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    if t == 0:
        return 0j
    coth = _coth_factor(p)

    def r(w):
        return spectral_density(w, p) * coth(w) / (w * w)

    def s(w):
        return spectral_density(w, p) / (w * w)

    ws = min(0.5 / t, 0.5 * p.w0, 0.5 * p.gamma)
    # [0, ws]: combined integrands, regular at w = 0.
    re = _quad(lambda w: r(w) * 2 * math.sin(0.5 * w * t) ** 2 if w > 0 else 0.0, 0.0, ws, tol)
    im = _quad(lambda w: s(w) * math.sin(w * t) if w > 0 else 0.0, 0.0, ws, tol)
    hi = max(p.w0 + 40 * p.gamma, 20 * p.w0)
    cuts = [ws] + [x for x in _breakpoints(p, hi) if x > ws] + [hi]
    plain = sum(_quad(r, a, b, tol) for a, b in zip(cuts[:-1], cuts[1:]))
    plain += _quad(r, hi, math.inf, tol)
    re += plain - _oscillatory(r, ws, t, "cos", tol, p)
    im += _oscillatory(s, ws, t, "sin", tol, p)
    return complex(re, im) / (2 * np.pi)


def reorganization_energy_quadrature(p, tol=1e-13):
    """(1/2pi) int_0^inf J(w)/w dw by quadrature (equals kappa^2 / w0)."""
    f = lambda w: spectral_density(w, p) / w if w > 0 else 8 * p.kappa ** 2 * p.gamma / p.w0 ** 3
    hi = p.w0 + 40 * p.gamma
    cuts = [0.0] + _breakpoints(p, hi) + [hi]
    val = sum(_quad(f, a, b, tol) for a, b in zip(cuts[:-1], cuts[1:]))
    val += _quad(f, hi, math.inf, tol)
    return val / (2 * np.pi)

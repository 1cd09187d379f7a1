"""Population dynamics of the unbiased spin-boson model in the NIBA.

The population difference obeys

    dP/dt = -int_0^t K(t - s) P(s) ds,    K(t) = V^2 Re exp(-G(t)).

:func:`solve_volterra` integrates the equivalent second-kind equation
``P(t) = p0 - int_0^t K1(t - s) P(s) ds`` with ``K1(t) = int_0^t K``, using
product integration over a piecewise-linear P.  Kernel moments on each cell are
taken by Gauss-Legendre quadrature with sub-panels wherever the kernel has
structure finer than the step, so the scheme stays second order in h and is
exact for a constant kernel.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import bath, specfun
from .bath import CorrelationModel, Variant
from .errors import (
    ConvergenceError,
    DegenerateParameterError,
    InstabilityError,
    InvalidParameterError,
    NumericalOverflowError,
    PoleError,
    StepSizeError,
)

MARKOV = "markov"
OVERSHOOT = 0.05
# exp(-G) is dropped once Re G exceeds this (e^-45 ~ 3e-20).
NEGLIGIBLE_RE_G = 45.0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass
class PopulationTrace:
    times: np.ndarray
    values: np.ndarray
    model: str
    step: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise InvalidParameterError("times and values differ in length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise InvalidParameterError("times must be strictly increasing")

    @property
    def t_final(self):
        return float(self.times[-1])

    def resample(self, n):
        grid = np.linspace(self.times[0], self.times[-1], n)
        return grid, np.interp(grid, self.times, self.values)

    def truncated(self, t_f):
        keep = self.times <= t_f * (1 + 1e-12)
        return PopulationTrace(self.times[keep], self.values[keep], self.model, self.step,
                               dict(self.meta))


@dataclass(frozen=True)
class KernelSpec:
    """Which G(t) feeds the NIBA kernel.

    ``tabulation`` optionally holds ``(times, values)`` kernel samples; when
    present they are spline-interpolated instead of evaluating the model.
    """

    model: CorrelationModel
    v: float = 1.0
    tabulation: tuple = None


def _kernel_function(k, p):
    v2 = k.v ** 2
    if k.tabulation is not None:
        times, values = (np.asarray(x, dtype=float) for x in k.tabulation)
        spline = CubicSpline(times, values)
        t_max = times[-1]

        def tabulated(t):
            t = np.asarray(t, dtype=float)
            if np.any(t > t_max * (1 + 1e-12)):
                raise InvalidParameterError("kernel requested beyond its tabulation")
            return spline(t)
        return tabulated

    if p.kappa == 0:
        return lambda t: np.full(np.shape(t), v2)

    if k.model.variant is Variant.F3B:
        d = bath.derive(p)

        def f3b(t):
            t = np.asarray(t, dtype=float)
            expo = -(d.a + d.b) - d.c * t + d.b * np.exp(-1j * d.z_tilde * t)
            return _safe_exp_re(expo, v2)
        return f3b

    def from_g(t):
        return _safe_exp_re(-bath.g_eval(np.asarray(t, dtype=float), p, k.model), v2)
    return from_g


# Models whose G(t) is costly enough to be worth interpolating.
_SLOW_MODELS = (Variant.FULL, Variant.MATSUBARA)
# Knots per characteristic time of the smooth part of G.
_KNOTS_PER_SCALE = 100


def _g_knots(p, t_end):
    """Knots resolving G(t) - i E_r t: pole scale everywhere, thermal scale early on."""
    d_scale = 1.0 / max(p.w0, p.gamma + math.sqrt(abs(p.gamma ** 2 - p.w0 ** 2)))
    bt = p.beta / (2 * math.pi)
    early_end = min(t_end, 20 * bt)
    early = np.arange(0.0, early_end, min(d_scale, bt) / _KNOTS_PER_SCALE)
    late = np.arange(early_end, t_end, d_scale / _KNOTS_PER_SCALE)
    return np.unique(np.concatenate([early, late, [t_end]]))


def _interpolated_kernel(k, p, t_end):
    knots = _g_knots(p, t_end)
    er = p.kappa ** 2 / p.w0
    rest = bath.g_eval(knots, p, k.model) - 1j * er * knots
    spline = CubicSpline(knots, rest)
    v2 = k.v ** 2

    def kernel(t):
        t = np.asarray(t, dtype=float)
        return _safe_exp_re(-(spline(t) + 1j * er * t), v2)
    return kernel, knots.size


def _safe_exp_re(expo, v2):
    expo = np.asarray(expo, dtype=complex)
    if np.any(expo.real > 700):
        raise NumericalOverflowError("exp(-G) overflows: Re G < -700")
    return v2 * np.real(np.exp(expo))


def niba_kernel(t, k, p):
    """K(t) = V^2 Re exp(-G(t)) for the model in ``k``."""
    if np.any(np.asarray(t) < 0):
        raise InvalidParameterError("t must be >= 0")
    value = _kernel_function(k, p)(np.asarray(t, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def default_step(p):
    """h = min(1/w0, 1/V, 1/sqrt(<F(0)^2>), beta~) / 40."""
    scales = [1.0 / p.w0]
    if p.v > 0:
        scales.append(1.0 / p.v)
    f0sq = 2 * bath.short_time_variance(p) if p.kappa > 0 else 0.0
    if f0sq > 0:
        scales.append(1.0 / math.sqrt(f0sq))
    if not p.zero_temperature:
        scales.append(p.beta / (2 * math.pi))
    return min(scales) / 40.0


def _kernel_scales(k, p):
    """(resolution scale, thermal scale) for the kernel sub-panels."""
    if p.kappa == 0:
        return math.inf, 0.0
    scales = [1.0 / p.w0]
    if k.v > 0:
        scales.append(1.0 / k.v)
    sigma = bath.short_time_variance(p)
    if sigma > 0:
        scales.append(1.0 / math.sqrt(2 * sigma))
    er = p.kappa ** 2 / p.w0
    if er > 0:
        scales.append(1.0 / er)
    thermal = 0.0 if p.zero_temperature else p.beta / (2 * math.pi)
    return min(scales) / 8.0, thermal


class VolterraSolver:
    """Resumable product-integration solver on a fixed step ``h``.

    ``t_max`` bounds how far :meth:`extend_to` may go; it fixes the kernel
    memory cutoff computed at construction.
    """

    def __init__(self, k, p, h, t_max, label=None):
        if not (h > 0 and math.isfinite(h)):
            raise StepSizeError("step must be positive")
        self.k, self.p, self.h = k, p, float(h)
        self.t_max = float(t_max)
        self.label = label or (k.model.name if k.tabulation is None else "tabulated")
        self._kernel = _kernel_function(k, p)
        self._scale, self._thermal = _kernel_scales(k, p)
        self._cutoff = self._memory_cutoff()
        self.interpolated = False
        if (k.tabulation is None and p.kappa > 0 and not p.zero_temperature
                and k.model.variant in _SLOW_MODELS):
            knots = _g_knots(p, min(self._cutoff, self.t_max)).size
            if self._node_estimate() > 4 * knots:
                self._kernel, _ = _interpolated_kernel(k, p, min(self._cutoff, self.t_max))
                self.interpolated = True
        self._m0 = np.zeros(0)
        self._m1 = np.zeros(0)
        self._m2 = np.zeros(0)
        self._w = np.zeros(0)
        self._r = np.zeros(0)
        self._l = np.zeros(0)
        self._p = np.array([p.p0])
        self._bound = abs(p.p0) + OVERSHOOT
        self.kernel_evaluations = 0

    def _memory_cutoff(self):
        if self.p.kappa == 0 or self.k.tabulation is not None:
            return self.t_max
        start = min(self._scale, self.h)
        if start >= self.t_max:
            return self.t_max
        n = int(math.ceil(math.log(self.t_max / start) / math.log(1.05))) + 1
        probe = start * 1.05 ** np.arange(n)
        probe = np.append(probe[probe < self.t_max], self.t_max)
        if self.k.model.variant is Variant.F3B:
            values = np.abs(self._kernel(probe)) / max(self.k.v ** 2, 1e-300)
            alive = values > math.exp(-NEGLIGIBLE_RE_G)
        else:
            re_g = bath.g_eval(probe, self.p, self.k.model).real
            alive = re_g < NEGLIGIBLE_RE_G
        if alive[-1]:
            return self.t_max
        last = np.nonzero(alive)[0]
        if last.size == 0:
            return probe[0]
        return float(probe[min(last[-1] + 1, probe.size - 1)])

    def _node_estimate(self):
        end = min(self._cutoff, self.t_max)
        if not math.isfinite(self._scale):
            return 4 * end / self.h
        early = min(end, 20 * self._thermal)
        fine = min(self._scale, self._thermal / 8.0) if self._thermal > 0 else self._scale
        return 4 * (early / min(fine, self.h) + (end - early) / min(self._scale, self.h))

    def _panels(self, t0, span):
        if not math.isfinite(self._scale):
            return 1
        scale = self._scale
        if self._thermal > 0 and t0 < 20 * self._thermal:
            scale = min(scale, self._thermal / 8.0)
        return max(1, int(math.ceil(span / scale)))

    def _moments(self, first, last):
        h = self.h
        count = last - first
        m = np.zeros((3, count))
        starts = (first + np.arange(count)) * h
        live = np.nonzero(starts < self._cutoff)[0]
        if live.size == 0:
            return m
        # Fraction of each cell before the memory cutoff; the kernel is zero beyond.
        frac = np.minimum(1.0, (self._cutoff - starts[live]) / h)
        panels = np.array([self._panels(t0, f * h) for t0, f in zip(starts[live], frac)])
        keys = np.stack([panels, frac])
        for r, f in np.unique(keys, axis=1).T:
            r = int(r)
            idx = live[(panels == r) & (frac == f)]
            xi = f * ((np.arange(r)[:, None] + _GL_X[None, :]) / r).ravel()
            wt = f * np.tile(_GL_W, r) / r
            step = max(1, 200000 // xi.size)
            for lo in range(0, idx.size, step):
                block = idx[lo:lo + step]
                tau = starts[block][:, None] + h * xi[None, :]
                vals = self._kernel(tau.ravel()).reshape(tau.shape)
                self.kernel_evaluations += vals.size
                vals = vals * (wt * h)[None, :]
                m[0, block] = vals.sum(axis=1)
                m[1, block] = vals @ xi
                m[2, block] = vals @ xi ** 2
        return m

    @property
    def steps(self):
        return self._p.size - 1

    def extend_to(self, t_f):
        if t_f > self.t_max * (1 + 1e-12):
            raise InvalidParameterError("cannot extend beyond t_max")
        n_new = int(round(t_f / self.h))
        n_old = self.steps
        if n_new <= n_old:
            return self.trace(t_f)
        h = self.h
        moments = self._moments(n_old, n_new)
        self._m0 = np.concatenate([self._m0, moments[0]])
        self._m1 = np.concatenate([self._m1, moments[1]])
        self._m2 = np.concatenate([self._m2, moments[2]])
        k1 = np.concatenate([[0.0], np.cumsum(self._m0)])[:-1]
        r_all = 0.5 * h * (k1 + self._m0 - self._m2)
        l_all = 0.5 * h * (k1 + self._m0 - 2 * self._m1 + self._m2)
        w = np.zeros(n_new)
        w[1:] = r_all[:-1] + l_all[1:]
        self._r, self._l, self._w = r_all, l_all, w
        vals = np.concatenate([self._p, np.zeros(n_new - n_old)])
        p0 = self.p.p0
        denom = 1.0 + l_all[0]
        bound = self._bound
        for n in range(n_old + 1, n_new + 1):
            acc = r_all[n - 1] * p0
            if n > 1:
                acc += np.dot(w[n - 1:0:-1], vals[1:n])
            value = (p0 - acc) / denom
            if not abs(value) <= bound:
                raise InstabilityError(
                    f"|P| = {abs(value):.3g} exceeds {bound:.3g} at t = {n * h:.6g}")
            vals[n] = value
        self._p = vals
        return self.trace(t_f)

    def trace(self, t_f=None):
        n = self.steps if t_f is None else min(self.steps, int(round(t_f / self.h)))
        times = np.arange(n + 1) * self.h
        meta = {"scheme": "product-trapezoid", "h": self.h, "memory_cutoff": self._cutoff,
                "kernel_evaluations": self.kernel_evaluations,
                "interpolated_g": self.interpolated}
        return PopulationTrace(times, self._p[:n + 1].copy(), self.label, self.h, meta)


def solve_volterra(k, p, t_f, h=None):
    """Solve dP/dt = -int_0^t K(t-s) P(s) ds on [0, t_f] with step h."""
    if not t_f > 0:
        raise InvalidParameterError("t_f must be positive")
    if h is None:
        h = min(default_step(p), t_f / 100)
    if not (0 < h <= t_f / 100 * (1 + 1e-12)):
        raise StepSizeError(f"step {h!r} must satisfy 0 < h <= t_f/100")
    n = int(round(t_f / h))
    if abs(n * h - t_f) > 1e-9 * t_f:
        h = t_f / n
    solver = VolterraSolver(k, p, h, t_f)
    return solver.extend_to(t_f)


# --- short-time Markov closed form -----------------------------------------

def _markov_constants(p):
    if p.kappa == 0:
        raise DegenerateParameterError("the Markov form needs kappa > 0")
    sigma = bath.short_time_variance(p)
    er = p.kappa ** 2 / p.w0
    root = math.sqrt(sigma)
    return sigma, root, er, er / (2 * root)


def _gaussian_integral(t, sigma, root, er, xi):
    """E(t) = int_0^t exp(-sigma s^2 + i E_r s) ds."""
    t = np.asarray(t, dtype=float)
    edge = np.exp(-sigma * t ** 2 + 1j * er * t)
    # exp(-sigma t^2 + i E_r t) w(xi + i root t) = exp(-xi^2) erfc(root t - i xi)
    tail = edge * specfun.faddeeva(xi + 1j * root * t)
    value = (math.sqrt(math.pi) / (2 * root)) * (
        math.exp(-xi ** 2) - tail + 2j / math.sqrt(math.pi) * specfun.dawson(xi))
    # The empty integral is exactly zero; the bracket only cancels to rounding.
    return np.where(t == 0, 0j, value), edge


def markov_kernel_integral(t, p):
    """V^2 int_0^t exp(-sigma s^2) cos(E_r s) ds, the Markov rate at time t."""
    if np.any(np.asarray(t) < 0):
        raise InvalidParameterError("t must be >= 0")
    sigma, root, er, xi = _markov_constants(p)
    e, _ = _gaussian_integral(t, sigma, root, er, xi)
    value = p.v ** 2 * np.real(e)
    return float(value) if np.ndim(value) == 0 else value


def markov_population(t, p):
    """Closed-form solution of dP/dt = -markov_kernel_integral(t) P(t)."""
    if np.any(np.asarray(t) < 0):
        raise InvalidParameterError("t must be >= 0")
    sigma, root, er, xi = _markov_constants(p)
    t = np.asarray(t, dtype=float)
    e, edge = _gaussian_integral(t, sigma, root, er, xi)
    # int_0^t E(s) ds by parts: t E(t) - int_0^t s exp(...) ds.
    integral = e * (t - 1j * xi / root) + (edge - 1) / (2 * sigma)
    value = p.p0 * np.exp(-p.v ** 2 * np.real(integral))
    return float(value) if np.ndim(value) == 0 else value


def markov_trace(p, t_f, n=None):
    n = n or 1001
    times = np.linspace(0.0, t_f, n)
    return PopulationTrace(times, markov_population(times, p), MARKOV, times[1] - times[0],
                           {"scheme": "closed-form"})


# --- Laplace domain ---------------------------------------------------------

@dataclass(frozen=True)
class LaplaceResult:
    value: complex
    truncation: float
    terms: int


def _f3_series(s, p, n_max, convention):
    d = bath.derive(p)
    a, b, c, z, zt = d.a, d.b, d.c, d.z, d.z_tilde
    scale = np.exp(-(a + b)) / (1j * zt)
    total = 0j
    term_size = math.inf
    coeff = 1.0 + 0j
    for n in range(n_max + 1):
        if n > 0:
            coeff = coeff * a / n
        mu = (s + c - 1j * n * z) / (1j * zt)
        if convention == "lower":
            phi = specfun.lower_gamma_scaled(mu, -b)
        else:
            x = complex(-b)
            phi = specfun.incomplete_gamma_upper(mu, x) * np.exp(-mu * np.log(x))
        term = coeff * phi
        total += term
        term_size = abs(term) / max(abs(total), 1e-300)
        if term_size < 1e-12 and n > 0:
            return scale * total, term_size, n
    return scale * total, term_size, n_max


def laplace_k_f3(s, p, n_max=200, convention="lower"):
    """Laplace transform of the F3 kernel, V^2 Re exp(-G_F3(t)).

    The series over powers of ``a`` is summed term by term; each term is an
    incomplete gamma function of ``-b``.  ``convention="lower"`` uses the
    branch-free ``x^-s gamma(s, x)``; ``"upper"`` uses ``x^-s Gamma(s, x)``.
    ``n_max = 0`` keeps only the first term, i.e. the F3b kernel.
    """
    s = complex(s)
    if not s.real > 0:
        raise InvalidParameterError("Re(s) must be positive")
    if convention not in ("lower", "upper"):
        raise InvalidParameterError("convention must be 'lower' or 'upper'")
    if p.kappa == 0:
        return LaplaceResult(p.v ** 2 / s, 0.0, 0)
    # The kernel is real, so its transform is (L[f](s) + conj(L[f](conj s))) / 2.
    up, err_up, n_up = _f3_series(s, p, n_max, convention)
    dn, err_dn, n_dn = _f3_series(s.conjugate(), p, n_max, convention)
    err = max(err_up, err_dn)
    if n_max > 0 and err >= 1e-9 and max(n_up, n_dn) >= n_max:
        raise ConvergenceError(f"F3 Laplace series not converged after {n_max} terms",
                               achieved=err)
    value = p.v ** 2 * 0.5 * (up + np.conj(dn))
    return LaplaceResult(complex(value), float(err), max(n_up, n_dn))


def laplace_p(s, kernel_transform):
    """P(s) = 1 / (s + K(s))."""
    denom = complex(s) + complex(getattr(kernel_transform, "value", kernel_transform))
    if abs(denom) < 1e-14:
        raise PoleError("s + K(s) vanishes")
    return 1.0 / denom


def laplace_k_st(s, p):
    """Laplace transform of the short-time kernel V^2 exp(-sigma t^2) cos(E_r t)."""
    s = complex(s)
    if not s.real > 0:
        raise InvalidParameterError("Re(s) must be positive")
    if p.kappa == 0:
        raise DegenerateParameterError("the short-time transform needs kappa > 0")
    sigma = bath.short_time_variance(p)
    er = p.kappa ** 2 / p.w0
    root = math.sqrt(sigma)
    w_plus = specfun.faddeeva((1j * s + er) / (2 * root))
    w_minus = specfun.faddeeva((1j * s - er) / (2 * root))
    return p.v ** 2 * math.sqrt(math.pi) / (4 * root) * (w_plus + w_minus)


def laplace_p_st(s, p):
    """P(s) for the short-time kernel; s P(s) -> p0 as s -> infinity."""
    return p.p0 * laplace_p(s, laplace_k_st(s, p))


def numerical_laplace(times, values, s):
    """Trapezoid-rule Laplace transform of samples on a uniform grid (no tail)."""
    times = np.asarray(times, dtype=float)
    weights = np.exp(-complex(s) * times)
    return complex(integrate.trapezoid(weights * np.asarray(values), times))


def laplace_of_function(f, s, t_max, tol=1e-10):
    """int_0^t_max exp(-s t) f(t) dt by adaptive quadrature (real and imaginary parts)."""
    s = complex(s)
    limit = 4000
    re = integrate.quad(lambda t: (np.exp(-s * t) * f(t)).real, 0, t_max,
                        epsabs=tol, epsrel=tol, limit=limit)[0]
    im = integrate.quad(lambda t: (np.exp(-s * t) * f(t)).imag, 0, t_max,
                        epsabs=tol, epsrel=tol, limit=limit)[0]
    return complex(re, im)

"""Validity maps: where does each approximate kernel reproduce the full dynamics?

For every (gamma, kappa, beta) cell the full NIBA trace is computed once, then
the Markov, short-time, F3b and F3 traces on the same interval.  The relative
error of each against the full trace decides the cell label: the first model in
the precedence order whose error is below ``eps_fine`` wins.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bath, dynamics
from .bath import BathParameters
from .errors import InvalidParameterError, SpinBosonError

log = logging.getLogger(__name__)

LABELS = ("Markov", "ShortTime", "F3b", "F3", "FullRequired")
ERROR_LABEL = "Error"
MODEL_KEYS = {"Markov": "markov", "ShortTime": "st", "F3b": "f3b", "F3": "f3"}
DEFAULT_ORDER = ("Markov", "ShortTime", "F3b", "F3")
TF_LADDER = tuple(20.0 * 2 ** k for k in range(7))
WORKERS_ENV = "SPINBOSON_WORKERS"
# Cap on solver steps per trace; the step grows to t_max / MAX_STEPS when needed.
MAX_STEPS = 16384


@dataclass(frozen=True)
class SweepGrid:
    w0: float
    gamma_axis: tuple
    kappa_axis: tuple
    beta_axis: tuple
    eps_fine: float = 0.01
    eps_coarse: float = 0.05
    samples: int = 1000
    v: float = 1.0
    p0: float = 1.0
    order: tuple = DEFAULT_ORDER
    max_steps: int = MAX_STEPS

    def __post_init__(self):
        for name in ("gamma_axis", "kappa_axis", "beta_axis"):
            axis = tuple(float(x) for x in getattr(self, name))
            object.__setattr__(self, name, axis)
            if not axis:
                raise InvalidParameterError(f"{name} is empty")
            if any(x <= 0 for x in axis) and name != "kappa_axis":
                raise InvalidParameterError(f"{name} must be positive")
            if any(x < 0 for x in axis):
                raise InvalidParameterError(f"{name} must be non-negative")
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise InvalidParameterError(f"{name} must be strictly increasing")
        if not 0 < self.eps_fine < self.eps_coarse:
            raise InvalidParameterError("need 0 < eps_fine < eps_coarse")
        if self.samples < 2:
            raise InvalidParameterError("samples must be at least 2")
        if sorted(self.order) != sorted(DEFAULT_ORDER):
            raise InvalidParameterError(f"order must be a permutation of {DEFAULT_ORDER}")
        object.__setattr__(self, "order", tuple(self.order))

    @classmethod
    def logspaced(cls, w0, points=20, lo=0.01, hi=100.0, **kwargs):
        axis = tuple(np.logspace(math.log10(lo), math.log10(hi), points))
        return cls(w0, axis, axis, axis, **kwargs)

    @property
    def shape(self):
        return len(self.gamma_axis), len(self.kappa_axis), len(self.beta_axis)

    def parameters(self, gamma, kappa, beta):
        return BathParameters(self.w0, gamma, kappa, beta, self.v, self.p0)

    def cells(self):
        for i, g in enumerate(self.gamma_axis):
            for j, k in enumerate(self.kappa_axis):
                for m, b in enumerate(self.beta_axis):
                    yield (i, j, m), (g, k, b)

    def config(self):
        return {"w0": self.w0, "gamma_axis": list(self.gamma_axis),
                "kappa_axis": list(self.kappa_axis), "beta_axis": list(self.beta_axis),
                "eps_fine": self.eps_fine, "eps_coarse": self.eps_coarse,
                "samples": self.samples, "v": self.v, "p0": self.p0,
                "order": list(self.order), "max_steps": self.max_steps}


@dataclass
class ValidityCell:
    gamma: float
    kappa: float
    beta: float
    label: str
    eps_by_model: dict
    t_f: float
    flags: list = field(default_factory=list)


@dataclass
class ValidityMap:
    grid: SweepGrid
    cells: list

    def cell(self, i, j, m):
        _, nk, nb = self.grid.shape
        return self.cells[(i * nk + j) * nb + m]

    def labels(self):
        out = np.empty(self.grid.shape, dtype=object)
        for idx, _ in self.grid.cells():
            out[idx] = self.cell(*idx).label
        return out


def relative_error(app, full, samples=1000):
    """||P_app - P_full||_2 / ||P_full||_2 on ``samples`` uniform points."""
    if (abs(app.times[0] - full.times[0]) > 1e-9 * max(1.0, full.t_final)
            or abs(app.t_final - full.t_final) > 1e-9 * max(1.0, full.t_final)):
        raise InvalidParameterError("traces cover different intervals")
    _, pf = full.resample(samples)
    _, pa = app.resample(samples)
    norm = np.linalg.norm(pf)
    if norm == 0:
        return 0.0 if np.linalg.norm(pa) == 0 else math.inf
    return float(np.linalg.norm(pa - pf) / norm)


def _settled(trace, t_f, threshold):
    sel = trace.times <= t_f * (1 + 1e-12)
    t, v = trace.times[sel], trace.values[sel]
    full_range = v.max() - v.min()
    if full_range == 0:
        return True
    tail = v[t >= 0.9 * t_f]
    return (tail.max() - tail.min()) < threshold * full_range


def step_for(p, t_max=TF_LADDER[-1], max_steps=MAX_STEPS):
    return max(dynamics.default_step(p), t_max / max_steps)


def full_reference(p):
    """Model used as the exact trace: Matsubara for near-critical damping at finite T."""
    if relative_detuning_flag(p) and not p.zero_temperature:
        return bath.MATSUBARA
    return bath.FULL


def choose_tf(p, threshold=0.01, solver=None, ladder=TF_LADDER):
    """Smallest ladder time at which the full trace has settled.

    Returns ``(t_f, saturated)``; ``saturated`` is True when even the top of
    the ladder does not satisfy the criterion.
    """
    if solver is None:
        solver = dynamics.VolterraSolver(dynamics.KernelSpec(full_reference(p), p.v), p,
                                         step_for(p, ladder[-1]), ladder[-1])
    for t_f in ladder:
        trace = solver.extend_to(t_f)
        if _settled(trace, t_f, threshold):
            return t_f, False
    return ladder[-1], True


_APPROX_MODELS = {"st": bath.SHORT_TIME, "f3b": bath.F3B, "f3": bath.F3}


def classify_cell(p, grid):
    """Label one parameter cell; per-model failures are recorded in ``flags``."""
    flags = []
    eps = {"markov": None, "st": None, "f3b": None, "f3": None}
    h = step_for(p, TF_LADDER[-1], grid.max_steps)
    try:
        solver = dynamics.VolterraSolver(dynamics.KernelSpec(full_reference(p), p.v), p, h,
                                         TF_LADDER[-1])
        t_f, saturated = choose_tf(p, solver=solver)
        full = solver.trace(t_f)
    except SpinBosonError as exc:
        flags.append(f"full: {type(exc).__name__}: {exc}")
        return ValidityCell(p.gamma, p.kappa, p.beta, ERROR_LABEL, eps, math.nan, flags)
    if saturated:
        flags.append("tf-saturated")
    if relative_detuning_flag(p):
        flags.append(f"near-critical: reference {full.model}")

    if p.kappa == 0:
        flags.append("markov-skipped: kappa = 0")
    else:
        try:
            times = full.times
            approx = dynamics.PopulationTrace(times, dynamics.markov_population(times, p),
                                              dynamics.MARKOV, full.step)
            eps["markov"] = relative_error(approx, full, grid.samples)
        except SpinBosonError as exc:
            flags.append(f"markov: {type(exc).__name__}: {exc}")
    for key, model in _APPROX_MODELS.items():
        try:
            approx = dynamics.solve_volterra(dynamics.KernelSpec(model, p.v), p, t_f, h)
            eps[key] = relative_error(approx, full, grid.samples)
        except SpinBosonError as exc:
            flags.append(f"{key}: {type(exc).__name__}: {exc}")
    return ValidityCell(p.gamma, p.kappa, p.beta, label_for(eps, grid), eps, t_f, flags)


def relative_detuning_flag(p):
    return bath.relative_detuning(p) < bath.CRITICAL_ROUTE_TOL


def label_for(eps, grid):
    for name in grid.order:
        value = eps.get(MODEL_KEYS[name])
        if value is not None and value < grid.eps_fine:
            return name
    return "FullRequired"


def _classify_task(args):
    grid, gamma, kappa, beta = args
    try:
        p = grid.parameters(gamma, kappa, beta)
    except SpinBosonError as exc:
        return _error_cell(gamma, kappa, beta, f"parameters: {type(exc).__name__}: {exc}")
    try:
        return classify_cell(p, grid)
    except (SpinBosonError, ArithmeticError) as exc:
        return _error_cell(gamma, kappa, beta, f"cell: {type(exc).__name__}: {exc}")


def _error_cell(gamma, kappa, beta, flag):
    eps = {"markov": None, "st": None, "f3b": None, "f3": None}
    return ValidityCell(gamma, kappa, beta, ERROR_LABEL, eps, math.nan, [flag])


def worker_count(workers=None):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidParameterError(f"{WORKERS_ENV} must be an integer") from None
    return os.cpu_count() or 1


def sweep(grid, workers=None, progress=None):
    """Classify every grid cell; the result is ordered by (gamma, kappa, beta) index.

    ``progress`` is called as ``progress(done, total, cell)`` after each cell.
    """
    tasks = [(grid,) + values for _, values in grid.cells()]
    total = len(tasks)
    n_workers = min(worker_count(workers), total)
    cells = []

    def report(cell):
        cells.append(cell)
        log.info("cell %d/%d gamma=%g kappa=%g beta=%g -> %s", len(cells), total,
                 cell.gamma, cell.kappa, cell.beta, cell.label)
        if progress is not None:
            progress(len(cells), total, cell)

    if n_workers == 1:
        for task in tasks:
            report(_classify_task(task))
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for cell in pool.map(_classify_task, tasks, chunksize=1):
                report(cell)
    return ValidityMap(grid, cells)

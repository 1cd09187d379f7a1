"""Bath correlation functions and NIBA population dynamics for a spin-boson
model with a damped-oscillator (peaked) spectral density."""

from .bath import (
    BathParameters,
    CorrelationModel,
    DerivedCoefficients,
    Variant,
    derive,
    force_autocorrelation,
    g_eval,
    g_oracle,
    spectral_density,
)
from .dynamics import (
    KernelSpec,
    PopulationTrace,
    laplace_k_f3,
    laplace_p,
    laplace_p_st,
    markov_kernel_integral,
    markov_population,
    niba_kernel,
    solve_volterra,
)
from .errors import (
    BranchCutWarning,
    ConvergenceError,
    DegenerateParameterError,
    DomainError,
    InstabilityError,
    InvalidParameterError,
    NumericalError,
    NumericalOverflowError,
    PoleError,
    SpinBosonError,
    StepSizeError,
)
from .mapper import SweepGrid, ValidityCell, ValidityMap, choose_tf, classify_cell, relative_error, sweep

__version__ = "0.1.0"

"""Numerical laboratory for a damped semilinear wave equation on the 3-torus."""

from .calibration import (
    CalibratedConstants,
    alias_free_product,
    calibrate,
    load_constants,
    save_constants,
)
from .energy import EnergySample, modified_energy, sample_energies, standard_energy
from .estimates import (
    BootstrapParams,
    epsilon_budgets,
    forcing_constant,
    fractional_constant,
    g_function,
    g_function_quotient,
    h_threshold,
)
from .fields import Field, GridSpec, Spectrum, sobolev_norm, sobolev_weight
from .solver import (
    BreakdownInfo,
    SolverConfig,
    SolverState,
    Trajectory,
    mean_mode_free,
    simulate,
    step,
)
from .source import BreakdownError, ModelParams, SourceSpec, prepare_source
from .verify import CheckResult, VerificationReport, run_all

__version__ = "0.1.0"

__all__ = [
    "BootstrapParams",
    "BreakdownError",
    "BreakdownInfo",
    "CalibratedConstants",
    "CheckResult",
    "EnergySample",
    "Field",
    "GridSpec",
    "ModelParams",
    "SolverConfig",
    "SolverState",
    "SourceSpec",
    "Spectrum",
    "Trajectory",
    "VerificationReport",
    "alias_free_product",
    "calibrate",
    "epsilon_budgets",
    "forcing_constant",
    "fractional_constant",
    "g_function",
    "g_function_quotient",
    "h_threshold",
    "load_constants",
    "mean_mode_free",
    "modified_energy",
    "prepare_source",
    "run_all",
    "sample_energies",
    "save_constants",
    "simulate",
    "sobolev_norm",
    "sobolev_weight",
    "standard_energy",
    "step",
    "__version__",
]

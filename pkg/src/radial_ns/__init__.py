"""Finite-volume experiments for radially symmetric compressible Navier-Stokes
flow with density-dependent viscosity, plus admissibility checks,
energy/BD-entropy diagnostics and manufactured-solution verification."""
from .config import RunConfig, load, parse_text, to_text
from .diagnostics import DiagnosticsConfig, DiagnosticsSample, NormSpec, sample_all
from .errors import (ConfigError, DegenerateDensityError, NonFiniteError, QuadratureError,
                     RadialNSError, UsageError)
from .grid import FluidState, InitialDataSpec, RadialGrid, build_grid, make_initial_data
from .params import AdmissibilityReport, ModelParams, Regime, check_admissibility
from .solver import SchemeConfig, StepReport, run, step

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport", "ConfigError", "DegenerateDensityError", "DiagnosticsConfig",
    "DiagnosticsSample", "FluidState", "InitialDataSpec", "ModelParams", "NonFiniteError",
    "NormSpec", "QuadratureError", "RadialGrid", "RadialNSError", "Regime", "RunConfig",
    "SchemeConfig", "StepReport", "UsageError", "build_grid", "check_admissibility", "load",
    "make_initial_data", "parse_text", "run", "sample_all", "step", "to_text",
]

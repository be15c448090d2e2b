"""Energy, BD entropy and moment functionals of discrete states.

All integrals use the exact cell measures of the grid (midpoint rule in
each cell for the integrand). Balance residuals compare the change of a
functional over one step with its dissipation evaluated on the
time-midpoint state.

Energy balance, any N:

    d/dt int (rho u^2 / 2 + K) r^{N-1} dr
        + alpha int rho^alpha u_r^2 r^{N-1} dr
        + (alpha (N-1)^2 - (N-1)(N-2)) int rho^alpha u^2 r^{N-3} dr
      = 2 (N-1)(1-alpha) int rho^alpha u u_r r^{N-2} dr

BD entropy balance:

    d/dt int (rho w^2 / 2 + K) r^{N-1} dr
      = -(a gamma / alpha) int rho^{gamma-alpha-1} |(rho^alpha)_r|^2 r^{N-1} dr
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import UsageError
from .grid import EVEN, ODD, FluidState, RadialGrid, check_positive, ddr, weighted_lp_norm
from .model import effective_velocity, potential_energy
from .params import ModelParams

NORM_FIELDS = ("rho", "rho_dev", "drho", "u", "w")


@dataclass(frozen=True)
class NormSpec:
    """A weighted norm ``|| field r^xi ||_{L^p(lo, hi)}`` to record.

    With ``use_eta`` the weight exponent is eta/2 (eta from the
    diagnostics config) instead of ``xi``. ``hi=None`` means r_max.
    """

    tag: str
    field: str = "rho_dev"
    p: float = 2.0
    xi: float = 0.0
    lo: float = 0.0
    hi: Optional[float] = None
    use_eta: bool = False

    def __post_init__(self):
        if self.field not in NORM_FIELDS:
            raise UsageError(f"norm {self.tag!r}: field must be one of {NORM_FIELDS}, got {self.field!r}")
        if not (self.p == math.inf or self.p >= 1.0):
            raise UsageError(f"norm {self.tag!r}: p must lie in [1, inf]")
        if not self.tag or any(c in self.tag for c in ", \t"):
            raise UsageError(f"bad norm tag {self.tag!r}")


@dataclass(frozen=True)
class DiagnosticsConfig:
    k_moments: tuple[float, ...] = (2.0, 3.0, 4.0)
    norms: tuple[NormSpec, ...] = ()
    eta: Optional[float] = None
    entropy_weight: float = 0.0

    def __post_init__(self):
        for k in self.k_moments:
            if k < 2:
                raise UsageError(f"k-moments need k >= 2, got {k}")
        if any(n.use_eta for n in self.norms):
            if self.eta is None:
                raise UsageError("weighted diagnostics with use_eta need eta")
        if self.eta is not None and not (1.0 / 3.0 <= self.eta <= 1.0):
            raise UsageError(f"eta must lie in [1/3, 1], got {self.eta}")


@dataclass
class DiagnosticsSample:
    time: float
    dt: float
    min_rho: float
    max_rho: float
    kinetic_energy: float
    potential_energy_total: float
    bd_kinetic: float
    bd_dissipation_rate: float
    energy_balance_residual: float
    bd_balance_residual: float
    k_moments: dict = field(default_factory=dict)
    weighted_norms: dict = field(default_factory=dict)
    grad_entropy_norm: float = 0.0
    bd_derivative: float = 0.0
    boundary_contamination: float = 0.0


class Balance(NamedTuple):
    residual: float
    derivative: float  # discrete d/dt of the functional over the step
    dissipation: float
    production: float


def total_energy(state: FluidState, grid: RadialGrid, params: ModelParams) -> tuple[float, float]:
    """(kinetic, potential) = (int rho u^2 / 2, int K(rho)) against r^{N-1} dr."""
    check_positive(state.rho)
    kinetic = grid.integrate(0.5 * state.rho * state.u**2)
    potential = grid.integrate(potential_energy(state.rho, params))
    return kinetic, potential


def bd_kinetic(state: FluidState, grid: RadialGrid, params: ModelParams) -> float:
    w = effective_velocity(state.rho, state.u, grid, params)
    return grid.integrate(0.5 * state.rho * w**2)


def bd_dissipation_rate(state: FluidState, grid: RadialGrid, params: ModelParams) -> float:
    p = params
    mu_r = ddr(state.rho**p.alpha, grid, EVEN)
    coeff = p.pressure_coeff * p.gamma / p.alpha
    return coeff * grid.integrate(state.rho ** (p.gamma - p.alpha - 1.0) * mu_r**2)


def k_moment(state: FluidState, grid: RadialGrid, k: float) -> float:
    if k < 2:
        raise UsageError(f"k must be >= 2, got {k}")
    return grid.integrate(state.rho * np.abs(state.u) ** k)


def entropy_gradient_norm(state: FluidState, grid: RadialGrid, params: ModelParams, weight: float = 0.0) -> float:
    """int |(rho^{alpha-1/2})_r|^2 r^{N-1+weight} dr."""
    check_positive(state.rho)
    g = ddr(state.rho ** (params.alpha - 0.5), grid, EVEN)
    return grid.integrate(g * g, extra_power=weight)


def density_extrema(state: FluidState) -> tuple[float, float]:
    return float(np.min(state.rho)), float(np.max(state.rho))


def _midpoint(before: FluidState, after: FluidState) -> FluidState:
    return FluidState(0.5 * (before.time + after.time), 0.5 * (before.rho + after.rho),
                      0.5 * (before.u + after.u), after.boundary)


def _check_pair(before, after, grid):
    if before.rho.shape != after.rho.shape or before.rho.size != grid.n_cells:
        raise UsageError("states do not live on the same grid")
    dt = after.time - before.time
    if not dt > 0:
        raise UsageError(f"states must be ordered in time, got dt={dt}")
    return dt


def energy_terms(state: FluidState, grid: RadialGrid, params: ModelParams) -> tuple[float, float]:
    """(dissipation, production) of the energy balance at one state."""
    N, alpha = grid.dim, params.alpha
    mu = state.rho**alpha
    u = state.u
    u_r = ddr(u, grid, ODD)
    c_geo = alpha * (N - 1) ** 2 - (N - 1) * (N - 2)
    dissipation = (alpha * grid.integrate(mu * u_r**2)
                   + c_geo * grid.integrate(mu * u**2, extra_power=-2.0))
    production = 2.0 * (N - 1) * (1.0 - alpha) * grid.integrate(mu * u * u_r, extra_power=-1.0)
    return dissipation, production


def energy_balance_residual(before: FluidState, after: FluidState, grid: RadialGrid,
                            params: ModelParams) -> Balance:
    dt = _check_pair(before, after, grid)
    e0 = sum(total_energy(before, grid, params))
    e1 = sum(total_energy(after, grid, params))
    dissipation, production = energy_terms(_midpoint(before, after), grid, params)
    rate = (e1 - e0) / dt
    return Balance(abs(rate + dissipation - production), rate, dissipation, production)


def bd_entropy_balance_residual(before: FluidState, after: FluidState, grid: RadialGrid,
                                params: ModelParams) -> Balance:
    dt = _check_pair(before, after, grid)

    def functional(s):
        return bd_kinetic(s, grid, params) + total_energy(s, grid, params)[1]

    rate = (functional(after) - functional(before)) / dt
    dissipation = bd_dissipation_rate(_midpoint(before, after), grid, params)
    return Balance(abs(rate + dissipation), rate, dissipation, 0.0)


def norm_field(name: str, state: FluidState, grid: RadialGrid, params: ModelParams) -> np.ndarray:
    if name == "rho":
        return state.rho
    if name == "rho_dev":
        if params.far_density is None:
            raise UsageError("rho_dev needs a far/reference density")
        return state.rho - params.far_density
    if name == "drho":
        return ddr(state.rho, grid, EVEN)
    if name == "u":
        return state.u
    if name == "w":
        return effective_velocity(state.rho, state.u, grid, params)
    raise UsageError(f"unknown norm field {name!r}")


def evaluate_norm(spec: NormSpec, state, grid, params, eta=None) -> float:
    xi = 0.5 * eta if spec.use_eta else spec.xi
    hi = grid.r_max if spec.hi is None else spec.hi
    values = norm_field(spec.field, state, grid, params)
    return weighted_lp_norm(values, grid, spec.p, xi, (spec.lo, hi))


def sample_all(state_prev: Optional[FluidState], state: FluidState, grid: RadialGrid,
               params: ModelParams, config: DiagnosticsConfig = None, dt: float = None,
               boundary_contamination: float = 0.0) -> DiagnosticsSample:
    """Evaluate every functional at ``state``.

    Balance residuals need the previous accepted state; without one
    (the initial sample) they are recorded as 0.
    """
    config = config or DiagnosticsConfig()
    kinetic, potential = total_energy(state, grid, params)
    lo, hi = density_extrema(state)
    if state_prev is not None:
        e_bal = energy_balance_residual(state_prev, state, grid, params)
        b_bal = bd_entropy_balance_residual(state_prev, state, grid, params)
        e_res, b_res, b_rate = e_bal.residual, b_bal.residual, b_bal.derivative
        if dt is None:
            dt = state.time - state_prev.time
    else:
        e_res = b_res = b_rate = 0.0
    return DiagnosticsSample(
        time=state.time,
        dt=0.0 if dt is None else dt,
        min_rho=lo,
        max_rho=hi,
        kinetic_energy=kinetic,
        potential_energy_total=potential,
        bd_kinetic=bd_kinetic(state, grid, params),
        bd_dissipation_rate=bd_dissipation_rate(state, grid, params),
        energy_balance_residual=e_res,
        bd_balance_residual=b_res,
        k_moments={k: k_moment(state, grid, k) for k in config.k_moments},
        weighted_norms={n.tag: evaluate_norm(n, state, grid, params, config.eta) for n in config.norms},
        grad_entropy_norm=entropy_gradient_norm(state, grid, params, config.entropy_weight),
        bd_derivative=b_rate,
        boundary_contamination=boundary_contamination,
    )

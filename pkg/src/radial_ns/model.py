"""Constitutive laws and pointwise residuals of the radial system.

    rho_t + (rho u)_r + (N-1) rho u / r = 0
    rho (u_t + u u_r) + P_r - alpha (r^{1-N} rho^alpha (r^{N-1} u)_r)_r
        + (N-1) (rho^alpha)_r u / r = 0

with P = a rho^gamma, mu = rho^alpha and lambda = (alpha - 1) rho^alpha.
Field operations use the stencils of :func:`radial_ns.grid.ddr`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDensityError, UsageError
from .grid import EVEN, ODD, FluidState, RadialGrid, check_positive, ddr
from .params import ModelParams


def _positive(rho, allow_zero=False):
    rho = np.asarray(rho, dtype=float)
    bad = rho < 0 if allow_zero else rho <= 0
    if np.any(bad) or np.any(np.isnan(rho)):
        raise DegenerateDensityError(f"density must be {'non-negative' if allow_zero else 'positive'}")
    return rho


@dataclass(frozen=True)
class ConstitutiveSet:
    params: ModelParams

    def pressure(self, rho):
        rho = _positive(rho)
        return self.params.pressure_coeff * rho**self.params.gamma

    def sound_speed(self, rho):
        p = self.params
        rho = _positive(rho)
        return np.sqrt(p.pressure_coeff * p.gamma * rho ** (p.gamma - 1.0))

    def viscosities(self, rho):
        """Shear and bulk coefficients ``(rho^alpha, (alpha - 1) rho^alpha)``."""
        rho = _positive(rho)
        mu = rho**self.params.alpha
        return mu, (self.params.alpha - 1.0) * mu

    def potential_energy(self, rho):
        """K(rho) = rho int_{rho~}^{rho} (P(s) - P(rho~)) / s^2 ds in closed form.

        K(rho~) = 0, K >= 0 and K is convex; K(0) = a rho~^gamma.
        """
        p = self.params
        if p.far_density is None:
            raise UsageError("potential energy needs a far-field/reference density")
        rho = _positive(rho, allow_zero=True)
        g, rt = p.gamma, p.far_density
        k = (rho**g - g * rho * rt ** (g - 1.0)) / (g - 1.0) + rt**g
        return p.pressure_coeff * k


def pressure(rho, params: ModelParams):
    return ConstitutiveSet(params).pressure(rho)


def viscosities(rho, params: ModelParams):
    return ConstitutiveSet(params).viscosities(rho)


def potential_energy(rho, params: ModelParams):
    return ConstitutiveSet(params).potential_energy(rho)


def effective_velocity(rho, u, grid: RadialGrid, params: ModelParams) -> np.ndarray:
    """w = u + rho^{-1} (rho^alpha)_r = u + alpha rho^(alpha-2) rho_r."""
    rho = np.asarray(rho, dtype=float)
    check_positive(rho)
    a = params.alpha
    return np.asarray(u, dtype=float) + a * rho ** (a - 2.0) * ddr(rho, grid, EVEN)


def mass_residual(state: FluidState, d_rho_dt, grid: RadialGrid, params: ModelParams = None) -> np.ndarray:
    """rho_t + (rho u)_r + (N-1) rho u / r, with (rho u)_r from an odd-parity stencil."""
    rho, u, r = state.rho, state.u, grid.cell_centers
    m = rho * u
    return np.asarray(d_rho_dt, dtype=float) + ddr(m, grid, ODD) + (grid.dim - 1) * m / r


def velocity_divergence(u, grid: RadialGrid) -> np.ndarray:
    """r^{1-N} (r^{N-1} u)_r = u_r + (N-1) u / r."""
    return ddr(u, grid, ODD) + (grid.dim - 1) * np.asarray(u) / grid.cell_centers


def viscous_force(rho, u, grid: RadialGrid, params: ModelParams) -> np.ndarray:
    """alpha (r^{1-N} rho^alpha (r^{N-1} u)_r)_r - (N-1) (rho^alpha)_r u / r."""
    mu = np.asarray(rho, dtype=float) ** params.alpha
    div = velocity_divergence(u, grid)
    return (params.alpha * ddr(mu * div, grid, EVEN)
            - (grid.dim - 1) * ddr(mu, grid, EVEN) * u / grid.cell_centers)


def momentum_residual(state: FluidState, d_u_dt, grid: RadialGrid, params: ModelParams) -> np.ndarray:
    rho, u = state.rho, state.u
    check_positive(rho)
    p_r = ddr(pressure(rho, params), grid, EVEN)
    return (rho * (np.asarray(d_u_dt, dtype=float) + u * ddr(u, grid, ODD)) + p_r
            - viscous_force(rho, u, grid, params))


def effective_velocity_residual(
    state: FluidState, w, d_w_dt, grid: RadialGrid, params: ModelParams, form: str = "A"
) -> np.ndarray:
    """Residual of the transport equation for w.

    form "A": rho w_t + rho u w_r + P_r
    form "B": rho w_t + rho u w_r + (a gamma / alpha) rho^(gamma+1-alpha) (w - u)
    """
    rho, u = state.rho, state.u
    check_positive(rho)
    w = np.asarray(w, dtype=float)
    base = rho * (np.asarray(d_w_dt, dtype=float) + u * ddr(w, grid, ODD))
    if form == "A":
        return base + ddr(pressure(rho, params), grid, EVEN)
    if form == "B":
        p = params
        coeff = p.pressure_coeff * p.gamma / p.alpha
        return base + coeff * rho ** (p.gamma + 1.0 - p.alpha) * (w - u)
    raise UsageError(f"unknown effective-velocity form {form!r}; use 'A' or 'B'")

"""Time integration of the radial system.

Layout: rho and u live at cell centres. The continuity equation is
advanced in flux form on the exact cell measures, so with a closed wall
the discrete mass sum(rho_i V_i) only changes by round-off. The momentum
equation is advanced in non-conservative form; its viscous part

    alpha (r^{1-N} rho^alpha (r^{N-1} u)_r)_r - (N-1) (rho^alpha)_r u / r

is assembled as a tridiagonal operator in u (divergence at faces, then
differenced), which is applied explicitly or solved implicitly.

Two ghost cells sit on each side. At the origin rho is mirrored and u
flips sign. Far field: ghosts are (rho~, 0). Ball: u is odd about the
wall (zero face velocity) and log(rho) is extrapolated linearly.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import NonFiniteError, UsageError
from .grid import FluidState, RadialGrid, check_positive
from .params import ModelParams

log = logging.getLogger(__name__)

ADVECTION = ("upwind1", "muscl-minmod")
VISCOUS = ("explicit", "semi-implicit")
INTEGRATORS = ("ssp-rk2", "forward-euler")

# (t, grid) -> (mass source, momentum source) at cell centres
Forcing = Callable[[float, RadialGrid], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class SchemeConfig:
    advection: str = "muscl-minmod"
    viscous_treatment: str = "explicit"
    time_integrator: str = "ssp-rk2"
    cfl_number: float = 0.4
    viscous_safety: float = 0.4

    def __post_init__(self):
        for value, allowed, name in ((self.advection, ADVECTION, "advection"),
                                     (self.viscous_treatment, VISCOUS, "viscous_treatment"),
                                     (self.time_integrator, INTEGRATORS, "time_integrator")):
            if value not in allowed:
                raise UsageError(f"{name} must be one of {allowed}, got {value!r}")
        if not 0.0 < self.cfl_number <= 1.0:
            raise UsageError(f"cfl_number must lie in (0, 1], got {self.cfl_number}")
        if not 0.0 < self.viscous_safety <= 1.0:
            raise UsageError(f"viscous_safety must lie in (0, 1], got {self.viscous_safety}")


@dataclass
class StepReport:
    dt_used: float
    advective_dt: float
    viscous_dt: float
    min_rho: float
    max_rho: float
    boundary_contamination: float
    step_accepted: bool
    # mass that left through the outer face during the step
    boundary_mass_flux: float = 0.0
    message: str = ""


class Ghosted(NamedTuple):
    rho: np.ndarray
    u: np.ndarray


def apply_boundary(state: FluidState, grid: RadialGrid, params: ModelParams) -> Ghosted:
    """Return (rho, u) padded with two ghost cells on each side."""
    return _ghosts(state.rho, state.u, params, state.boundary)


def _ghosts(rho, u, params, boundary) -> Ghosted:
    n = rho.size
    R = np.empty(n + 4)
    U = np.empty(n + 4)
    R[2:-2] = rho
    U[2:-2] = u
    R[1], R[0] = rho[0], rho[1]
    U[1], U[0] = -u[0], -u[1]
    if boundary == "ball":
        q = rho[-1] / rho[-2]
        R[-2] = rho[-1] * q
        R[-1] = rho[-1] * q * q
        U[-2], U[-1] = -u[-1], -u[-2]
    else:
        R[-2:] = params.far_density
        U[-2:] = 0.0
    return Ghosted(R, U)


def _minmod_slopes(F: np.ndarray) -> np.ndarray:
    """Limited slopes for extended cells 1..n+2 (index aligned with F)."""
    d = np.diff(F)
    a, b = d[:-1], d[1:]
    s = np.zeros_like(F)
    s[1:-1] = 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))
    return s


def _face_upwind(F, vel, advection):
    """Upwinded face values of an extended field at the n+1 physical faces."""
    if advection == "muscl-minmod":
        s = _minmod_slopes(F)
        left = F[1:-2] + 0.5 * s[1:-2]
        right = F[2:-1] - 0.5 * s[2:-1]
    else:
        left, right = F[1:-2], F[2:-1]
    return np.where(vel >= 0.0, left, right)


class _Geometry:
    """Per-grid constants reused every stage."""

    _cache: dict = {}

    def __init__(self, grid: RadialGrid):
        N, h = grid.dim, grid.dr
        self.area = grid.faces ** (N - 1)
        self.volume = np.asarray(grid.metric_weights)
        # face divergence u_r + (N-1) u / r from the two neighbouring cells
        with np.errstate(divide="ignore"):
            geo_term = 0.5 * (N - 1) / grid.faces
        cm = 1.0 / h - geo_term
        cp = 1.0 / h + geo_term
        # origin face: the divergence tends to N u_r with u odd
        cm[0] = N / h
        cp[0] = N / h
        self.cm, self.cp = cm, cp

    @classmethod
    def of(cls, grid):
        geo = cls._cache.get(grid)
        if geo is None:
            geo = cls._cache[grid] = cls(grid)
        return geo


def viscous_bands(R: np.ndarray, grid: RadialGrid, params: ModelParams, boundary: str):
    """Tridiagonal coefficients (lower, diag, upper) of the viscous force in u.

    ``lower[i]`` multiplies u[i-1] and ``upper[i]`` multiplies u[i+1];
    ``lower[0]`` and ``upper[-1]`` are zero. ``R`` is the ghosted density.
    """
    geo = _Geometry.of(grid)
    N, h, alpha = grid.dim, grid.dr, params.alpha
    mu = R**alpha
    mu_f = 0.5 * (mu[1:-2] + mu[2:-1])
    # D_f = cp_f u_right - cm_f u_left on faces 0..n
    g_f = alpha / h * mu_f
    mu_r = (mu[3:-1] - mu[1:-3]) / (2.0 * h)
    diag = -g_f[1:] * geo.cm[1:] - g_f[:-1] * geo.cp[:-1] - (N - 1) * mu_r / grid.cell_centers
    upper = np.zeros(grid.n_cells)
    lower = np.zeros(grid.n_cells)
    upper[:-1] = g_f[1:-1] * geo.cp[1:-1]
    lower[1:] = g_f[1:-1] * geo.cm[1:-1]
    # origin face: u_left = -u_0
    diag[0] -= g_f[0] * geo.cm[0]
    # outer face: cauchy ghost u = 0, ball ghost u = -u_{n-1}
    if boundary == "ball":
        diag[-1] -= g_f[-1] * geo.cp[-1]
    return lower, diag, upper


def _apply_bands(bands, u):
    lower, diag, upper = bands
    out = diag * u
    out[1:] += lower[1:] * u[:-1]
    out[:-1] += upper[:-1] * u[1:]
    return out


def stable_dt(state: FluidState, grid: RadialGrid, params: ModelParams, scheme: SchemeConfig = None):
    """(advective_dt, viscous_dt) before the CFL and safety factors are applied.

    advective: min dr / (|u| + c) with c = sqrt(a gamma rho^(gamma-1)).
    viscous:   min dr^2 / (2 nu) with nu = (1 + |alpha - 1|) rho^(alpha-1).
    """
    rho = state.rho
    check_positive(rho)
    p = params
    c = np.sqrt(p.pressure_coeff * p.gamma * rho ** (p.gamma - 1.0))
    top = float(np.max(np.abs(state.u) + c))
    adv = grid.dr / top if top > 0 else math.inf
    nu_max = (1.0 + abs(p.alpha - 1.0)) * float(np.min(rho)) ** (p.alpha - 1.0)
    visc = grid.dr**2 / (2.0 * nu_max)
    return adv, visc


def _bound(adv, visc, scheme):
    bound = scheme.cfl_number * adv
    if scheme.viscous_treatment == "explicit" or not math.isfinite(bound):
        # a pressure-free state at rest has no advective limit
        bound = min(bound, scheme.viscous_safety * visc)
    return bound


def max_stable_step(state, grid, params, scheme: SchemeConfig) -> float:
    return _bound(*stable_dt(state, grid, params, scheme), scheme)


def boundary_contamination(state: FluidState, grid: RadialGrid, params: ModelParams) -> float:
    """Largest relative deviation from (rho~, 0) over the outermost 5% of cells.

    Velocity is scaled by the far-field sound speed. Zero for the ball.
    """
    if state.boundary == "ball":
        return 0.0
    m = max(1, int(math.ceil(0.05 * grid.n_cells)))
    rt = params.far_density
    c = math.sqrt(params.pressure_coeff * params.gamma * rt ** (params.gamma - 1.0)) or 1.0
    drho = np.max(np.abs(state.rho[-m:] - rt)) / rt
    du = np.max(np.abs(state.u[-m:])) / c
    return float(max(drho, du))


def _stage(rho, u, t, dt, grid, params, scheme, boundary, forcing):
    """One forward-Euler stage; returns (rho, u, outflow rate) or None on vacuum."""
    geo = _Geometry.of(grid)
    R, U = _ghosts(rho, u, params, boundary)
    h = grid.dr

    u_face = 0.5 * (U[1:-2] + U[2:-1])
    if boundary == "ball":
        u_face[-1] = 0.0
    u_face[0] = 0.0
    flux = geo.area * u_face * _face_upwind(R, u_face, scheme.advection)
    drho = -(flux[1:] - flux[:-1]) / geo.volume

    u_up = _face_upwind(U, u_face, scheme.advection)
    adv = u * (u_up[1:] - u_up[:-1]) / h
    P = params.pressure_coeff * R**params.gamma
    p_r = (P[3:-1] - P[1:-3]) / (2.0 * h)
    accel = -adv - p_r / rho
    if forcing is not None:
        s_mass, s_mom = forcing(t, grid)
        drho = drho + s_mass
        accel = accel + s_mom / rho
    if scheme.viscous_treatment == "explicit":
        accel = accel + _apply_bands(viscous_bands(R, grid, params, boundary), u) / rho

    rho_new = rho + dt * drho
    if not math.isfinite(rho_new.sum() + accel.sum()):
        raise NonFiniteError(f"non-finite values in stage at t={t}")
    if rho_new.min() <= 0.0:
        return None
    u_new = u + dt * accel
    if scheme.viscous_treatment == "semi-implicit":
        R_new = _ghosts(rho_new, u, params, boundary).rho
        lower, diag, upper = viscous_bands(R_new, grid, params, boundary)
        ab = np.zeros((3, grid.n_cells))
        ab[0, 1:] = -dt * upper[:-1] / rho_new[:-1]
        ab[1] = 1.0 - dt * diag / rho_new
        ab[2, :-1] = -dt * lower[1:] / rho_new[1:]
        u_new = solve_banded((1, 1), ab, u_new)
    if not math.isfinite(u_new.sum()):
        raise NonFiniteError(f"non-finite velocity in stage at t={t}")
    return rho_new, u_new, flux[-1]


def step(
    state: FluidState,
    grid: RadialGrid,
    params: ModelParams,
    scheme: SchemeConfig,
    dt: Optional[float] = None,
    forcing: Optional[Forcing] = None,
):
    """Advance one step. Returns ``(new_state, StepReport)``.

    A step that would make the density non-positive is rejected: the
    input state is returned unchanged with ``step_accepted=False``.
    A ``dt`` above the stability bound is a usage error.
    """
    adv_dt, visc_dt = stable_dt(state, grid, params, scheme)
    bound = _bound(adv_dt, visc_dt, scheme)
    if dt is None:
        dt = bound
    elif not 0.0 < dt <= bound * (1.0 + 1e-12):
        raise UsageError(f"dt={dt!r} outside (0, stability bound {bound!r}]")

    rho0, u0, t0 = state.rho, state.u, state.time
    b = state.boundary
    s1 = _stage(rho0, u0, t0, dt, grid, params, scheme, b, forcing)
    outflow = None
    if s1 is not None:
        if scheme.time_integrator == "forward-euler":
            rho_n, u_n, outflow = s1
            outflow *= dt
        else:
            s2 = _stage(s1[0], s1[1], t0 + dt, dt, grid, params, scheme, b, forcing)
            if s2 is not None:
                rho_n = 0.5 * (rho0 + s2[0])
                u_n = 0.5 * (u0 + s2[1])
                outflow = 0.5 * dt * (s1[2] + s2[2])
    if outflow is None or not np.all(rho_n > 0.0):
        report = StepReport(dt, adv_dt, visc_dt, float(rho0.min()), float(rho0.max()),
                            boundary_contamination(state, grid, params), False,
                            message=f"vacuum breach at t={t0!r} with dt={dt!r}")
        log.warning(report.message)
        return state, report
    new = FluidState(t0 + dt, rho_n, u_n, b)
    report = StepReport(dt, adv_dt, visc_dt, float(rho_n.min()), float(rho_n.max()),
                        boundary_contamination(new, grid, params), True, float(outflow))
    return new, report


def total_mass(state: FluidState, grid: RadialGrid) -> float:
    return float(np.dot(state.rho, grid.metric_weights))


@dataclass
class RunResult:
    samples: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    n_steps: int = 0
    n_rejected: int = 0
    failed_step: Optional[int] = None
    failure: str = ""
    global_min_rho: float = math.inf
    global_max_rho: float = -math.inf
    final_state: Optional[FluidState] = None

    @property
    def completed(self) -> bool:
        return self.failed_step is None


def run(config, on_sample=None) -> RunResult:
    """Integrate ``config`` (a :class:`radial_ns.config.RunConfig`) to ``t_end``.

    Diagnostics and snapshots are taken at t = 0 and every
    ``snapshot_every``; steps inside each interval are equal so that the
    output times are hit without sliver steps. ``on_sample(state,
    sample)`` is called at each output time.
    """
    from .diagnostics import sample_all
    from .grid import make_initial_data

    params, grid, scheme = config.params, config.grid, config.scheme
    state = make_initial_data(config.initial, grid, params, config.boundary)
    result = RunResult()
    result.global_min_rho = float(state.rho.min())
    result.global_max_rho = float(state.rho.max())

    def emit(prev, cur, dt, contamination):
        sample = sample_all(prev, cur, grid, params, config.diagnostics, dt=dt,
                            boundary_contamination=contamination)
        result.samples.append(sample)
        result.snapshots.append(cur)
        if on_sample is not None:
            on_sample(cur, sample)

    emit(None, state, 0.0, boundary_contamination(state, grid, params))
    n_out = max(1, int(round(config.t_end / config.snapshot_every)))
    out_times = [min(config.t_end, k * config.snapshot_every) for k in range(1, n_out + 1)]
    if out_times[-1] < config.t_end:
        out_times.append(config.t_end)

    for t_next in out_times:
        prev, report = None, None
        while state.time < t_next * (1.0 - 1e-14):
            remaining = t_next - state.time
            limit = config.dt if config.dt is not None else max_stable_step(state, grid, params, scheme)
            n_sub = max(1, math.ceil(remaining / limit * (1.0 - 1e-12)))
            dt = remaining / n_sub
            try:
                new, report = step(state, grid, params, scheme, dt=dt)
            except Exception as exc:
                result.failed_step = result.n_steps
                result.failure = f"{type(exc).__name__}: {exc}"
                result.final_state = state
                exc.partial_result = result
                raise
            result.reports.append(report)
            if not report.step_accepted:
                result.n_rejected += 1
                result.failed_step = result.n_steps
                result.failure = report.message
                result.final_state = state
                return result
            result.n_steps += 1
            prev, state = state, new
            result.global_min_rho = min(result.global_min_rho, report.min_rho)
            result.global_max_rho = max(result.global_max_rho, report.max_rho)
        if prev is not None:
            emit(prev, state, report.dt_used, report.boundary_contamination)
    result.final_state = state
    return result

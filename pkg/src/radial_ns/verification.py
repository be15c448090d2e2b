"""Independent oracles: manufactured solutions, adaptive Simpson, FD stencils.

Built-in manufactured family (E = exp(-r^2)):

    rho* = rho~ + A exp(-t) E,     u* = B t r E

The forcing terms are the residuals of these fields in the radial
system; :func:`mms_sources` evaluates hand-derived closed forms and
:func:`mms_sources_fd` rebuilds them from a sixth-order stencil.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import QuadratureError, UsageError
from .grid import FluidState, RadialGrid, build_grid
from .params import ModelParams
from .solver import SchemeConfig, max_stable_step, step

ORDER_BANDS = {"muscl-minmod": (1.8, 2.2), "upwind1": (0.8, 1.2)}


def adaptive_quadrature(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                        max_depth: int = 60, max_evals: int = 2_000_000) -> float:
    """Adaptive Simpson rule with interval bisection and Richardson correction.

    Raises :class:`QuadratureError` (carrying the partial estimate) when
    the evaluation budget is exhausted or an interval cannot be split.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise UsageError("adaptive_quadrature needs a finite interval")
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    evals = 3
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        diff = left + right - s
        if abs(diff) <= 15.0 * eps or depth >= max_depth or not (lo < lm < mid < rm < hi):
            if depth >= max_depth and abs(diff) > 15.0 * eps:
                partial = sign * (total + left + right + diff / 15.0 + sum(x[5] for x in stack))
                raise QuadratureError(f"maximum depth reached near x={mid!r}", partial)
            total += left + right + diff / 15.0
            continue
        if evals > max_evals:
            partial = sign * (total + left + right + sum(x[5] for x in stack))
            raise QuadratureError("evaluation budget exhausted", partial)
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return sign * total


_FD6 = np.array([-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60])


def fd6(f: Callable, x, h: float = 1e-2):
    """Sixth-order central difference f'(x); ``f`` must accept arrays."""
    x = np.asarray(x, dtype=float)
    return sum(c * f(x + (j - 3) * h) for j, c in enumerate(_FD6) if c) / h


@dataclass(frozen=True)
class ManufacturedCase:
    amplitude: float = 0.2           # A
    velocity_amplitude: float = 4.0  # B
    far_density: float = 1.0
    t_max: float = 10.0

    def __post_init__(self):
        # rho* >= rho~ - |A| for t >= 0; keep above half the far density
        if self.amplitude < -0.5 * self.far_density:
            raise UsageError("manufactured density would drop below half the far density")

    @property
    def is_constant(self) -> bool:
        return self.amplitude == 0.0 and self.velocity_amplitude == 0.0

    def _check_time(self, t):
        if not 0.0 <= t <= self.t_max:
            raise UsageError(f"t={t} outside the manufactured validity window [0, {self.t_max}]")

    def rho(self, r, t):
        return self.far_density + self.amplitude * math.exp(-t) * np.exp(-np.asarray(r) ** 2)

    def u(self, r, t):
        r = np.asarray(r)
        return self.velocity_amplitude * t * r * np.exp(-(r**2))


CONSTANT_CASE = ManufacturedCase(amplitude=0.0, velocity_amplitude=0.0)


def mms_sources(case: ManufacturedCase, grid: RadialGrid, t: float, params: ModelParams):
    """(S_mass, S_mom) at the cell centres at time ``t``."""
    case._check_time(t)
    return _sources_closed_form(case, grid.cell_centers, t, params, grid.dim)


def _sources_closed_form(case, r, t, params, N):
    A, B = case.amplitude, case.velocity_amplitude
    a, g, al = params.pressure_coeff, params.gamma, params.alpha
    E = np.exp(-(r**2))
    decay = A * math.exp(-t)
    rho = case.far_density + decay * E
    rho_t = -decay * E
    rho_r = -2.0 * r * decay * E
    u = B * t * r * E
    u_t = B * r * E
    u_r = B * t * E * (1.0 - 2.0 * r**2)
    div = B * t * E * (N - 2.0 * r**2)              # u_r + (N-1) u / r
    div_r = -2.0 * B * t * r * E * (N + 2.0 - 2.0 * r**2)
    s_mass = rho_t + rho_r * u + rho * div
    mu_r = al * rho ** (al - 1.0) * rho_r
    s_mom = (rho * (u_t + u * u_r)
             + a * g * rho ** (g - 1.0) * rho_r
             - al * (mu_r * div + rho**al * div_r)
             + (N - 1) * mu_r * B * t * E)           # (rho^alpha)_r u / r
    return s_mass, s_mom


def mms_sources_fd(case: ManufacturedCase, r, t: float, params: ModelParams, dim: int, h: float = 1e-2):
    """Sources rebuilt by sixth-order differentiation of rho*, u* (oracle)."""
    r = np.asarray(r, dtype=float)
    a, g, al, N = params.pressure_coeff, params.gamma, params.alpha, dim

    def rho(x, s=t):
        return case.rho(x, s)

    def u(x, s=t):
        return case.u(x, s)

    def d_dt(fn):
        return sum(c * fn(r, t + (j - 3) * h) for j, c in enumerate(_FD6) if c) / h

    rho_t, u_t = d_dt(case.rho), d_dt(case.u)
    flux = fd6(lambda x: rho(x) * u(x), r, h)
    s_mass = rho_t + flux + (N - 1) * rho(r) * u(r) / r

    def grouped(x):
        inner = fd6(lambda y: y ** (N - 1) * u(y), x, h)
        return x ** (1 - N) * rho(x) ** al * inner

    s_mom = (rho(r) * (u_t + u(r) * fd6(u, r, h))
             + fd6(lambda x: a * rho(x) ** g, r, h)
             - al * fd6(grouped, r, h)
             + (N - 1) * fd6(lambda x: rho(x) ** al, r, h) * u(r) / r)
    return s_mass, s_mom


@dataclass
class ConvergenceResult:
    scheme: str
    n_cells: list
    dr: list
    err_rho: list
    err_u: list
    order_rho: float
    order_u: float
    exact: bool = False
    reliable: bool = True
    notes: list = field(default_factory=list)

    def passes(self, band: Optional[tuple[float, float]] = None) -> bool:
        if self.exact:
            return True
        band = band or ORDER_BANDS[self.scheme]
        return self.reliable and all(band[0] <= o <= band[1] for o in (self.order_rho, self.order_u))

    def pair_orders(self, errors):
        out = [math.nan]
        for i in range(1, len(errors)):
            if errors[i] > 0 and errors[i - 1] > 0:
                out.append(math.log(errors[i - 1] / errors[i]) / math.log(self.dr[i - 1] / self.dr[i]))
            else:
                out.append(math.nan)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n_cells,dr,err_rho,err_u,order_rho,order_u\n")
        o_rho, o_u = self.pair_orders(self.err_rho), self.pair_orders(self.err_u)
        for row in zip(self.n_cells, self.dr, self.err_rho, self.err_u, o_rho, o_u):
            buf.write(f"{row[0]}," + ",".join(f"{v:.17g}" for v in row[1:]) + "\n")
        fit = "exact" if self.exact else f"{self.order_rho:.17g},{self.order_u:.17g}"
        buf.write(f"# fitted_order,{fit}\n")
        buf.write(f"# reliable,{'true' if self.reliable else 'false'}\n")
        return buf.getvalue()


def _fit_order(dr, err) -> float:
    slope, _ = np.polyfit(np.log(dr), np.log(err), 1)
    return float(slope)


def mms_run(case: ManufacturedCase, params: ModelParams, scheme: SchemeConfig, n_cells: int,
            r_max: float = 6.0, t_end: float = 1.0, dt: Optional[float] = None):
    """Integrate the forced system from the exact data; returns (grid, final state)."""
    grid = build_grid(n_cells, r_max, params.dim)
    if params.far_density != case.far_density:
        raise UsageError("case and params disagree on the far density")
    state = FluidState(0.0, case.rho(grid.cell_centers, 0.0), case.u(grid.cell_centers, 0.0), "cauchy")
    if dt is None:
        dt = 0.5 * max_stable_step(state, grid, params, scheme)
    n_steps = max(1, math.ceil(t_end / dt))
    dt = t_end / n_steps

    def forcing(t, g):
        return mms_sources(case, g, t, params)

    for _ in range(n_steps):
        state, report = step(state, grid, params, scheme, dt=dt, forcing=forcing)
        if not report.step_accepted:
            raise UsageError(f"manufactured run rejected a step: {report.message}")
    return grid, state


def _errors(case, params, scheme, n, r_max, t_end, dt):
    grid, state = mms_run(case, params, scheme, n, r_max, t_end, dt=dt)
    r = grid.cell_centers
    e_rho = math.sqrt(grid.integrate((state.rho - case.rho(r, t_end)) ** 2))
    e_u = math.sqrt(grid.integrate((state.u - case.u(r, t_end)) ** 2))
    return grid.dr, e_rho, e_u


def convergence_study(case: ManufacturedCase, params: ModelParams, scheme: SchemeConfig,
                      grid_sizes: Sequence[int] = (128, 256, 512), r_max: float = 6.0,
                      t_end: float = 1.0, workers: int = 1) -> ConvergenceResult:
    """Weighted L2 errors of (rho, u) at ``t_end`` and least-squares log-log slopes.

    dt is tied to dr^2: 0.9 of the stable step on the coarsest grid, scaled
    by (dr / dr_coarse)^2 on the finer ones. With ``workers > 1`` the grid
    sizes run in separate processes; results do not depend on it.
    """
    sizes = sorted(int(n) for n in grid_sizes)
    if len(sizes) < 3:
        raise UsageError("convergence study needs at least three grid sizes")
    if any(b != 2 * a for a, b in zip(sizes, sizes[1:])):
        raise UsageError(f"grid sizes must double, got {sizes}")
    case._check_time(t_end)
    coarse = build_grid(sizes[0], r_max, params.dim)
    s0 = FluidState(0.0, case.rho(coarse.cell_centers, 0.0), case.u(coarse.cell_centers, 0.0))
    c = 0.9 * max_stable_step(s0, coarse, params, scheme) / coarse.dr**2

    jobs = [(case, params, scheme, n, r_max, t_end, c * (r_max / n) ** 2) for n in sizes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_errors, *zip(*jobs)))
    else:
        rows = [_errors(*job) for job in jobs]
    drs, e_rho, e_u = (list(col) for col in zip(*rows))

    result = ConvergenceResult(scheme.advection, sizes, drs, e_rho, e_u, math.nan, math.nan)
    if max(e_rho + e_u) < 1e-12:
        result.exact = True
        result.notes.append("errors at round-off")
        return result
    for name, errs in (("rho", e_rho), ("u", e_u)):
        if any(b >= a for a, b in zip(errs, errs[1:])):
            result.reliable = False
            result.notes.append(f"{name} errors not monotonically decreasing")
    result.order_rho = _fit_order(drs, e_rho)
    result.order_u = _fit_order(drs, e_u)
    return result

"""Radial cell-centred grid, field container and initial data.

Cells are ``[i*dr, (i+1)*dr]`` with centres ``(i + 1/2) dr``; there is no
node at the origin. The measure of cell ``i`` is the exact integral
``(r_{i+1/2}^N - r_{i-1/2}^N) / N`` of ``r^(N-1)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateDensityError, UsageError
from .params import ModelParams

EVEN = 1
ODD = -1


@dataclass(frozen=True, eq=False)
class RadialGrid:
    n_cells: int
    r_max: float
    dim: int
    dr: float = field(init=False)
    cell_centers: np.ndarray = field(init=False, repr=False)
    faces: np.ndarray = field(init=False, repr=False)
    metric_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dr = self.r_max / self.n_cells
        faces = dr * np.arange(self.n_cells + 1, dtype=float)
        faces[-1] = self.r_max
        centers = dr * (np.arange(self.n_cells, dtype=float) + 0.5)
        weights = np.diff(faces**self.dim) / self.dim
        for name, value in (("dr", dr), ("faces", faces), ("cell_centers", centers),
                            ("metric_weights", weights)):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def r(self) -> np.ndarray:
        return self.cell_centers

    def __eq__(self, other):
        if not isinstance(other, RadialGrid):
            return NotImplemented
        return (self.n_cells, self.r_max, self.dim) == (other.n_cells, other.r_max, other.dim)

    def __hash__(self):
        return hash((self.n_cells, self.r_max, self.dim))

    def integrate(self, values: np.ndarray, extra_power: float = 0.0) -> float:
        """Midpoint-in-cell quadrature of ``values * r^extra_power * r^(N-1) dr``."""
        w = self.metric_weights
        if extra_power:
            w = w * self.cell_centers**extra_power
        return float(np.dot(values, w))


def build_grid(n_cells: int, r_max: float, dim: int) -> RadialGrid:
    if int(n_cells) != n_cells or n_cells < 8:
        raise UsageError(f"n_cells must be an integer >= 8, got {n_cells!r}")
    if not r_max > 0:
        raise UsageError(f"r_max must be positive, got {r_max!r}")
    if dim not in (2, 3):
        raise UsageError(f"dim must be 2 or 3, got {dim!r}")
    return RadialGrid(int(n_cells), float(r_max), int(dim))


def ddr(f: np.ndarray, grid: RadialGrid, parity: Optional[int] = EVEN) -> np.ndarray:
    """Second-order radial derivative at cell centres.

    Centred differences in the interior, a one-sided three-point formula
    in the last cell, and at the first cell a mirror ghost ``parity*f[0]``
    (even fields reflect, odd fields flip sign). ``parity=None`` uses the
    one-sided formula at the inner end too.
    """
    f = np.asarray(f, dtype=float)
    h = grid.dr
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    if parity is None:
        out[0] = (3.0 * (f[1] - f[0]) - (f[2] - f[1])) / (2.0 * h)
    else:
        out[0] = (f[1] - parity * f[0]) / (2.0 * h)
    # written with differences so that constants give exactly zero
    out[-1] = (3.0 * (f[-1] - f[-2]) - (f[-2] - f[-3])) / (2.0 * h)
    return out


@dataclass
class FluidState:
    """Density and radial velocity at cell centres at one instant.

    ``boundary`` is ``"cauchy"`` (far-field truncation) or ``"ball"``.
    """

    time: float
    rho: np.ndarray
    u: np.ndarray
    boundary: str = "cauchy"

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.rho.shape != self.u.shape or self.rho.ndim != 1:
            raise UsageError(f"rho and u must be 1-D of equal length, got {self.rho.shape} and {self.u.shape}")
        if self.boundary not in ("cauchy", "ball"):
            raise UsageError(f"unknown boundary kind {self.boundary!r}")
        check_positive(self.rho)

    def copy(self) -> "FluidState":
        return replace(self, rho=self.rho.copy(), u=self.u.copy())


def check_positive(rho: np.ndarray, what: str = "density") -> None:
    if not np.all(rho > 0.0):
        i = int(np.argmin(np.where(np.isnan(rho), -np.inf, rho)))
        raise DegenerateDensityError(f"{what} not strictly positive at cell {i}: {rho[i]!r}")


@dataclass
class InitialDataSpec:
    """Initial profile description.

    Density kinds:
      constant        rho = far_density
      gaussian-bump   far + A [g(r - c) + g(r + c)],  g(s) = exp(-(s/width)^2)
      compacted-bump  far + A exp(1 - 1/(1 - s^2)) for |s| < 1, s = (r - c)/width, mirrored about 0
      custom-table    linear interpolation of ``table`` rows (r, rho, u)
    Velocity (non-table kinds): u = B r exp(-(r/velocity_width)^2).
    """

    kind: str = "constant"
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0
    far_density: float = 1.0
    velocity_amplitude: float = 0.0
    velocity_width: float = 1.0
    table: Optional[Sequence[Sequence[float]]] = None

    KINDS = ("constant", "gaussian-bump", "compacted-bump", "custom-table")


def _gaussian(s):
    return np.exp(-(s * s))


def _compact(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


def density_profile(spec: InitialDataSpec, r: np.ndarray) -> np.ndarray:
    """Density of a bump-type spec evaluated at radii ``r`` (mirrored so it is even in r)."""
    r = np.asarray(r, dtype=float)
    if spec.kind == "constant":
        return np.full_like(r, spec.far_density)
    if spec.kind not in ("gaussian-bump", "compacted-bump"):
        raise UsageError(f"no closed-form density for kind {spec.kind!r}")
    shape = _gaussian if spec.kind == "gaussian-bump" else _compact
    bump = shape((r - spec.center) / spec.width)
    if spec.center != 0.0:
        bump = bump + shape((r + spec.center) / spec.width)
    return spec.far_density + spec.amplitude * bump


def velocity_profile(spec: InitialDataSpec, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return spec.velocity_amplitude * r * np.exp(-((r / spec.velocity_width) ** 2))


def make_initial_data(
    spec: InitialDataSpec, grid: RadialGrid, params: ModelParams, boundary: str = "cauchy"
) -> FluidState:
    if spec.kind not in InitialDataSpec.KINDS:
        raise UsageError(f"unknown initial data kind {spec.kind!r}")
    if params.far_density is not None and spec.far_density != params.far_density:
        raise UsageError(
            f"initial far_density {spec.far_density} differs from model far_density {params.far_density}"
        )
    r = grid.cell_centers
    if spec.kind == "custom-table":
        if not spec.table:
            raise UsageError("custom-table initial data needs a table")
        tab = np.asarray(spec.table, dtype=float)
        if tab.ndim != 2 or tab.shape[1] != 3 or tab.shape[0] < 2:
            raise UsageError("custom table must have rows (r, rho, u), at least two of them")
        if np.any(np.diff(tab[:, 0]) <= 0):
            raise UsageError("custom table radii must be strictly increasing")
        rho = np.interp(r, tab[:, 0], tab[:, 1])
        u = np.interp(r, tab[:, 0], tab[:, 2])
    else:
        if spec.kind != "constant":
            if spec.width <= 0:
                raise UsageError(f"bump width must be positive, got {spec.width}")
            if spec.amplitude <= -spec.far_density:
                raise UsageError(
                    f"amplitude {spec.amplitude} <= -far_density would create vacuum"
                )
            tail = density_profile(replace(spec, far_density=0.0, amplitude=1.0), np.array([grid.r_max]))
            # only a truncated far field needs the bump to have decayed
            if boundary == "cauchy" and abs(tail[0]) > 1e-12:
                warnings.warn(
                    f"density bump has not decayed at r_max (relative size {tail[0]:.3g})",
                    stacklevel=2,
                )
        rho = density_profile(spec, r)
        u = velocity_profile(spec, r)
    if not np.all(rho > 0):
        raise UsageError("initial density is not strictly positive on the grid")
    return FluidState(0.0, rho, u, boundary)


def mass_coordinate(state: FluidState, grid: RadialGrid) -> np.ndarray:
    """Lagrangian mass coordinate y = int_0^r rho s^(N-1) ds at the cell faces.

    Returns ``n_cells + 1`` values starting with y(0) = 0.
    """
    check_positive(state.rho)
    y = np.empty(grid.n_cells + 1)
    y[0] = 0.0
    np.cumsum(state.rho * grid.metric_weights, out=y[1:])
    return y


def volume_from_mass_coordinate(y: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Cumulative int_0^y rho^{-1} dy' at the faces; equals r^N / N."""
    vol = np.empty_like(y)
    vol[0] = 0.0
    np.cumsum(np.diff(y) / rho, out=vol[1:])
    return vol


def weighted_lp_norm(
    values: np.ndarray,
    grid: RadialGrid,
    p: float = 2.0,
    weight_exponent: float = 0.0,
    interval: Optional[tuple[float, float]] = None,
) -> float:
    """(int_a^b |f|^p r^(xi p) r^(N-1) dr)^(1/p), or sup_{(a,b)} |f| r^xi for p = inf.

    Cells straddling an interval end contribute the exact measure of the
    overlap; the weight r^(xi p) is taken at the cell centre.
    """
    if not (p == math.inf or p >= 1.0):
        raise UsageError(f"p must lie in [1, inf], got {p!r}")
    a, b = (0.0, grid.r_max) if interval is None else interval
    a, b = max(a, 0.0), min(b, grid.r_max)
    if not b > a:
        raise UsageError(f"empty interval ({a}, {b})")
    lo = np.clip(grid.faces[:-1], a, b)
    hi = np.clip(grid.faces[1:], a, b)
    measure = (hi**grid.dim - lo**grid.dim) / grid.dim
    inside = measure > 0
    f = np.abs(np.asarray(values, dtype=float))
    r = grid.cell_centers
    if p == math.inf:
        return float(np.max(f[inside] * r[inside] ** weight_exponent))
    integrand = f**p * r ** (weight_exponent * p)
    return float(np.dot(integrand[inside], measure[inside]) ** (1.0 / p))

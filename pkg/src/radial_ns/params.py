"""Model constants and the (alpha, gamma) admissibility windows.

The lower bounds on the viscosity exponent come from two cubic
equations; both roots are computed numerically here rather than from
their nested-radical closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .errors import UsageError

# relative band inside which two theorem quantities are treated as equal
_STRICT_RTOL = 1e-12


class Regime(str, Enum):
    CAUCHY_2D = "cauchy-2d"
    CAUCHY_2D_WEIGHTED = "cauchy-2d-weighted"
    CAUCHY_3D = "cauchy-3d"
    BALL_3D = "ball-3d"

    @property
    def dim(self) -> int:
        return 3 if "3d" in self.value else 2

    @property
    def boundary(self) -> str:
        """Outer boundary kind used by the solver: ``"cauchy"`` or ``"ball"``."""
        return "ball" if self is Regime.BALL_3D else "cauchy"


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the barotropic model.

    ``pressure_coeff = 0`` is accepted as a pressure-free debug mode.
    ``far_density`` doubles as the reference density of the ball problem.
    """

    dim: int
    alpha: float
    gamma: float
    pressure_coeff: float = 1.0
    far_density: Optional[float] = 1.0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise UsageError(f"dim must be 2 or 3, got {self.dim!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise UsageError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        # mu + N*lambda >= 0 for mu = rho^alpha, lambda = (alpha-1) rho^alpha
        if 1.0 + self.dim * (self.alpha - 1.0) < 0.0:
            raise UsageError(
                f"alpha={self.alpha} violates mu + N*lambda >= 0 "
                f"(needs alpha >= {(self.dim - 1) / self.dim:.6g} for N={self.dim})"
            )
        if not self.gamma > 1.0:
            raise UsageError(f"gamma must exceed 1, got {self.gamma!r}")
        if not self.pressure_coeff >= 0.0:
            raise UsageError(f"pressure_coeff must be >= 0, got {self.pressure_coeff!r}")
        if self.far_density is not None and not self.far_density > 0.0:
            raise UsageError(f"far_density must be positive, got {self.far_density!r}")


@dataclass
class AdmissibilityReport:
    admissible: bool
    regime: Regime
    alpha_lower: float
    alpha_upper: float = 1.0
    gamma_lower: float = 1.0
    gamma_upper: float = math.inf
    violated_conditions: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "regime": self.regime.value,
            "alpha_lower": self.alpha_lower,
            "alpha_upper": self.alpha_upper,
            "gamma_lower": self.gamma_lower,
            # JSON has no infinity literal
            "gamma_upper": "inf" if math.isinf(self.gamma_upper) else self.gamma_upper,
            "violated_conditions": list(self.violated_conditions),
            "notes": list(self.notes),
        }

    def to_text(self) -> str:
        lines = [
            f"admissible: {'true' if self.admissible else 'false'}",
            f"regime: {self.regime.value}",
            f"alpha window: ({self.alpha_lower:.10g}, {self.alpha_upper:.10g})",
            f"gamma window: ({self.gamma_lower:.10g}, {self.gamma_upper:.10g})",
        ]
        if self.violated_conditions:
            lines.append("violated: " + ", ".join(self.violated_conditions))
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def strictly_less(a: float, b: float) -> bool:
    """``a < b`` where values equal up to round-off count as equal (so False)."""
    if math.isinf(b) and not math.isinf(a):
        return True
    return a < b and not math.isclose(a, b, rel_tol=_STRICT_RTOL, abs_tol=1e-15)


def _cubic_root(coeffs: tuple[float, float, float, float], lo: float, hi: float) -> float:
    c3, c2, c1, c0 = coeffs

    def p(k):
        return ((c3 * k + c2) * k + c1) * k + c0

    def dp(k):
        return (3.0 * c3 * k + 2.0 * c2) * k + c1

    plo = p(lo)
    if plo * p(hi) > 0:
        raise UsageError(f"no sign change of cubic on [{lo}, {hi}]")
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        pm = p(mid)
        if pm == 0.0:
            lo = hi = mid
            break
        if (pm < 0) == (plo < 0):
            lo, plo = mid, pm
        else:
            hi = mid
    k = 0.5 * (lo + hi)
    for _ in range(2):
        k -= p(k) / dp(k)
    return k


def root_k1() -> float:
    """Root of k^3 - 6k^2 + 8k - 4 in (2, inf); sets the 2D lower bound 1 - 2/k1."""
    return _cubic_root((1.0, -6.0, 8.0, -4.0), 4.0, 5.0)


def root_k2() -> float:
    """Root of 2k^3 - 9k^2 + 10k - 4 in (2, inf); sets the 3D lower bound 1 - 1/k2."""
    return _cubic_root((2.0, -9.0, 10.0, -4.0), 3.0, 4.0)


def f2(k: float) -> float:
    """Smallest alpha for which the k-th momentum moment closes when N = 2."""
    if not k > 2.0:
        raise UsageError(f"f2 needs k > 2, got {k!r}")
    # 1 - (2k sqrt(k-1) - 4k + 4) / (k-2)^2; with s = sqrt(k-1) the fraction
    # is 2s (s-1)^2 / ((s-1)(s+1))^2, which avoids cancellation near k = 2
    s = math.sqrt(k - 1.0)
    return 1.0 - 2.0 * s / (s + 1.0) ** 2


def g3(k: float) -> float:
    """Smallest alpha for which the k-th momentum moment closes when N = 3."""
    if not k > 2.0:
        raise UsageError(f"g3 needs k > 2, got {k!r}")
    # 1 - (sqrt(X) - 3k + 3) / (k-2)^2 with X = (k-1)(2k-1)(k+1); rationalising
    # gives X - 9(k-1)^2 = 2(k-1)(k-2)^2, so no cancellation near k = 2
    root = math.sqrt((k - 1.0) * (2.0 * k - 1.0) * (k + 1.0))
    return 1.0 - 2.0 * (k - 1.0) / (root + 3.0 * (k - 1.0))


def momentum_exponent_ok(params: ModelParams, k: float) -> bool:
    """Whether the k-moment coercivity inequality holds strictly.

    N=2: k^2 (1-alpha)^2 < 4 (k-1) alpha^2
    N=3: k^2 (1-alpha)^2 < (4 alpha - 2)(k-1) alpha
    """
    if k < 3.0:
        raise UsageError(f"k must be >= 3, got {k!r}")
    a = params.alpha
    lhs = k * k * (1.0 - a) ** 2
    if params.dim == 2:
        rhs = 4.0 * (k - 1.0) * a * a
    else:
        rhs = (4.0 * a - 2.0) * (k - 1.0) * a
    return strictly_less(lhs, rhs)


_ALPHA_LOWER: dict[Regime, Callable[[], float]] = {
    Regime.CAUCHY_2D: lambda: 1.0 - 2.0 / root_k1(),
    Regime.CAUCHY_2D_WEIGHTED: lambda: 9.0 - 6.0 * math.sqrt(2.0),
    Regime.CAUCHY_3D: lambda: 1.0 - 1.0 / root_k2(),
    Regime.BALL_3D: lambda: 1.0 - 1.0 / root_k2(),
}


def check_admissibility(
    params: ModelParams, regime: Regime | str, eta: Optional[float] = None
) -> AdmissibilityReport:
    """Test (alpha, gamma[, eta]) against the global-existence window of ``regime``.

    All windows are open intervals; a value equal to a bound (up to
    round-off) is reported as a violation.
    """
    regime = Regime(regime)
    if regime.dim != params.dim:
        raise UsageError(f"regime {regime.value} requires N={regime.dim}, params have N={params.dim}")
    weighted = regime is Regime.CAUCHY_2D_WEIGHTED
    if weighted and eta is None:
        raise UsageError("regime cauchy-2d-weighted requires eta")
    if not weighted and eta is not None:
        raise UsageError(f"eta is only meaningful for cauchy-2d-weighted, not {regime.value}")

    alpha_lower = _ALPHA_LOWER[regime]()
    gamma_upper = math.inf if regime.dim == 2 else 6.0 * params.alpha - 3.0
    report = AdmissibilityReport(
        admissible=False, regime=regime, alpha_lower=alpha_lower, gamma_upper=gamma_upper
    )
    bad = report.violated_conditions
    if not strictly_less(alpha_lower, params.alpha):
        bad.append("alpha_lower")
    if not strictly_less(params.alpha, 1.0):
        bad.append("alpha_upper")
    if not strictly_less(1.0, params.gamma):
        bad.append("gamma_lower")
    if not strictly_less(params.gamma, gamma_upper):
        bad.append("gamma_upper")
    if weighted and not (1.0 / 3.0 <= eta <= 1.0):
        bad.append("eta_range")
    if params.pressure_coeff != 1.0:
        report.notes.append("thresholds stated for a=1")
    report.admissible = not bad
    return report

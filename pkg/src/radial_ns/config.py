"""Run configuration: INI-style text with sections, parsed and serialized.

Layout::

    [model]        dim, alpha, gamma, pressure_coeff, far_density
    [regime]       name, policy (warn | enforce)
    [grid]         n_cells, r_max
    [scheme]       advection, viscous_treatment, time_integrator, cfl_number, viscous_safety
    [initial]      kind, amplitude, center, width, velocity_amplitude, velocity_width, table
    [run]          t_end, snapshot_every, dt (optional), output_dir
    [diagnostics]  k_moments, eta (optional), entropy_weight
    [norm:<tag>]   field, p, xi, lo, hi (optional), use_eta

``table`` rows are separated by ``;`` and hold ``r rho u``.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .diagnostics import DiagnosticsConfig, NormSpec
from .errors import ConfigError, UsageError
from .grid import InitialDataSpec, RadialGrid, build_grid
from .params import AdmissibilityReport, ModelParams, Regime, check_admissibility
from .solver import SchemeConfig

POLICIES = ("warn", "enforce")

_KNOWN = {
    "model": {"dim", "alpha", "gamma", "pressure_coeff", "far_density"},
    "regime": {"name", "policy"},
    "grid": {"n_cells", "r_max"},
    "scheme": {"advection", "viscous_treatment", "time_integrator", "cfl_number", "viscous_safety"},
    "initial": {"kind", "amplitude", "center", "width", "velocity_amplitude", "velocity_width", "table"},
    "run": {"t_end", "snapshot_every", "dt", "output_dir"},
    "diagnostics": {"k_moments", "eta", "entropy_weight"},
}
_NORM_KEYS = {"field", "p", "xi", "lo", "hi", "use_eta"}
_REQUIRED = {"model": ("dim", "alpha", "gamma"), "regime": ("name",), "grid": ("n_cells", "r_max"),
             "run": ("t_end", "snapshot_every")}


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    regime: Regime
    grid: RadialGrid
    t_end: float
    snapshot_every: float
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    initial: InitialDataSpec = field(default_factory=InitialDataSpec)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output_dir: str = "out"
    policy: str = "warn"
    dt: Optional[float] = None

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise UsageError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if self.params.dim != self.regime.dim:
            raise UsageError(f"regime {self.regime.value} needs dim={self.regime.dim}, got {self.params.dim}")
        if self.grid.dim != self.params.dim:
            raise UsageError("grid and model disagree on dim")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise UsageError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.snapshot_every <= self.t_end:
            raise UsageError(f"snapshot_every must lie in (0, t_end], got {self.snapshot_every}")
        if self.dt is not None and not self.dt > 0:
            raise UsageError(f"dt must be positive, got {self.dt}")
        if self.params.far_density is None:
            raise UsageError("runs need a far density")
        if self.initial.far_density != self.params.far_density:
            raise UsageError("initial far_density must equal the model far_density")
        if self.regime is Regime.CAUCHY_2D_WEIGHTED and self.diagnostics.eta is None:
            raise UsageError("the weighted regime needs eta in [diagnostics]")

    @property
    def boundary(self) -> str:
        return self.regime.boundary

    def admissibility(self) -> AdmissibilityReport:
        eta = self.diagnostics.eta if self.regime is Regime.CAUCHY_2D_WEIGHTED else None
        return check_admissibility(self.params, self.regime, eta)

    def validate_for_run(self) -> AdmissibilityReport:
        """Admissibility report; raises under ``policy = enforce`` when not admissible."""
        report = self.admissibility()
        if self.policy == "enforce" and not report.admissible:
            raise UsageError("parameters are not admissible: " + ", ".join(report.violated_conditions))
        return report


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "inf" if x == math.inf else repr(x)
    return str(x)


def to_text(cfg: RunConfig) -> str:
    """Serialize ``cfg``; :func:`parse_text` of the result gives back an equal config."""
    p, s, ini, d = cfg.params, cfg.scheme, cfg.initial, cfg.diagnostics
    sections = [
        ("model", [("dim", p.dim), ("alpha", p.alpha), ("gamma", p.gamma),
                   ("pressure_coeff", p.pressure_coeff), ("far_density", p.far_density)]),
        ("regime", [("name", cfg.regime.value), ("policy", cfg.policy)]),
        ("grid", [("n_cells", cfg.grid.n_cells), ("r_max", cfg.grid.r_max)]),
        ("scheme", [("advection", s.advection), ("viscous_treatment", s.viscous_treatment),
                    ("time_integrator", s.time_integrator), ("cfl_number", s.cfl_number),
                    ("viscous_safety", s.viscous_safety)]),
    ]
    init = [("kind", ini.kind), ("amplitude", ini.amplitude), ("center", ini.center),
            ("width", ini.width), ("velocity_amplitude", ini.velocity_amplitude),
            ("velocity_width", ini.velocity_width)]
    if ini.table:
        init.append(("table", "; ".join(" ".join(_fmt(float(v)) for v in row) for row in ini.table)))
    sections.append(("initial", init))
    run = [("t_end", cfg.t_end), ("snapshot_every", cfg.snapshot_every)]
    if cfg.dt is not None:
        run.append(("dt", cfg.dt))
    run.append(("output_dir", cfg.output_dir))
    sections.append(("run", run))
    diag = [("k_moments", ", ".join(_fmt(float(k)) for k in d.k_moments))]
    if d.eta is not None:
        diag.append(("eta", d.eta))
    diag.append(("entropy_weight", d.entropy_weight))
    sections.append(("diagnostics", diag))
    for n in d.norms:
        keys = [("field", n.field), ("p", n.p), ("xi", n.xi), ("lo", n.lo)]
        if n.hi is not None:
            keys.append(("hi", n.hi))
        keys.append(("use_eta", n.use_eta))
        sections.append((f"norm:{n.tag}", keys))
    out = []
    for name, keys in sections:
        out.append(f"[{name}]")
        out.extend(f"{k} = {_fmt(v)}" for k, v in keys)
        out.append("")
    return "\n".join(out)


_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _line_map(text: str) -> dict:
    """{(section, key): line} and {(section, None): line} for error messages."""
    lines, section = {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        m = _SECTION.match(raw)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), no)
            continue
        m = _KEY.match(raw)
        if m and section is not None and not raw[:1].isspace():
            lines.setdefault((section, m.group(1).strip().lower()), no)
    return lines


class _Reader:
    def __init__(self, cp, lines):
        self.cp, self.lines = cp, lines

    def line(self, section, key=None):
        return self.lines.get((section, key), self.lines.get((section, None)))

    def raw(self, section, key, default=None):
        """Stripped value; an empty value counts as absent."""
        value = None
        if self.cp.has_section(section) and self.cp.has_option(section, key):
            value = self.cp.get(section, key).strip() or None
        if value is None:
            if default is _MISSING:
                raise ConfigError(f"[{section}] is missing required key {key!r}", self.line(section))
            return default
        return value

    def num(self, section, key, default=None, kind=float):
        text = self.raw(section, key, default if default is _MISSING else None)
        if text is None:
            return default
        try:
            value = float(text) if kind is float else int(text)
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {text!r} is not a valid {kind.__name__}",
                              self.line(section, key)) from None
        if kind is float and math.isnan(value):
            raise ConfigError(f"[{section}] {key} is NaN", self.line(section, key))
        return value

    def flag(self, section, key, default=False):
        text = self.raw(section, key, default if default is _MISSING else None)
        if text is None:
            return default
        low = text.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"[{section}] {key} = {text!r} is not a boolean", self.line(section, key))


_MISSING = object()


def _table(text, reader):
    rows = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        try:
            row = tuple(float(v) for v in chunk.split())
        except ValueError:
            raise ConfigError(f"bad table row {chunk.strip()!r}", reader.line("initial", "table")) from None
        if len(row) != 3:
            raise ConfigError(f"table rows need 3 values (r rho u), got {chunk.strip()!r}",
                              reader.line("initial", "table"))
        rows.append(row)
    return tuple(rows)


def parse_text(text: str) -> RunConfig:
    """Parse configuration text. Errors carry the offending line number when known."""
    lines = _line_map(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line) from None
    rd = _Reader(cp, lines)

    for section in cp.sections():
        if section.startswith("norm:"):
            allowed = _NORM_KEYS
        elif section in _KNOWN:
            allowed = _KNOWN[section]
        else:
            raise ConfigError(f"unknown section [{section}]", rd.line(section))
        for key in cp.options(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{section}]", rd.line(section, key))
    for section, keys in _REQUIRED.items():
        if not cp.has_section(section):
            raise ConfigError(f"missing section [{section}]")
        for key in keys:
            rd.raw(section, key, _MISSING)

    def build(section, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except UsageError as exc:
            raise ConfigError(f"[{section}] {exc}", rd.line(section)) from None

    far = rd.num("model", "far_density", 1.0)
    params = build("model", lambda: ModelParams(
        dim=rd.num("model", "dim", _MISSING, int), alpha=rd.num("model", "alpha"),
        gamma=rd.num("model", "gamma"), pressure_coeff=rd.num("model", "pressure_coeff", 1.0),
        far_density=far))
    name = rd.raw("regime", "name")
    try:
        regime = Regime(name)
    except ValueError:
        raise ConfigError(f"unknown regime {name!r}; choose from {[r.value for r in Regime]}",
                          rd.line("regime", "name")) from None
    grid = build("grid", lambda: build_grid(rd.num("grid", "n_cells", kind=int), rd.num("grid", "r_max"),
                                            params.dim))
    defaults = SchemeConfig()
    scheme = build("scheme", lambda: SchemeConfig(
        advection=rd.raw("scheme", "advection", defaults.advection),
        viscous_treatment=rd.raw("scheme", "viscous_treatment", defaults.viscous_treatment),
        time_integrator=rd.raw("scheme", "time_integrator", defaults.time_integrator),
        cfl_number=rd.num("scheme", "cfl_number", defaults.cfl_number),
        viscous_safety=rd.num("scheme", "viscous_safety", defaults.viscous_safety)))

    kind = rd.raw("initial", "kind", "constant")
    if kind not in InitialDataSpec.KINDS:
        raise ConfigError(f"unknown initial kind {kind!r}", rd.line("initial", "kind"))
    table_text = rd.raw("initial", "table")
    table = _table(table_text, rd) if table_text else None
    initial = InitialDataSpec(
        kind=kind, amplitude=rd.num("initial", "amplitude", 0.0), center=rd.num("initial", "center", 0.0),
        width=rd.num("initial", "width", 1.0), far_density=far,
        velocity_amplitude=rd.num("initial", "velocity_amplitude", 0.0),
        velocity_width=rd.num("initial", "velocity_width", 1.0), table=table)

    norms = []
    for section in cp.sections():
        if section.startswith("norm:"):
            tag = section[len("norm:"):].strip()
            norms.append(build(section, lambda s=section, t=tag: NormSpec(
                tag=t, field=rd.raw(s, "field", "rho_dev"), p=rd.num(s, "p", 2.0), xi=rd.num(s, "xi", 0.0),
                lo=rd.num(s, "lo", 0.0), hi=rd.num(s, "hi"), use_eta=rd.flag(s, "use_eta"))))
    k_text = rd.raw("diagnostics", "k_moments")
    if k_text is None:
        k_moments = DiagnosticsConfig().k_moments
    else:
        try:
            k_moments = tuple(float(v) for v in k_text.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"bad k_moments {k_text!r}", rd.line("diagnostics", "k_moments")) from None
    diagnostics = build("diagnostics", lambda: DiagnosticsConfig(
        k_moments=k_moments, norms=tuple(norms), eta=rd.num("diagnostics", "eta"),
        entropy_weight=rd.num("diagnostics", "entropy_weight", 0.0)))

    return build("run", lambda: RunConfig(
        params=params, regime=regime, grid=grid, scheme=scheme, initial=initial, diagnostics=diagnostics,
        t_end=rd.num("run", "t_end"), snapshot_every=rd.num("run", "snapshot_every"),
        dt=rd.num("run", "dt"), output_dir=rd.raw("run", "output_dir", "out"),
        policy=rd.raw("regime", "policy", "warn")))


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_text(text)

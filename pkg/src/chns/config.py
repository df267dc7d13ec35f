"""Flat `section.key = value` run configuration.

The format is deliberately diff-friendly: one dotted key per line, `#`
comments, no nesting.  Unknown keys are rejected; every constraint error
names the offending key.  `serialize_config(parse_config(text))` is a
fixed point after one normalization pass.
"""

from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .grid import Grid
from .materials import (
    constant_mobility,
    degenerate_mobility,
    logarithmic_potential,
    regular_potential,
    regularize_mobility,
    regularize_potential,
)
from .solver import ForcingSpec, Simulation, SolverParams, initial_state

__all__ = ["RunConfig", "parse_config", "serialize_config", "build_simulation"]

_POTENTIAL_KINDS = ("regular", "logarithmic", "regularized")
_MOBILITY_KINDS = ("constant", "degenerate", "clamped")
_FORCING_KINDS = ("zero", "steady", "time_profile")
_VELOCITY_KINDS = ("zero", "vortex")

# key -> (type tag, default); type tags: int, float, str, auto (float or "auto")
_SCHEMA = {
    "grid.dim": ("int", 2),
    "grid.n": ("int", 64),
    "time.dt": ("float", 1e-4),
    "time.t_final": ("float", 0.1),
    "physics.nu": ("float", 1.0),
    "physics.beta": ("float", 1.0),
    "physics.r": ("float", 3.0),
    "potential.kind": ("str", "regular"),
    "potential.theta": ("float", 0.15),
    "potential.theta_c": ("float", 0.3),
    "potential.epsilon": ("float", 0.1),
    "potential.c0": ("auto", "auto"),
    "mobility.kind": ("str", "constant"),
    "mobility.n": ("int", 1),
    "mobility.epsilon": ("float", 0.1),
    "forcing.kind": ("str", "zero"),
    "forcing.amplitude": ("float", 0.0),
    "forcing.omega": ("float", 6.283185307179586),
    "init.phi_mean": ("float", 0.0),
    "init.noise_amp": ("float", 0.05),
    "init.seed": ("int", 1234),
    "init.velocity": ("str", "zero"),
    "init.velocity_amp": ("float", 0.1),
    "output.dir": ("str", "out"),
    "output.every_k_steps": ("int", 10),
    "solver.poisson_tol": ("float", 1e-10),
    "solver.ch_tol": ("float", 1e-10),
    "solver.max_inner_iters": ("int", 50),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated key/value store for one simulation."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def with_updates(self, **dotted):
        """New config with `key__sub` style or dotted-key overrides applied."""
        vals = dict(self.values)
        for key, val in dotted.items():
            key = key.replace("__", ".")
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            vals[key] = _coerce(key, val if isinstance(val, str) else repr(val))
        cfg = RunConfig(vals)
        _validate(cfg)
        return cfg


def _coerce(key, raw):
    tag = _SCHEMA[key][0]
    raw = raw.strip()
    try:
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "auto":
            return "auto" if raw == "auto" else float(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse value {raw!r}") from exc
    return raw


def _strip_comment(line):
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def parse_extended(text, extra_schema=None):
    """Parse config text; `extra_schema` adds keys (used by plan files).

    Returns (RunConfig, extras dict with the extra-schema values).
    """
    schema = dict(_SCHEMA)
    extra_schema = extra_schema or {}
    schema.update(extra_schema)
    values = {k: v for k, (_, v) in _SCHEMA.items()}
    extras = {k: v for k, (_, v) in extra_schema.items()}

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in schema:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        tag = schema[key][0]
        if key in extra_schema:
            extras[key] = _coerce_extra(key, raw, tag, lineno)
        else:
            try:
                values[key] = _coerce(key, raw)
            except ConfigError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from None

    cfg = RunConfig(values)
    _validate(cfg)
    return cfg, extras


def _coerce_extra(key, raw, tag, lineno):
    raw = raw.strip()
    try:
        if tag == "float_list":
            items = [s for s in raw.replace(",", " ").split() if s]
            return [float(s) for s in items]
        if tag == "int_list":
            items = [s for s in raw.replace(",", " ").split() if s]
            return [int(s) for s in items]
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: key {key!r}: cannot parse {raw!r}") from exc


def parse_config(text):
    """Parse and validate a run configuration; empty text gives defaults."""
    cfg, _ = parse_extended(text)
    return cfg


def serialize_config(cfg):
    """Canonical text form: sorted keys, one per line."""
    lines = []
    for key in sorted(cfg.values):
        val = cfg.values[key]
        lines.append(f"{key} = {val!r}" if isinstance(val, float) else f"{key} = {val}")
    return "\n".join(lines) + "\n"


def _fail(key, message):
    raise ConfigError(f"key {key!r}: {message}")


def _validate(cfg):
    v = cfg.values
    if v["grid.dim"] not in (2, 3):
        _fail("grid.dim", f"must be 2 or 3, got {v['grid.dim']}")
    if v["grid.n"] < 8:
        _fail("grid.n", f"must be >= 8, got {v['grid.n']}")
    if v["grid.dim"] == 3 and v["grid.n"] > 32:
        _fail("grid.n", f"3D runs are supported up to n = 32, got {v['grid.n']}")
    if v["time.dt"] <= 0:
        _fail("time.dt", "must be positive")
    if v["time.t_final"] <= 0:
        _fail("time.t_final", "must be positive")
    if v["physics.nu"] <= 0:
        _fail("physics.nu", "viscosity must be positive")
    if v["physics.beta"] < 0:
        _fail("physics.beta", "damping coefficient must be >= 0")
    if v["physics.r"] < 1:
        _fail("physics.r", f"absorption exponent must satisfy r >= 1, got {v['physics.r']}")
    if v["potential.kind"] not in _POTENTIAL_KINDS:
        _fail("potential.kind", f"must be one of {_POTENTIAL_KINDS}")
    if not 0 < v["potential.theta"]:
        _fail("potential.theta", "temperature must be positive")
    if not v["potential.theta"] < v["potential.theta_c"]:
        _fail(
            "potential.theta_c",
            f"need 0 < theta < theta_c, got theta={v['potential.theta']}, "
            f"theta_c={v['potential.theta_c']}",
        )
    if not 0 < v["potential.epsilon"] <= 0.5:
        _fail("potential.epsilon", "must lie in (0, 0.5]")
    if v["potential.c0"] != "auto" and v["potential.c0"] <= 0:
        _fail("potential.c0", "must be 'auto' or positive")
    if v["mobility.kind"] not in _MOBILITY_KINDS:
        _fail("mobility.kind", f"must be one of {_MOBILITY_KINDS}")
    if v["mobility.n"] < 1:
        _fail("mobility.n", "degeneracy exponent must be >= 1")
    if not 0 < v["mobility.epsilon"] <= 0.5:
        _fail("mobility.epsilon", "must lie in (0, 0.5]")
    if v["forcing.kind"] not in _FORCING_KINDS:
        _fail("forcing.kind", f"must be one of {_FORCING_KINDS}")
    if v["init.noise_amp"] < 0:
        _fail("init.noise_amp", "must be >= 0")
    if v["init.velocity"] not in _VELOCITY_KINDS:
        _fail("init.velocity", f"must be one of {_VELOCITY_KINDS}")
    if v["potential.kind"] == "logarithmic":
        reach = abs(v["init.phi_mean"]) + v["init.noise_amp"]
        if reach >= 1.0:
            _fail(
                "init.noise_amp",
                f"|phi_mean| + noise_amp = {reach} must stay below 1 "
                "for the logarithmic potential",
            )
    if v["output.every_k_steps"] < 1:
        _fail("output.every_k_steps", "must be >= 1")
    if v["solver.poisson_tol"] <= 0:
        _fail("solver.poisson_tol", "must be positive")
    if v["solver.ch_tol"] <= 0:
        _fail("solver.ch_tol", "must be positive")
    if v["solver.max_inner_iters"] < 1:
        _fail("solver.max_inner_iters", "must be >= 1")


def build_materials(cfg):
    """(potential, mobility) pair for a validated config."""
    v = cfg.values
    kind = v["potential.kind"]
    if kind == "regular":
        c0 = 4.0 if v["potential.c0"] == "auto" else v["potential.c0"]
        pot = regular_potential(c0=c0)
    else:
        pot = logarithmic_potential(v["potential.theta"], v["potential.theta_c"])
        if v["potential.c0"] != "auto":
            pot = replace(pot, c0=v["potential.c0"])
        if kind == "regularized":
            pot = regularize_potential(pot, v["potential.epsilon"])

    mkind = v["mobility.kind"]
    if mkind == "constant":
        mob = constant_mobility(1.0)
    else:
        # raw degenerate mobility never enters the stepper: both the
        # "degenerate" and "clamped" kinds go through the clamp with the
        # configured epsilon.
        mob = regularize_mobility(degenerate_mobility(v["mobility.n"]), v["mobility.epsilon"])
    return pot, mob


def build_params(cfg):
    v = cfg.values
    forcing = ForcingSpec(
        kind=v["forcing.kind"],
        amplitude=v["forcing.amplitude"],
        omega=v["forcing.omega"],
    )
    return SolverParams(
        nu=v["physics.nu"],
        beta=v["physics.beta"],
        r=v["physics.r"],
        dt=v["time.dt"],
        t_final=v["time.t_final"],
        poisson_tol=v["solver.poisson_tol"],
        ch_tol=v["solver.ch_tol"],
        max_inner_iters=v["solver.max_inner_iters"],
        forcing=forcing,
    )


def build_simulation(cfg):
    """Grid, materials, params and initial state assembled into a Simulation."""
    v = cfg.values
    grid = Grid(v["grid.dim"], v["grid.n"])
    pot, mob = build_materials(cfg)
    params = build_params(cfg)
    state = initial_state(
        grid,
        pot,
        phi_mean=v["init.phi_mean"],
        noise_amp=v["init.noise_amp"],
        seed=v["init.seed"],
        velocity=v["init.velocity"],
        velocity_amp=v["init.velocity_amp"],
        poisson_tol=v["solver.poisson_tol"],
    )
    return Simulation(grid, params, pot, mob, state)

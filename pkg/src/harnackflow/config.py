"""Scenario configuration: a strict line-oriented ``key = value`` grammar.

The format is deliberately dependency-free and bit-exactly documented:
``[section]`` headers, ``key = value`` lines, ``#`` comments (whole-line
or trailing), blank lines ignored.  Unknown sections or keys are errors;
there are no silent defaults for misspellings.

Sections and keys (defaults in parentheses):

    [geometry]
      kind        rot_sphere | torus                (required)
      n           grid resolution                   (128)
      length      torus side L                      (2*pi)
      radius      sphere initial round radius r0    (1.0)
      phi_mode    round | cos_theta | sine_xy       (round)
      phi_amp     perturbation amplitude            (0.0)

    [initial]
      id          constant | cos_theta | sine_x | sine_xy   (constant)
      f0          constant part of f                (0.5)
      amp         perturbation amplitude            (0.0)

    [flow]
      variant     with_potential | plain_heat | general     (with_potential)
      c           reaction coefficient, df/dt = lap f - c R f
                  (from variant; required for general)
      t_end       final time                        (required)
      dt          time step, or auto                (auto)
      dt_out      output spacing                    (t_end / 40)
      t0          monitor start time, or auto       (auto: first output
                                                     after 0.05 * t_end)
      evolve_metric   true | false                  (true)

    [monitors]
      d           constant in the P and W quantities  (1.0)
      enable      auto | comma list of monitor columns (auto)

    [identities]
      enable      true | false                      (false)
      presets     comma list of general_H, cor_H, general_P,
                  cor_tP, surface, grad             (all)
      fuzz_count  random tuples at the coarsest level (0)
      t_check     snapshot time for residuals, or auto (auto: output
                                                     nearest t_end / 2)

    [action]
      enable      true | false                      (false)
      pair_count  random space-time pairs           (0)
      pairs       semicolon list of "x1,t1,x2,t2"   (empty)
      window      per-step node window              (5)

    [output]
      directory   output directory                  (out/<scenario name>)
      seed        RNG seed                          (0)

``dt = auto`` picks half the CFL bound of the initial state, shrunk for
evolving sphere runs by the area ratio at t_end; an explicit dt is
trimmed down so an integer number of steps lands exactly on each output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigSyntaxError,
    ConstraintViolationError,
    UnknownKeyError,
)
from .flow import VARIANT_C, FlowState
from .geometry import SphereGeometry, TorusGeometry

MONITOR_NAMES = (
    "H",
    "tP",
    "F",
    "W",
    "mass",
    "trace_harnack",
    "lyh_curvature",
    "lyh_heat",
    "gradient",
)

IDENTITY_PRESETS = ("general_H", "cor_H", "general_P", "cor_tP", "surface", "grad")


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    # geometry
    kind: str = ""
    n: int = 128
    length: float = 2.0 * np.pi
    radius: float = 1.0
    phi_mode: str = "round"
    phi_amp: float = 0.0
    # initial data
    initial_id: str = "constant"
    f0: float = 0.5
    amp: float = 0.0
    # flow
    variant: str = "with_potential"
    c: float | None = None
    t_end: float | None = None
    dt: float | None = None  # None = auto
    dt_out: float | None = None
    t0: float | None = None
    evolve_metric: bool = True
    # monitors
    d: float = 1.0
    monitors: tuple = ("auto",)
    # identities
    identities_enable: bool = False
    identity_presets: tuple = IDENTITY_PRESETS
    fuzz_count: int = 0
    t_check: float | None = None
    # action
    action_enable: bool = False
    pair_count: int = 0
    pairs: tuple = ()
    window: int = 5
    # output
    directory: str | None = None
    seed: int = 0


def _parse_bool(raw, line):
    if raw in ("true", "True", "1", "yes"):
        return True
    if raw in ("false", "False", "0", "no"):
        return False
    raise ConfigSyntaxError(f"expected a boolean, got {raw!r}", line)


def _parse_float(raw, line):
    try:
        return float(raw)
    except ValueError:
        raise ConfigSyntaxError(f"expected a number, got {raw!r}", line) from None


def _parse_int(raw, line):
    try:
        return int(raw)
    except ValueError:
        raise ConfigSyntaxError(f"expected an integer, got {raw!r}", line) from None


def _parse_pairs(raw, line):
    pairs = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        bits = [b.strip() for b in chunk.split(",")]
        if len(bits) != 4:
            raise ConfigSyntaxError(f"pair {chunk!r} needs x1,t1,x2,t2", line)
        pairs.append((int(bits[0]), float(bits[1]), int(bits[2]), float(bits[3])))
    return tuple(pairs)


def parse_config(text, name="scenario"):
    """Parse and validate a scenario config; unknown keys are errors."""
    cfg = ScenarioConfig(name=name)
    section = None
    setters = _setters()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigSyntaxError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip()
            if section not in setters:
                raise UnknownKeyError(section, lineno)
            continue
        if "=" not in line:
            raise ConfigSyntaxError(f"expected key = value, got {raw.strip()!r}", lineno)
        if section is None:
            raise ConfigSyntaxError("key outside of any [section]", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        table = setters[section]
        if key not in table:
            raise UnknownKeyError(f"{section}.{key}", lineno)
        table[key](cfg, value, lineno)
    _validate(cfg)
    return cfg


def _setters():
    def set_attr(attr, parser=None):
        def setter(cfg, value, line):
            setattr(cfg, attr, parser(value, line) if parser else value)

        return setter

    def set_choice(attr, choices):
        def setter(cfg, value, line):
            if value not in choices:
                raise ConstraintViolationError(
                    f"line {line}: {attr} must be one of {', '.join(choices)}; got {value!r}"
                )
            setattr(cfg, attr, value)

        return setter

    def set_monitors(cfg, value, line):
        items = tuple(s.strip() for s in value.split(",") if s.strip())
        for item in items:
            if item != "auto" and item not in MONITOR_NAMES:
                raise ConstraintViolationError(
                    f"line {line}: unknown monitor {item!r} (choose from {', '.join(MONITOR_NAMES)})"
                )
        cfg.monitors = items

    def set_presets(cfg, value, line):
        items = tuple(s.strip() for s in value.split(",") if s.strip())
        for item in items:
            if item not in IDENTITY_PRESETS:
                raise ConstraintViolationError(
                    f"line {line}: unknown identity preset {item!r}"
                )
        cfg.identity_presets = items

    def set_auto_float(attr):
        def setter(cfg, value, line):
            setattr(cfg, attr, None if value == "auto" else _parse_float(value, line))

        return setter

    return {
        "geometry": {
            "kind": set_choice("kind", ("rot_sphere", "torus")),
            "n": set_attr("n", _parse_int),
            "length": set_attr("length", _parse_float),
            "radius": set_attr("radius", _parse_float),
            "phi_mode": set_choice("phi_mode", ("round", "cos_theta", "sine_xy")),
            "phi_amp": set_attr("phi_amp", _parse_float),
        },
        "initial": {
            "id": set_choice("initial_id", ("constant", "cos_theta", "sine_x", "sine_xy")),
            "f0": set_attr("f0", _parse_float),
            "amp": set_attr("amp", _parse_float),
        },
        "flow": {
            "variant": set_choice("variant", ("with_potential", "plain_heat", "general")),
            "c": set_attr("c", _parse_float),
            "t_end": set_attr("t_end", _parse_float),
            "dt": set_auto_float("dt"),
            "dt_out": set_auto_float("dt_out"),
            "t0": set_auto_float("t0"),
            "evolve_metric": set_attr("evolve_metric", _parse_bool),
        },
        "monitors": {
            "d": set_attr("d", _parse_float),
            "enable": set_monitors,
        },
        "identities": {
            "enable": set_attr("identities_enable", _parse_bool),
            "presets": set_presets,
            "fuzz_count": set_attr("fuzz_count", _parse_int),
            "t_check": set_auto_float("t_check"),
        },
        "action": {
            "enable": set_attr("action_enable", _parse_bool),
            "pair_count": set_attr("pair_count", _parse_int),
            "pairs": set_attr("pairs", _parse_pairs),
            "window": set_attr("window", _parse_int),
        },
        "output": {
            "directory": set_attr("directory"),
            "seed": set_attr("seed", _parse_int),
        },
    }


# ---------------------------------------------------------------------------
# validation and state construction


def _validate(cfg):
    if not cfg.kind:
        raise ConstraintViolationError("geometry.kind is required")
    if cfg.t_end is None:
        raise ConstraintViolationError("flow.t_end is required")
    if cfg.t_end <= 0:
        raise ConstraintViolationError("flow.t_end must be positive")
    if cfg.n < 4:
        raise ConstraintViolationError("geometry.n must be at least 4")
    if cfg.kind == "torus" and cfg.length <= 0:
        raise ConstraintViolationError("geometry.length must be positive")
    if cfg.kind == "rot_sphere" and cfg.radius <= 0:
        raise ConstraintViolationError("geometry.radius must be positive")
    if cfg.window < 1:
        raise ConstraintViolationError("action.window must be at least 1")
    if cfg.pair_count < 0 or cfg.fuzz_count < 0:
        raise ConstraintViolationError("counts must be nonnegative")

    if cfg.phi_mode == "cos_theta" and cfg.kind != "rot_sphere":
        raise ConstraintViolationError("phi_mode cos_theta is sphere-only")
    if cfg.phi_mode == "sine_xy" and cfg.kind != "torus":
        raise ConstraintViolationError("phi_mode sine_xy is torus-only")
    if cfg.initial_id == "cos_theta" and cfg.kind != "rot_sphere":
        raise ConstraintViolationError("initial id cos_theta is sphere-only")
    if cfg.initial_id in ("sine_x", "sine_xy") and cfg.kind != "torus":
        raise ConstraintViolationError(f"initial id {cfg.initial_id} is torus-only")

    if cfg.variant == "general":
        if cfg.c is None:
            raise ConstraintViolationError("flow.c is required for the general variant")
    else:
        preset_c = VARIANT_C[cfg.variant]
        if cfg.c is None:
            cfg.c = preset_c
        elif cfg.c != preset_c:
            raise ConstraintViolationError(
                f"flow.c = {cfg.c} contradicts variant {cfg.variant} (c = {preset_c})"
            )

    if "gradient" in cfg.monitors:
        if cfg.c != 0.0:
            raise ConstraintViolationError("gradient monitor requires the plain_heat variant")
        lo, hi = cfg.f0 - abs(cfg.amp), cfg.f0 + abs(cfg.amp)
        if not (0.0 < lo and hi < 1.0):
            raise ConstraintViolationError(
                f"gradient monitor requires 0 < f < 1; initial range is [{lo:.6g}, {hi:.6g}]"
            )

    if cfg.dt_out is None:
        cfg.dt_out = cfg.t_end / 40.0
    if cfg.dt_out <= 0 or cfg.dt_out > cfg.t_end:
        raise ConstraintViolationError("flow.dt_out must lie in (0, t_end]")

    geom0 = build_geometry(cfg)
    bound0 = geom0.cfl_bound()
    if cfg.kind == "rot_sphere" and cfg.evolve_metric:
        extinction = geom0.total_area() / (8.0 * np.pi)
        if cfg.t_end >= extinction:
            raise ConstraintViolationError(
                f"t_end = {cfg.t_end:.6g} reaches the sphere extinction time {extinction:.6g}"
            )
        area_ratio = (extinction - cfg.t_end) / extinction
    else:
        area_ratio = 1.0

    if cfg.dt is None:
        cfg.dt = 0.5 * bound0 * area_ratio
    if cfg.dt <= 0:
        raise ConstraintViolationError("flow.dt must be positive")
    if cfg.dt > bound0 * (1.0 + 1e-12):
        raise ConstraintViolationError(
            f"flow.dt = {cfg.dt:.6g} violates the CFL rule dt <= 0.2*h^2*min(e^(2*phi)) = {bound0:.6g}"
        )
    # trim dt so that an integer number of steps lands on each output
    steps = int(np.ceil(cfg.dt_out / cfg.dt - 1e-12))
    cfg.dt = cfg.dt_out / steps

    if cfg.t0 is None:
        k0 = int(np.floor(0.05 * cfg.t_end / cfg.dt_out + 1e-12)) + 1
        cfg.t0 = k0 * cfg.dt_out
    if cfg.t0 <= 0 or cfg.t0 >= cfg.t_end:
        raise ConstraintViolationError("flow.t0 must lie in (0, t_end)")

    if cfg.t_check is None and cfg.identities_enable:
        k = max(1, int(round(0.5 * cfg.t_end / cfg.dt_out)))
        cfg.t_check = k * cfg.dt_out


def build_geometry(cfg):
    if cfg.kind == "rot_sphere":
        geom = SphereGeometry(cfg.n)
        phi = np.full(geom.field_shape, SphereGeometry.round_phi(cfg.radius))
        if cfg.phi_mode == "cos_theta":
            phi = phi + cfg.phi_amp * geom.cos_theta
        return geom.with_phi(phi)
    geom = TorusGeometry(cfg.n, cfg.length)
    phi = np.zeros(geom.field_shape)
    if cfg.phi_mode == "sine_xy":
        x, y = geom.coords()
        w = 2.0 * np.pi / cfg.length
        phi = cfg.phi_amp * np.sin(w * x) * np.sin(w * y)
    return geom.with_phi(phi)


def build_initial_state(cfg):
    """Initial FlowState at t = 0 from the configured geometry and data."""
    geom = build_geometry(cfg)
    if cfg.kind == "rot_sphere":
        if cfg.initial_id == "constant":
            f = np.full(geom.field_shape, cfg.f0)
        elif cfg.initial_id == "cos_theta":
            f = cfg.f0 + cfg.amp * geom.cos_theta
        else:
            raise ConstraintViolationError(f"initial id {cfg.initial_id!r} not valid on the sphere")
    else:
        x, y = geom.coords()
        w = 2.0 * np.pi / cfg.length
        if cfg.initial_id == "constant":
            f = np.full(geom.field_shape, cfg.f0)
        elif cfg.initial_id == "sine_x":
            f = cfg.f0 + cfg.amp * np.sin(w * x) * np.ones_like(y)
        elif cfg.initial_id == "sine_xy":
            f = cfg.f0 + cfg.amp * np.sin(w * x) * np.sin(w * y)
        else:
            raise ConstraintViolationError(f"initial id {cfg.initial_id!r} not valid on the torus")
    return FlowState(0.0, geom, f)

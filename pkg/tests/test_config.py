import numpy as np
import pytest

import harnackflow as hf
from harnackflow.errors import (
    ConfigSyntaxError,
    ConstraintViolationError,
    UnknownKeyError,
)

MINIMAL_SPHERE = """
[geometry]
kind = rot_sphere

[flow]
t_end = 0.2
"""


def test_minimal_sphere_config_defaults():
    cfg = hf.parse_config(MINIMAL_SPHERE, name="mini")
    assert cfg.kind == "rot_sphere"
    assert cfg.n == 128
    assert cfg.radius == 1.0
    assert cfg.variant == "with_potential" and cfg.c == -1.0
    assert cfg.dt_out == pytest.approx(0.2 / 40)
    assert cfg.dt is not None and cfg.dt > 0
    # dt divides dt_out exactly
    steps = cfg.dt_out / cfg.dt
    assert abs(steps - round(steps)) < 1e-9
    # default t0 is the first output after 0.05 * t_end
    assert cfg.t0 == pytest.approx(cfg.dt_out * (int(0.05 * cfg.t_end / cfg.dt_out) + 1))
    assert cfg.seed == 0


def test_unknown_key_rejected():
    text = MINIMAL_SPHERE + "\n[flow]\ndtt = 1e-4\n"
    with pytest.raises(UnknownKeyError) as err:
        hf.parse_config(text)
    assert "dtt" in str(err.value)


def test_unknown_section_rejected():
    with pytest.raises(UnknownKeyError):
        hf.parse_config(MINIMAL_SPHERE + "\n[misc]\nx = 1\n")


def test_syntax_error_reports_line():
    text = "[geometry]\nkind rot_sphere\n"
    with pytest.raises(ConfigSyntaxError) as err:
        hf.parse_config(text)
    assert err.value.line == 2


def test_key_outside_section_rejected():
    with pytest.raises(ConfigSyntaxError):
        hf.parse_config("kind = rot_sphere\n")


def test_cfl_violation_names_bound():
    text = """
[geometry]
kind = torus
n = 32
length = 6.283185307179586

[flow]
t_end = 0.1
dt = 0.5
"""
    with pytest.raises(ConstraintViolationError) as err:
        hf.parse_config(text)
    assert "CFL" in str(err.value)


def test_variant_c_contradiction():
    text = MINIMAL_SPHERE + "\n[flow]\nc = 0.5\n"
    with pytest.raises(ConstraintViolationError):
        hf.parse_config(text)


def test_general_variant_requires_c():
    text = MINIMAL_SPHERE + "\n[flow]\nvariant = general\n"
    with pytest.raises(ConstraintViolationError):
        hf.parse_config(text)
    cfg = hf.parse_config(text + "c = 0.5\n")
    assert cfg.c == 0.5


def test_gradient_monitor_requires_plain_heat():
    text = MINIMAL_SPHERE + "\n[monitors]\nenable = gradient\n"
    with pytest.raises(ConstraintViolationError):
        hf.parse_config(text)


def test_gradient_monitor_requires_unit_range():
    text = """
[geometry]
kind = torus

[initial]
id = sine_x
f0 = 0.9
amp = 0.3

[flow]
variant = plain_heat
t_end = 0.1

[monitors]
enable = gradient
"""
    with pytest.raises(ConstraintViolationError):
        hf.parse_config(text)


def test_extinction_time_guard():
    text = """
[geometry]
kind = rot_sphere
n = 64
radius = 1.0

[flow]
t_end = 0.6
"""
    with pytest.raises(ConstraintViolationError) as err:
        hf.parse_config(text)
    assert "extinction" in str(err.value)


def test_sphere_only_modes_rejected_on_torus():
    text = """
[geometry]
kind = torus
phi_mode = cos_theta

[flow]
t_end = 0.1
"""
    with pytest.raises(ConstraintViolationError):
        hf.parse_config(text)


def test_action_pairs_parsing():
    text = MINIMAL_SPHERE + "\n[action]\nenable = true\npairs = 3,0.05,7,0.1; 1,0.1,1,0.15\n"
    cfg = hf.parse_config(text)
    assert cfg.pairs == ((3, 0.05, 7, 0.1), (1, 0.1, 1, 0.15))


def test_comments_and_blank_lines():
    text = """
# leading comment
[geometry]
kind = rot_sphere   # trailing comment
n = 64

[flow]
t_end = 0.1
"""
    cfg = hf.parse_config(text)
    assert cfg.n == 64


def test_initial_state_construction():
    cfg = hf.parse_config(MINIMAL_SPHERE)
    state = hf.build_initial_state(cfg)
    assert state.t == 0.0
    assert np.all(state.f == 0.5)
    assert state.geom.kind == "rot_sphere"

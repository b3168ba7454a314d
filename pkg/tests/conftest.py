"""Shared trajectories for the test suite.

The expensive runs (N = 128 spheres, the identity refinement ladder) are
session-scoped so every test module reuses them; wall-clock timings of
the runs are recorded for the runtime criteria.
"""

import time
from pathlib import Path

import numpy as np
import pytest

import harnackflow as hf

REPO_ROOT = Path(__file__).resolve().parents[1]
SCENARIO_DIR = REPO_ROOT / "scenarios"

SPHERE_N = 128
R0 = 1.0
F0 = 0.5


@pytest.fixture(scope="session")
def sphere_constant_traj():
    """Shrinking round sphere, constant f; .elapsed carries the run time."""
    geom = hf.SphereGeometry(SPHERE_N, np.full(SPHERE_N, hf.SphereGeometry.round_phi(R0)))
    state = hf.FlowState(0.0, geom, np.full(SPHERE_N, F0))
    start = time.perf_counter()
    traj = hf.run(state, 0.4, 2e-5, 0.01, c=-1.0, initial_id="constant")
    traj.elapsed = time.perf_counter() - start
    return traj


@pytest.fixture(scope="session")
def sphere_cosine_traj():
    geom = hf.SphereGeometry(SPHERE_N)
    state = hf.FlowState(
        0.0, geom.with_phi(0.1 * geom.cos_theta), 0.5 + 0.2 * geom.cos_theta
    )
    return hf.run(state, 0.3, 2.5e-5, 0.01, c=-1.0, initial_id="cos_theta")


def _torus_state(n=64, length=2 * np.pi, phi_amp=0.0, mode="sine_x", f0=0.5, amp=0.25):
    geom = hf.TorusGeometry(n, length)
    x, y = geom.coords()
    w = 2 * np.pi / length
    if phi_amp:
        geom = geom.with_phi(phi_amp * np.sin(w * x) * np.sin(w * y))
    if mode == "sine_x":
        f = f0 + amp * np.sin(w * x) * np.ones_like(y)
    else:
        f = f0 + amp * np.sin(w * x) * np.sin(w * y)
    return hf.FlowState(0.0, geom, f)


@pytest.fixture(scope="session")
def torus_plain_traj():
    return hf.run(_torus_state(), 0.5, 0.0125 / 8, 0.0125, c=0.0, initial_id="sine_x")


@pytest.fixture(scope="session")
def torus_potential_traj():
    state = _torus_state(mode="sine_xy", amp=0.2)
    return hf.run(state, 0.5, 0.0125 / 8, 0.0125, c=-1.0, initial_id="sine_xy")


@pytest.fixture(scope="session")
def torus_bump_static_traj():
    state = _torus_state(phi_amp=0.05)
    return hf.run(
        state, 0.5, 0.0125 / 8, 0.0125, c=0.0, evolve_metric=False, initial_id="sine_x"
    )


@pytest.fixture(scope="session")
def torus_bump_ricci_traj():
    state = _torus_state(phi_amp=0.05)
    return hf.run(state, 0.5, 0.0125 / 8, 0.0125, c=0.0, initial_id="sine_x")


@pytest.fixture(scope="session")
def identity_cfg():
    text = (SCENARIO_DIR / "sphere_identities.cfg").read_text(encoding="utf-8")
    return hf.parse_config(text, name="sphere_identities")


@pytest.fixture(scope="session")
def identity_study(identity_cfg, tmp_path_factory):
    """Three-level refinement ladder; .elapsed carries the wall time."""
    out = tmp_path_factory.mktemp("identity_study")
    start = time.perf_counter()
    study = hf.verify_identities(identity_cfg, levels=3, out_flag=str(out))
    study.elapsed = time.perf_counter() - start
    return study


@pytest.fixture(scope="session")
def coarse_sphere_pair():
    """Small matched (c=-1, c=0) sphere trajectories for identity unit tests."""
    geom = hf.SphereGeometry(48)
    state = hf.FlowState(
        0.0, geom.with_phi(0.1 * geom.cos_theta), 0.5 + 0.2 * geom.cos_theta
    )
    pot = hf.run(state, 0.1, 5e-4, 0.01, c=-1.0)
    heat = hf.run(state, 0.1, 5e-4, 0.01, c=0.0)
    return pot, heat

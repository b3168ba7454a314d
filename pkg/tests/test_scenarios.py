"""End-to-end runs of every shipped scenario config."""

import pytest

import harnackflow as hf
from conftest import SCENARIO_DIR

RUNNABLE = [
    "sphere_constant",
    "sphere_cosine",
    "torus_plain",
    "torus_potential",
    "torus_bump_static",
    "torus_bump_ricci",
]


@pytest.mark.parametrize("name", RUNNABLE)
def test_shipped_scenario_passes(name, tmp_path):
    text = (SCENARIO_DIR / f"{name}.cfg").read_text(encoding="utf-8")
    cfg = hf.parse_config(text, name=name)
    report = hf.run_scenario(cfg, out_flag=str(tmp_path / name))
    failures = [a.line() for a in report.assertions if not a.ok]
    assert report.passed, "\n".join(failures)
    assert report.assertions, "scenario ran no assertions"


def test_identity_ladder_config_parses():
    text = (SCENARIO_DIR / "sphere_identities.cfg").read_text(encoding="utf-8")
    cfg = hf.parse_config(text, name="sphere_identities")
    assert cfg.identities_enable
    assert cfg.fuzz_count == 100
    assert cfg.t_check == 0.05

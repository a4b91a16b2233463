import json

import numpy as np
import pytest

import frontlab as fl
from frontlab.config import ExperimentConfig, config_hash
from frontlab.errors import ConfigError

BASE = {
    "potential": {"kind": "quadratic", "a": 1.0},
    "kernel": {"kind": "constant", "k": 1.0},
    "alpha": 0.25,
    "grid": {"R_y": 10.0, "n_y": 201, "L_x": 30.0, "n_x": 121},
    "time": {"T": 2.0, "dt": "auto"},
}


def make(**overrides):
    raw = json.loads(json.dumps(BASE))
    raw.update(overrides)
    return raw


def test_valid_config_loads(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(BASE))
    cfg = ExperimentConfig.from_file(p)
    assert cfg.hash == config_hash(BASE)
    assert cfg.trait_grid().n_points == 201
    assert cfg.space_grid().half_width == 30.0


def test_missing_potential_message():
    raw = make()
    del raw["potential"]
    with pytest.raises(ConfigError, match="config.potential required"):
        ExperimentConfig.from_dict(raw)


@pytest.mark.parametrize("patch,fragment", [
    ({"alpha": -1.0}, "alpha"),
    ({"alpha": "auto"}, "alpha"),
    ({"grid": {"R_y": 10.0, "n_y": 200, "L_x": 30.0, "n_x": 121}}, "n_y"),
    ({"grid": {"R_y": -1.0, "n_y": 201, "L_x": 30.0, "n_x": 121}}, "R_y"),
    ({"time": {"T": -5}}, "time.T"),
    ({"diffusion": {"kind": "fractional"}}, "sigma"),
    ({"boundary": "periodic"}, "boundary"),
    ({"kernel": {"kind": "mystery"}}, "kernel.kind"),
    ({"tracker": {"theta": -0.5}}, "theta"),
    ({"speeds": ["fast"]}, "speeds"),
    ({"spectrum": {"k": 500}}, "spectrum.k"),
])
def test_invalid_configs_rejected(patch, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        ExperimentConfig.from_dict(make(**patch))


def test_hash_is_canonical_and_sensitive():
    a = config_hash(BASE)
    reordered = json.loads(json.dumps(BASE))
    assert config_hash(dict(reversed(list(reordered.items())))) == a
    changed = make(alpha=0.3)
    assert config_hash(changed) != a


def test_alpha_auto_resolves_to_fraction_of_critical():
    cfg = ExperimentConfig.from_dict(make(alpha="auto:0.25",
                                          grid={"R_y": 10.0, "n_y": 801,
                                                "L_x": 30.0, "n_x": 121}))
    alpha, alpha_bar = cfg.resolve_alpha()
    assert alpha_bar == pytest.approx(1.0, abs=2e-3)
    assert alpha == pytest.approx(0.25 * alpha_bar, rel=1e-12)


def test_speed_expressions():
    cfg = ExperimentConfig.from_dict(make(speeds=["cstar", "1.02*cstar", 2.5]))
    out = cfg.speeds(c_star=2.0)
    assert out == [2.0, pytest.approx(2.04), 2.5]


def test_empty_speed_list_defaults_to_cstar():
    cfg = ExperimentConfig.from_dict(make())
    assert cfg.speeds(c_star=1.5) == [1.5]


def test_builders_produce_consistent_objects():
    cfg = ExperimentConfig.from_dict(make())
    op = cfg.operator(0.25)
    basis = fl.eigenpairs(op, cfg.section("spectrum")["k"])
    assert basis.k == 8
    assert basis.lambda0 == pytest.approx(0.5, abs=1e-3)

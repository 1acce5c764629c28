import json

import numpy as np
import pytest

from inspath.config import PipelineConfig, config_from_dict, config_to_dict, load_config
from inspath.errors import ConfigError


def test_empty_config_gives_defaults(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{}")
    cfg = load_config(path)
    assert cfg.s == 5
    assert cfg.voxel == 0.02
    assert cfg.standoff == 0.3
    assert cfg.normals.k == 10
    assert cfg.dbscan_eps == 0.04  # 2 x voxel
    assert cfg.band_width == pytest.approx(0.03)  # 1.5 x voxel
    assert cfg.reverse is True
    assert cfg.cluster_selection == "largest"


def test_negative_voxel_names_path(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"voxel": -1}')
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert "voxel" in str(exc.value)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"voxxel": 0.02})
    assert "voxxel" in str(exc.value)
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"hpr": {"radius": 5}})
    assert "hpr.radius" in str(exc.value)


def test_nested_constraint_paths():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"dbscan": {"eps": -0.1}})
    assert "dbscan.eps" in str(exc.value)
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"normals": {"k": 1}})
    assert "normals.k" in str(exc.value)
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"slice": {"mode": "spiral"}})
    assert "slice.mode" in str(exc.value)


def test_type_mismatches():
    with pytest.raises(ConfigError):
        config_from_dict({"s": "five"})
    with pytest.raises(ConfigError):
        config_from_dict({"reverse": 1})
    with pytest.raises(ConfigError):
        config_from_dict({"crop": {"min": [0, 0], "max": [1, 1, 1]}})


def test_full_config_round_trips():
    doc = {
        "s": 3,
        "crop": {"min": [-1, -1, -0.5], "max": [1, 1, 2]},
        "ground_z": 0.01,
        "vote_tolerance": 0.1,
        "hpr": {"enabled": True, "camera": [0, 0, 1.5], "radius_scale": 50.0},
        "voxel": 0.01,
        "normals": {"k": 12, "viewpoint": [0, 0, 2]},
        "dbscan": {"eps": 0.05, "min_pts": 6},
        "cluster_selection": [0, 2],
        "slice": {"mode": "direction", "direction": [0, 1, 0],
                  "band_width": 0.02, "row_count": 2},
        "standoff": 0.25,
        "min_clearance": 0.02,
        "decimation_n": 1,
        "reverse": False,
        "hand_eye": {"quaternion": [0.7071067811865476, 0.7071067811865476, 0, 0],
                     "translation": [0.0, 0.1, 0.05]},
        "base_in_world": {"quaternion": [1, 0, 0, 0], "translation": [0, 0, 0.3]},
    }
    cfg = config_from_dict(doc)
    again = config_from_dict(config_to_dict(cfg))
    assert config_to_dict(again) == config_to_dict(cfg)
    assert json.dumps(config_to_dict(cfg), sort_keys=True) == \
        json.dumps(config_to_dict(again), sort_keys=True)


def test_direction_normalized_on_load():
    cfg = config_from_dict({"slice": {"mode": "direction", "direction": [0, 2, 0]}})
    assert np.allclose(cfg.slice.direction, [0, 1, 0])


def test_slice_spec_resolution_and_override():
    cfg = config_from_dict({"voxel": 0.04})
    spec = cfg.slice_spec()
    assert spec.band_width == pytest.approx(0.06)
    spec2 = cfg.slice_spec({"mode": "direction", "direction": [1, 0, 0], "row_count": 3})
    assert spec2.row_count == 3
    assert np.allclose(spec2.direction, [1, 0, 0])
    with pytest.raises(ConfigError):
        cfg.slice_spec({"mode": "nope"})


def test_interactive_selection_parses():
    cfg = config_from_dict({"cluster_selection": "interactive"})
    assert cfg.cluster_selection == "interactive"
    with pytest.raises(ConfigError):
        config_from_dict({"cluster_selection": "biggest"})


def test_invalid_json_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)

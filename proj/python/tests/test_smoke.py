import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import pfloc

SOURCE_DIR = Path(os.environ.get("PFLOC_SOURCE_DIR", Path(__file__).resolve().parents[2]))
CONFIGS = SOURCE_DIR / "configs"


def small_scenario():
    return {
        "name": "small",
        "camera": {"fx": 400, "fy": 400, "cx": 320, "cy": 180, "width": 640, "height": 360},
        "trajectory": {"start": [0, 0, 0], "end": [300, 0, 0], "step_m": 10},
        "targets": [{"centre": [150, -40, 600], "half_extents": [15, 15, 15]}],
        "filter": {"n_particles": 3000, "sd_init": 100, "tau_min_obs": 5, "ref_distance_m": 600},
        "tracker": {"mode": "single"},
        "run": {"n_seeds": 2, "base_seed": 1, "window_m": [100, 300]},
    }


def test_project_point_principal_axis():
    K = pfloc.CameraIntrinsics()
    assert pfloc.project_point([0, 0, 2000], K, pfloc.CameraPose()) == (960.0, 540.0)
    assert pfloc.project_point([0, 0, -1], K, pfloc.CameraPose()) is None


def test_back_projection_round_trip():
    K = pfloc.CameraIntrinsics()
    pose = pfloc.pose_from_angles([10, -5, 3], 2.0, -4.0, 30.0)
    ray = pfloc.back_project_ray(400.25, 700.5, K, pose)
    u, v = pfloc.project_point(ray.origin + 1500.0 * ray.direction, K, pose)
    assert u == pytest.approx(400.25, abs=1e-6)
    assert v == pytest.approx(700.5, abs=1e-6)


def test_ray_midpoint_skew_lines():
    a = pfloc.Ray([0, 0, 0], [1, 0, 0])
    b = pfloc.Ray([0, 1, 2], [0, 0, 1])
    np.testing.assert_allclose(pfloc.ray_midpoint(a, b), [0, 0.5, 0], atol=1e-12)
    with pytest.raises(pfloc.PflocError):
        pfloc.ray_midpoint(a, pfloc.Ray([0, 3, 0], [2, 0, 0]))


def test_render_truth_mask_shape_and_content():
    K = pfloc.CameraIntrinsics()
    mask = pfloc.render_truth_mask([([500, -200, 2000], [50, 50, 50])], K, pfloc.CameraPose())
    assert mask.shape == (1080, 1920)
    assert mask.dtype == bool
    assert mask.sum() > 0
    cols = np.nonzero(mask.any(axis=0))[0]
    assert cols.mean() > 960


def test_segment_image_constant_frame_is_empty():
    assert not pfloc.segment_image(np.full((30, 40), 90, dtype=np.uint8)).any()


def test_metric_identity():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(500, 3)) * [4.0, 20.0, 7.0] + [10, 20, 1000]
    target = np.array([15.0, 0.0, 990.0])
    rp = pfloc.rmse_particle(pts, target)
    rm = pfloc.rmse_mean_dist(pts, target)
    trace = np.cov(pts.T, bias=True).trace()
    assert rp**2 - rm**2 == pytest.approx(trace, rel=1e-9)
    assert math.isfinite(pfloc.nlpd(pts, target))


def test_load_config_round_trip():
    cfg = pfloc.load_config(str(CONFIGS / "table1_row1.json"))
    assert cfg["filter"]["n_particles"] == 100000
    assert pfloc.load_config(cfg) == cfg


def test_config_errors_name_the_field():
    cfg = small_scenario()
    cfg["filter"]["sd_init"] = -1
    with pytest.raises(pfloc.ConfigError, match="filter.sd_init"):
        pfloc.load_config(cfg)
    cfg = small_scenario()
    cfg["camera"]["lens"] = 1
    with pytest.raises(pfloc.ConfigError, match="camera.lens"):
        pfloc.load_config(cfg)


def test_run_seed_is_deterministic_and_localises():
    a = pfloc.run_seed(small_scenario(), 1)
    b = pfloc.run_seed(small_scenario(), 1)
    assert a["aggregate"] == b["aggregate"]
    assert a["steps"] == b["steps"]
    assert len(a["final_tracks"]) == 1
    assert np.linalg.norm(a["final_tracks"][0]["mean"] - np.array([150, -40, 600])) < 60


def test_simulate_writes_outputs(tmp_path):
    result = pfloc.simulate(small_scenario(), seeds=2, out=tmp_path)
    assert [r["seed"] for r in result["runs"]] == [1, 2]
    assert result["summary"]["rmse_min"] is not None
    header = (tmp_path / "summary.csv").read_text().splitlines()[0]
    assert header.startswith("N_T,Max_nu_rot_deg")
    json.dumps(result["summary"])

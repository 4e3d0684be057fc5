"""Smoke tests for the python bindings."""

import json
import math

import numpy as np
import pytest

import sograb


def test_cloud_round_trip_through_numpy():
    points = np.random.default_rng(1).uniform(-0.05, 0.05, size=(100, 3))
    cloud = sograb.PointCloud(points)
    assert len(cloud) == 100
    assert np.array_equal(cloud.points, points)
    assert cloud.colors is None


def test_dcd_identity_and_analytic_value():
    cloud = sograb.sample_shape("box", n_points=300, seed=2)
    assert sograb.dcd(cloud, cloud) == 0.0

    a = sograb.PointCloud(np.array([[0.0, 0.0, 0.0]]))
    b = sograb.PointCloud(np.array([[1.0, 0.0, 0.0]]))
    assert sograb.dcd(a, b, alpha=1.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)


def test_grasp_score_regimes():
    assert sograb.grasp_score("unsuccessful") == 0.0
    assert sograb.grasp_score("successful", 0.0) == 1.0
    assert sograb.grasp_score("successful", 1.0) == 0.5
    partial = sograb.grasp_score("partial", 0.2, t_dropped=5.0, t_cycle=10.0)
    assert partial == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(ValueError):
        sograb.grasp_score("successful", 1.5)


def test_icp_recovers_a_known_motion():
    source = sograb.sample_shape("box", (0.055, 0.045, 0.035), 1500, seed=3)
    angle = 0.2
    rotation = np.array(
        [
            [math.cos(angle), -math.sin(angle), 0.0],
            [math.sin(angle), math.cos(angle), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    truth = sograb.RigidTransform(rotation, np.array([0.01, -0.02, 0.005]))
    target = sograb.apply_transform(source, truth)
    result = sograb.icp_align(source, target, max_correspondence_dist=0.05)
    assert result.converged
    assert result.rmse < 1e-6
    assert np.allclose(result.transform.rotation, rotation, atol=1e-6)


def test_segmentation_and_voxel():
    points = np.zeros((4, 3))
    points[1] = (1, 0, 0)
    points[2] = (0, 1, 0)
    points[3] = (0.0001, 0, 0)
    colors = np.array(
        [[250, 250, 250], [10, 10, 10], [250, 10, 10], [240, 240, 240]],
        dtype=np.uint8,
    )
    cloud = sograb.PointCloud(points, colors)
    kept = sograb.segment_by_color(cloud)
    assert len(kept) == 2  # the two white points

    down = sograb.voxel_downsample(kept, 0.01)
    assert len(down) == 1


def test_batch_end_to_end(tmp_path):
    pre = sograb.sample_shape("box", n_points=400, seed=5)
    grasp, _ = sograb.deform(pre, squash_ratio=0.8)
    sograb.save_cloud(pre, str(tmp_path / "pre.ply"))
    sograb.save_cloud(grasp, str(tmp_path / "grasp.ply"))
    manifest = {
        "alpha": 100.0,
        "trials": [
            {
                "trial_id": f"t{i}",
                "object_id": "B1",
                "material": "40A",
                "gripper_id": "rigid",
                "repeat": i,
                "pre_cloud": "pre.ply",
                "grasp_cloud": "grasp.ply",
                "alignment_mode": "icp",
                "outcome": {"type": "successful"},
            }
            for i in range(3)
        ],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))

    out = sograb.run_batch(str(tmp_path / "manifest.json"), out_dir=str(tmp_path / "results"))
    assert len(out["records"]) == 3
    assert out["errors"] == []
    assert out["cells"] == 1
    for record in out["records"]:
        assert record["score"] == 1.0 - record["dcd"] / 2.0
    assert (tmp_path / "results" / "scores.csv").exists()
    assert (tmp_path / "results" / "heatmap.svg").exists()

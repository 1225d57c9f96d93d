"""
Unit tests for synthetic scenes, oracles and KITTI export

Run with: pytest tests/test_synth.py -v
"""

import math
import sys
import os

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.geometry import BevRect, Box3D, Vec2BEV, bev_rect_of
from src.kitti import parse_calib, parse_detections, parse_labels, parse_scan
from src.losses import LossConfig
from src.pointcloud import ObjectPoints
from src.synth import (
    SceneSpec,
    check_boxes,
    export_kitti,
    generate_scene,
    grid_oracle,
    parse_scene_spec,
    projected_bbox,
    rasterized_iou_oracle,
    relative_gap,
    split_minima,
)
from src.utils.errors import ConfigError


def car(x=0.0, z=15.0, theta=0.0):
    return Box3D(x=x, y=1.65, z=z, h=1.6, w=1.8, l=4.0, theta_y=theta)


def perimeter(box: Box3D, n_per_edge=20) -> np.ndarray:
    corners = bev_rect_of(box).corners()
    pts = []
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        s = np.linspace(0.0, 1.0, n_per_edge, endpoint=False)[:, None]
        pts.append(a + s * (b - a))
    return np.vstack(pts)


class TestSceneSpec:
    """Test suite for scene spec parsing."""

    def test_parse_values_and_boxes(self):
        spec = parse_scene_spec(
            "seed = 7\n"
            "noise_sigma = 0.0  # clean\n"
            "z_range = 10, 30\n"
            "box = 1.5, 1.65, 12, 1.6, 1.8, 4.0, 0.3\n"
            "box = -5, 1.65, 20, 1.75, 0.6, 0.8, 0.0, Pedestrian\n"
        )
        assert spec.seed == 7
        assert spec.noise_sigma == 0.0
        assert spec.z_range == (10.0, 30.0)
        assert len(spec.boxes) == 2
        assert spec.classes == ["Car", "Pedestrian"]
        assert spec.boxes[0].theta_y == pytest.approx(0.3)

    def test_blank_and_comment_lines(self):
        assert parse_scene_spec("\n# nothing here\n   \n") == SceneSpec()

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_scene_spec("seed = 1\ncolour = red\n")

    def test_missing_separator(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_scene_spec("seed 1")

    def test_bad_box(self):
        with pytest.raises(ConfigError):
            parse_scene_spec("box = 1, 2, 3")

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            parse_scene_spec("n_frames = many")

    def test_invalid_range(self):
        with pytest.raises(ConfigError):
            parse_scene_spec("z_range = 30, 10")

    def test_base_merge(self):
        base = SceneSpec(seed=3, n_frames=4, boxes=[car()], classes=["Car"])
        spec = parse_scene_spec("n_frames = 2\n", base=base)
        assert spec.seed == 3
        assert spec.n_frames == 2
        assert spec.boxes == base.boxes

    def test_boxes_replace_base(self):
        base = SceneSpec(boxes=[car(), car(x=6.0)])
        spec = parse_scene_spec("box = 0, 1.65, 20, 1.6, 1.8, 4.0, 0\n", base=base)
        assert len(spec.boxes) == 1
        assert spec.boxes[0].z == 20.0

    def test_camera(self):
        cam = SceneSpec().camera()
        assert cam.image_size == (1242, 375)
        assert cam.c_x == 621.0
        assert SceneSpec().half_fov == pytest.approx(math.atan(621.0 / 721.5377))


class TestGenerateScene:
    """Test suite for ray-cast frames."""

    def test_deterministic(self):
        a = generate_scene(SceneSpec(seed=1, random_boxes=2))
        b = generate_scene(SceneSpec(seed=1, random_boxes=2))
        assert np.array_equal(a.points, b.points)
        assert a.gt_boxes == b.gt_boxes

    def test_frames_differ(self):
        spec = SceneSpec(seed=1, random_boxes=2)
        a = generate_scene(spec, frame_index=0)
        b = generate_scene(spec, frame_index=1)
        assert a.gt_boxes != b.gt_boxes

    def test_clean_points_on_visible_faces(self):
        scene = generate_scene(SceneSpec(noise_sigma=0.0), boxes=[car(theta=0.3)])
        obj = scene.object_points(0, clean=True)
        assert len(obj) > 50
        rect = bev_rect_of(scene.gt_boxes[0])
        local = rect.to_local(obj[:, [0, 2]])
        gap = np.minimum(np.abs(np.abs(local[:, 0]) - rect.half_l), np.abs(np.abs(local[:, 1]) - rect.half_w))
        assert np.all(gap < 1e-9)
        # the far half of the box is self-occluded
        assert np.all(obj[:, 2] < scene.gt_boxes[0].z + 1.0)

    def test_noise_applied(self):
        scene = generate_scene(SceneSpec(noise_sigma=0.05), boxes=[car()])
        assert not np.array_equal(scene.points, scene.clean)
        assert np.std(scene.points - scene.clean) == pytest.approx(0.05, rel=0.1)

    def test_occlusion_between_boxes(self):
        near, far = car(z=12.0), car(z=20.0)
        scene = generate_scene(SceneSpec(noise_sigma=0.0), boxes=[near, far])
        assert len(scene.object_points(1)) == 0

    def test_ground_points(self):
        scene = generate_scene(SceneSpec(noise_sigma=0.0), boxes=[car()])
        ground = scene.clean[scene.labels == -1]
        assert np.allclose(ground[:, 1], 1.65)
        assert not np.any(bev_rect_of(scene.gt_boxes[0]).contains(ground[:, [0, 2]]))

    def test_raw_scan_round_trip(self):
        scene = generate_scene(SceneSpec(), boxes=[car()])
        scan = scene.raw_scan()
        cam_pts = scan.points[:, :3] @ scene.cam.extrinsic[:3, :3].T + scene.cam.extrinsic[:3, 3]
        assert np.allclose(cam_pts, scene.points)

    def test_check_boxes_overlap(self):
        with pytest.raises(ValueError, match="overlap"):
            check_boxes([car(), car(x=1.0)])

    def test_check_boxes_behind_camera(self):
        with pytest.raises(ValueError):
            check_boxes([car(z=2.0)])

    def test_touching_boxes_allowed(self):
        check_boxes([car(x=0.0), car(x=4.0)])


class TestOracles:
    """Test suite for the brute-force oracles."""

    def test_grid_minimum_at_box_for_full_outline(self):
        gt = car(x=0.5, z=12.0, theta=0.4)
        pts = ObjectPoints.from_bev(perimeter(gt), y=gt.center_y)
        result = grid_oracle(pts, gt, LossConfig(w_ray=0.0), window=1.0, step=0.05,
                             center=(gt.x, gt.z))
        assert result.argmin == pytest.approx((gt.x, gt.z), abs=1e-9)
        assert result.value_at(gt.x, gt.z) == result.min_value

    def test_grid_shape(self):
        gt = car()
        pts = ObjectPoints.from_bev(perimeter(gt, 5), y=gt.center_y)
        result = grid_oracle(pts, gt, window=1.0, step=0.25)
        assert result.surface.shape == (5, 5)
        assert len(result.xs) == 5

    def test_single_face_minima_split(self):
        # only the near long face: the box must lie behind it
        gt = car(z=15.0)
        scene = generate_scene(SceneSpec(noise_sigma=0.0), boxes=[gt])
        pts = ObjectPoints.from_points(scene.object_points(0, clean=True))
        result = grid_oracle(pts, gt, window=4.0, step=0.1, center=(0.0, 14.1))
        behind, before = split_minima(result, anchor=(0.0, 14.1), normal=(0.0, -1.0))
        assert behind < before
        assert abs(result.argmin[1] - gt.z) <= 0.15

    def test_relative_gap(self):
        assert relative_gap(1.0, 1.5) == pytest.approx(0.5)
        assert relative_gap(0.0, 0.0) == 0.0
        assert relative_gap(0.0, 1.0) == math.inf

    def test_rasterized_iou(self):
        a = BevRect(center=Vec2BEV(x=0, z=0), half_l=1.0, half_w=1.0, theta=0.0)
        b = BevRect(center=Vec2BEV(x=1, z=0), half_l=1.0, half_w=1.0, theta=0.0)
        assert rasterized_iou_oracle(a, b, cell=0.01) == pytest.approx(1 / 3, abs=1e-3)


class TestExport:
    """Test suite for the KITTI-format export."""

    @pytest.fixture
    def scenes(self):
        spec = SceneSpec(seed=0)
        visible = generate_scene(spec, boxes=[car(x=1.0, z=14.0), car(x=-6.0, z=20.0, theta=0.5)])
        hidden = generate_scene(spec, boxes=[car(z=12.0), car(z=20.0)], frame_index=1)
        return [visible, hidden]

    def test_projected_bbox(self):
        cam = SceneSpec().camera()
        bbox, truncated = projected_bbox(car(), cam)
        x1, y1, x2, y2 = bbox
        assert x1 < cam.c_x < x2
        # the whole box sits below the camera height
        assert cam.c_y < y1 < y2
        assert truncated == 0.0

    def test_truncated_at_border(self):
        cam = SceneSpec().camera()
        _, truncated = projected_bbox(car(x=11.0, z=14.0), cam)
        assert 0.0 < truncated < 1.0

    def test_files_written(self, scenes, tmp_path):
        ids = export_kitti(scenes, tmp_path)
        assert ids == ["000000", "000001"]
        for frame_id in ids:
            assert (tmp_path / "velodyne" / f"{frame_id}.bin").exists()
            assert (tmp_path / "calib" / f"{frame_id}.txt").exists()
            assert (tmp_path / "label_2" / f"{frame_id}.txt").exists()

    def test_labels_and_detections(self, scenes, tmp_path):
        export_kitti(scenes, tmp_path)
        labels = parse_labels(tmp_path / "label_2" / "000000.txt")
        assert [l.type for l in labels] == ["Car", "Car"]
        assert labels[0].location == pytest.approx((1.0, 1.65, 14.0))
        hidden = parse_labels(tmp_path / "label_2" / "000001.txt")
        assert [l.occluded for l in hidden] == [0, 3]

        dets = parse_detections(tmp_path / "detections.csv")
        assert len(dets["000000"]) == 2
        assert len(dets["000001"]) == 1
        assert all(d.score == 1.0 for d in dets["000000"])

    def test_scan_and_calib_readable(self, scenes, tmp_path):
        export_kitti(scenes, tmp_path)
        scan = parse_scan(tmp_path / "velodyne" / "000000.bin")
        assert len(scan) == len(scenes[0].points)
        cam = parse_calib(tmp_path / "calib" / "000000.txt")
        assert cam.f_x == pytest.approx(scenes[0].cam.f_x)
        assert np.allclose(cam.extrinsic, scenes[0].cam.extrinsic)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])

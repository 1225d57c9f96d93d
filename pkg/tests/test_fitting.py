"""
Unit tests for the pseudo-label fitter

Run with: pytest tests/test_fitting.py -v
"""

import math
import sys
import os

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.fitting import (
    DEFAULT_CLASS_DIMS,
    FitConfig,
    GradCheckConfig,
    OptimizerConfig,
    adjust_y_2d3d,
    descend,
    fit_frame,
    fit_object,
    fit_objects,
    gradcheck,
    initial_centers,
)
from src.geometry import Box3D, bev_iou, bev_rect_of
from src.losses import balancing_objective
from src.pointcloud import CameraModel, Detection2D, ObjectPoints, project_points
from src.synth import SceneSpec, generate_scene, projected_bbox
from src.utils.errors import FitError


def detection_for(box: Box3D, cam: CameraModel, cls="Car", score=0.8, frame_id="000000") -> Detection2D:
    bbox, _ = projected_bbox(box, cam)
    return Detection2D(frame_id=frame_id, cls=cls, score=score, bbox=bbox)


def synthetic_object(box: Box3D, seed=0, noise=0.02):
    scene = generate_scene(SceneSpec(seed=seed, noise_sigma=noise), boxes=[box])
    pts = ObjectPoints.from_points(scene.object_points(0))
    return pts, scene.cam


class TestFitConfig:
    """Test suite for fitter settings."""

    def test_car_prior(self):
        assert FitConfig().class_dims["Car"] == (1.6, 1.8, 4.0)
        assert set(DEFAULT_CLASS_DIMS) == {"Car", "Pedestrian", "Cyclist"}

    def test_lambda_alias(self):
        assert FitConfig(**{"lambda": 0.25}).lam == 0.25

    def test_rejects_non_positive_dims(self):
        with pytest.raises(ValueError):
            FitConfig(class_dims={"Car": (1.6, 0.0, 4.0)})

    def test_loss_config_toggles(self):
        cfg = FitConfig(use_ray=False, use_balancing=False, use_center_only=True, R=0.5)
        loss_cfg = cfg.loss_config()
        assert loss_cfg.w_ray == 0.0
        assert loss_cfg.w_geom == 1.0
        assert loss_cfg.balance is False
        assert loss_cfg.center_only is True
        assert loss_cfg.R == 0.5


class TestDescent:
    """Test suite for the multistart inits and the descent loop."""

    def test_initial_centers(self):
        starts = initial_centers(np.array([0.0, 10.0]), 1.8, 4.0, ["centroid", "push_w", "push_l"])
        assert starts[0] == (0.0, 10.0)
        assert starts[1] == pytest.approx((0.0, 10.9))
        assert starts[2] == pytest.approx((0.0, 12.0))

    def test_push_follows_viewing_ray(self):
        (x, z), = initial_centers(np.array([3.0, 4.0]), 2.0, 4.0, ["push_w"])
        assert (x, z) == pytest.approx((3.6, 4.8))

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            initial_centers(np.array([0.0, 10.0]), 1.8, 4.0, ["random"])

    def test_descend_quadratic(self):
        run = descend(lambda x, z: (x - 1.0) ** 2 + (z - 2.0) ** 2, 0.0, 0.0, OptimizerConfig(), 1e-3)
        assert run.converged
        assert run.x == pytest.approx(1.0, abs=1e-2)
        assert run.z == pytest.approx(2.0, abs=1e-2)
        assert run.loss <= run.init_loss

    def test_descend_respects_iteration_cap(self):
        run = descend(lambda x, z: abs(x) + abs(z), 50.0, 50.0, OptimizerConfig(max_iters=3), 1e-3)
        assert run.iters == 3
        assert not run.converged


class TestFitObject:
    """Test suite for single-object fitting on synthetic scenes."""

    @pytest.fixture
    def gt(self):
        return Box3D(x=1.5, y=1.65, z=12.0, h=1.6, w=1.8, l=4.0, theta_y=0.3)

    @pytest.fixture
    def fitted(self, gt):
        pts, cam = synthetic_object(gt)
        return fit_object(pts, detection_for(gt, cam), cam), pts

    def test_two_face_box_recovered(self, fitted, gt):
        result, _ = fitted
        assert bev_iou(bev_rect_of(result.box), bev_rect_of(gt)) >= 0.7
        assert math.hypot(result.box.x - gt.x, result.box.z - gt.z) < 0.3

    def test_frozen_dims_and_yaw(self, fitted):
        result, _ = fitted
        assert (result.box.h, result.box.w, result.box.l) == DEFAULT_CLASS_DIMS["Car"]
        assert result.box.theta_y == result.orientation.theta_y

    def test_y_from_mean_height(self, fitted):
        result, pts = fitted
        assert result.box.center_y == pytest.approx(pts.y_L)
        assert result.y_shift == 0.0

    def test_score_passed_through(self, fitted):
        result, _ = fitted
        assert result.score == 0.8
        label = result.to_kitti_label()
        assert label.score == 0.8
        assert label.type == "Car"
        assert label.location == pytest.approx((result.box.x, result.box.y, result.box.z))

    def test_not_worse_than_any_start(self, fitted):
        result, pts = fitted
        objective = balancing_objective(pts, result.box, FitConfig().loss_config())
        h, w, l = DEFAULT_CLASS_DIMS["Car"]
        for x0, z0 in initial_centers(np.mean(pts.bev, axis=0), w, l, FitConfig().multistart):
            assert result.loss_report.balancing <= objective(x0, z0) + 1e-12

    def test_missing_class_prior(self, gt):
        pts, cam = synthetic_object(gt)
        with pytest.raises(FitError) as exc:
            fit_object(pts, detection_for(gt, cam, cls="Van"), cam)
        assert exc.value.reason == "no-dims"

    def test_no_points(self, gt):
        cam = SceneSpec().camera()
        with pytest.raises(FitError):
            fit_object(None, detection_for(gt, cam), cam)

    def test_center_only_is_biased_toward_the_face(self):
        # long face toward the camera, only the near face is visible
        gt = Box3D(x=0.0, y=1.65, z=15.0, h=1.6, w=1.8, l=4.0, theta_y=0.0)
        pts, cam = synthetic_object(gt, seed=3)
        det = detection_for(gt, cam)
        full = fit_object(pts, det, cam)
        center_only = fit_object(pts, det, cam, FitConfig(use_center_only=True))
        assert full.box.z - center_only.box.z > 0.5
        assert abs(full.box.z - gt.z) < 0.3


class TestAdjustY:
    """Test suite for the 2D-3D y consistency step."""

    @pytest.fixture
    def cam(self):
        return CameraModel(f_x=700, f_y=700, c_x=600, c_y=180, image_size=(1242, 375))

    @pytest.fixture
    def box(self):
        return Box3D(x=0.0, y=1.65, z=10.0, h=1.6, w=1.8, l=4.0, theta_y=0.0)

    def span(self, box, cam):
        uv = project_points(box.corners(), cam)
        return float(uv[:, 1].min()), float(uv[:, 1].max())

    def det(self, top, bottom):
        return Detection2D(frame_id="000000", cls="Car", bbox=(500.0, top, 700.0, bottom))

    def test_fixed_point(self, box, cam):
        top, bottom = self.span(box, cam)
        adjusted = adjust_y_2d3d(box, self.det(top, bottom), cam)
        assert adjusted.y == pytest.approx(box.y, abs=1e-9)

    def test_shift_down(self, box, cam):
        top, bottom = self.span(box, cam)
        adjusted = adjust_y_2d3d(box, self.det(top + 10, bottom + 10), cam)
        assert adjusted.y - box.y == pytest.approx(10 * 10 / 700, rel=0.1)
        assert (adjusted.x, adjusted.z, adjusted.theta_y) == (box.x, box.z, box.theta_y)

    def test_idempotent(self, box, cam):
        top, bottom = self.span(box, cam)
        det = self.det(top + 7, bottom + 13)
        once = adjust_y_2d3d(box, det, cam)
        twice = adjust_y_2d3d(once, det, cam)
        assert twice.y == pytest.approx(once.y, abs=1e-9)

    def test_behind_camera_is_noop(self, cam):
        # length along z, so the rear corners sit at z = -1
        box = Box3D(x=0.0, y=1.65, z=1.0, h=1.6, w=1.8, l=4.0, theta_y=math.pi / 2)
        assert box.corners()[:, 2].min() < 0
        assert adjust_y_2d3d(box, self.det(100, 200), cam) == box


class TestFitFrame:
    """Test suite for the per-frame driver."""

    @pytest.fixture
    def scene(self):
        boxes = [
            Box3D(x=-6.0, y=1.65, z=14.0, h=1.6, w=1.8, l=4.0, theta_y=0.0),
            Box3D(x=0.5, y=1.65, z=20.0, h=1.6, w=1.8, l=4.0, theta_y=0.2),
            Box3D(x=6.0, y=1.65, z=25.0, h=1.6, w=1.8, l=4.0, theta_y=-0.1),
        ]
        return generate_scene(SceneSpec(seed=2), boxes=boxes)

    @pytest.fixture
    def detections(self, scene):
        dets = [detection_for(b, scene.cam) for b in scene.gt_boxes]
        # above the horizon, nothing projects here
        dets.append(Detection2D(frame_id="000000", cls="Car", bbox=(100.0, 10.0, 200.0, 100.0)))
        return dets

    def test_no_detections(self, scene):
        assert fit_frame(scene.raw_scan(), scene.cam, []) == ([], [])

    def test_results_and_skips(self, scene, detections):
        results, skips = fit_frame(scene.raw_scan(), scene.cam, detections, seed=1)
        assert [r.det_index for r in results] == [0, 1, 2]
        assert len(skips) == 1
        assert skips[0].det_index == 3
        assert skips[0].reason == "empty-frustum"
        for result, gt in zip(results, scene.gt_boxes):
            assert math.hypot(result.box.x - gt.x, result.box.z - gt.z) < 1.0

    def test_deterministic_given_seed(self, scene, detections):
        a, _ = fit_frame(scene.raw_scan(), scene.cam, detections, seed=4)
        b, _ = fit_frame(scene.raw_scan(), scene.cam, detections, seed=4)
        assert [r.box for r in a] == [r.box for r in b]

    def test_fit_objects_skips_unknown_class(self, scene):
        pts = ObjectPoints.from_points(scene.object_points(0))
        dets = [detection_for(scene.gt_boxes[0], scene.cam, cls="Van"),
                detection_for(scene.gt_boxes[1], scene.cam)]
        results, skips = fit_objects([pts, None], dets, scene.cam)
        assert results == []
        assert [(s.det_index, s.reason) for s in skips] == [(0, "no-dims")]

    def test_fit_objects_applies_y_adjustment(self, scene):
        pts = ObjectPoints.from_points(scene.object_points(0))
        det = detection_for(scene.gt_boxes[0], scene.cam)
        adjusted, _ = fit_objects([pts], [det], scene.cam)
        plain, _ = fit_objects([pts], [det], scene.cam, FitConfig(adjust_y=False))
        assert adjusted[0].box.y == pytest.approx(plain[0].box.y + adjusted[0].y_shift)
        assert plain[0].y_shift == 0.0


class TestGradCheck:
    """Test suite for the finite-difference consistency suite."""

    def test_small_suite_passes(self):
        report = gradcheck(GradCheckConfig(n_configs=5), seed=0)
        assert report.passed
        assert report.n_checked == 5
        assert report.max_rel_error < 1e-3
        assert len(report.errors) == 5

    def test_unreachable_count_fails(self):
        report = gradcheck(GradCheckConfig(n_configs=5, max_attempts=1, min_points=10000), seed=0)
        assert not report.passed
        assert report.n_checked == 0


if __name__ == '__main__':
    pytest.main([__file__, '-v'])

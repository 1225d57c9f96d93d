"""
Unit tests for the point cloud module

Run with: pytest tests/test_pointcloud.py -v
"""

import sys
import os

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.geometry import Box3D
from src.losses import CenterParam, lift_center
from src.pointcloud import (
    CameraModel,
    Detection2D,
    ExtractionConfig,
    GroundPlane,
    ObjectPoints,
    RawScan,
    cluster_select,
    compute_density,
    extract_objects,
    finalize_object_points,
    fit_ground_plane,
    project_points,
    project_to_image,
    remove_ground,
    select_frustum,
    transform_to_camera,
)
from src.synth import SceneSpec, generate_scene, projected_bbox
from src.synth.scene import VELO_TO_CAM
from src.utils.errors import ClusteringError, GroundPlaneError


@pytest.fixture
def cam():
    """A small pinhole camera with identity extrinsic."""
    return CameraModel(f_x=700, f_y=700, c_x=600, c_y=180, image_size=(1200, 360))


class TestCameraModel:
    """Test suite for the camera chain and projections."""

    def test_identity_extrinsic(self, cam):
        scan = RawScan(points=[[1, 2, 3, 0], [0, 0, -5, 0]])
        out = transform_to_camera(scan, cam)
        assert out.shape == (1, 3)
        assert np.allclose(out[0], [1, 2, 3])

    def test_kitti_style_extrinsic(self):
        ext = VELO_TO_CAM.copy()
        ext[:3, 3] = [0.1, -0.2, 0.3]
        cam = CameraModel(f_x=700, f_y=700, c_x=600, c_y=180, extrinsic=ext)
        lidar = np.array([[10.0, 1.0, 0.5], [20.0, -2.0, -1.0], [5.0, 0.0, 0.0]])
        out = transform_to_camera(RawScan(points=np.column_stack([lidar, np.zeros(3)])), cam)
        # camera x = -lidar y, y = -lidar z, z = lidar x, plus translation
        expected = np.column_stack([-lidar[:, 1] + 0.1, -lidar[:, 2] - 0.2, lidar[:, 0] + 0.3])
        assert np.allclose(out, expected)

    def test_min_depth_drops_near_points(self, cam):
        scan = RawScan(points=[[0, 0, 0.05, 0], [0, 0, 0.1, 0], [0, 0, 0.2, 0]])
        out = transform_to_camera(scan, cam)
        assert out[:, 2].tolist() == [0.2]

    def test_rejects_non_orthonormal_extrinsic(self):
        with pytest.raises(ValueError):
            CameraModel(f_x=700, f_y=700, c_x=600, c_y=180, extrinsic=2 * np.eye(4))

    def test_rejects_bad_scan_shape(self):
        with pytest.raises(ValueError):
            RawScan(points=np.zeros((5, 3)))

    def test_project_optical_axis(self, cam):
        assert project_to_image((0, 0, 10), cam) == (600, 180)

    def test_project_offset(self, cam):
        u, v = project_to_image((1, 0, 10), cam)
        assert u == pytest.approx(670)
        assert v == pytest.approx(180)

    def test_project_rejects_behind_camera(self, cam):
        with pytest.raises(ValueError):
            project_to_image((0, 0, -1), cam)
        with pytest.raises(ValueError):
            project_points(np.array([[0, 0, 0.0]]), cam)

    def test_lift_then_project_round_trip(self, cam):
        for t_x, t_y, z in [(600, 180, 10), (123.4, 300.2, 25.0), (1100, 20, 3.3)]:
            p = lift_center(CenterParam(t_x=t_x, t_y=t_y, z=z), cam)
            u, v = project_to_image(p, cam)
            assert u == pytest.approx(t_x, abs=1e-9)
            assert v == pytest.approx(t_y, abs=1e-9)

    def test_from_kitti_keeps_projection(self):
        p2 = np.array([[721.5, 0, 609.5, 44.8], [0, 721.5, 172.8, 0.2], [0, 0, 1, 0.003]])
        cam = CameraModel.from_kitti(p2, np.eye(3), VELO_TO_CAM[:3, :4])
        assert cam.f_x == pytest.approx(721.5)
        assert cam.c_y == pytest.approx(172.8)
        assert np.allclose(cam.projection_matrix(), p2)
        assert np.allclose(cam.extrinsic, VELO_TO_CAM)


class TestGroundPlane:
    """Test suite for RANSAC ground estimation and removal."""

    @pytest.fixture
    def ground(self):
        rng = np.random.default_rng(0)
        return np.column_stack([rng.uniform(-10, 10, 1000), np.full(1000, 1.65), rng.uniform(5, 40, 1000)])

    def test_exact_plane(self, ground):
        plane = fit_ground_plane(ground)
        assert np.allclose(plane.normal, [0, -1, 0], atol=1e-9)
        assert plane.d == pytest.approx(1.65, abs=1e-9)
        assert plane.inlier_ratio == 1.0

    def test_plane_with_box_points(self, ground):
        rng = np.random.default_rng(1)
        box = np.column_stack([rng.uniform(-1, 1, 200), rng.uniform(0.05, 1.2, 200), rng.uniform(14, 16, 200)])
        plane = fit_ground_plane(np.vstack([ground, box]))
        assert abs(plane.d - 1.65) < 0.02
        assert plane.normal[1] < 0

    def test_too_few_points(self, ground):
        with pytest.raises(GroundPlaneError):
            fit_ground_plane(ground[:40])

    def test_low_inlier_ratio_rejected(self):
        rng = np.random.default_rng(2)
        cloud = rng.uniform(-20, 20, size=(300, 3))
        with pytest.raises(GroundPlaneError):
            fit_ground_plane(cloud, ExtractionConfig(ransac_min_inlier_ratio=0.9))

    def test_remove_ground_keeps_points_above_threshold(self):
        plane = GroundPlane.horizontal(1.65)
        pts = np.array([[0, 1.65, 10], [0, 1.5, 10], [0, 1.44, 10], [0, 0.5, 10], [0, 2.0, 10]])
        kept = remove_ground(pts, plane)
        assert kept[:, 1].tolist() == [1.44, 0.5]

    def test_horizontal_plane_height(self):
        plane = GroundPlane.horizontal(1.65)
        assert plane.height_above(np.array([[0, 0.65, 5]]))[0] == pytest.approx(1.0)


class TestFrustumAndClustering:
    """Test suite for frustum selection and dominant-cluster selection."""

    @pytest.fixture
    def det(self):
        return Detection2D(frame_id="000000", cls="Car", bbox=(590, 170, 610, 190))

    def test_point_at_bbox_center_kept(self, cam, det):
        assert len(select_frustum(np.array([[0.0, 0.0, 10.0]]), det, cam)) == 1

    def test_point_one_pixel_outside_dropped(self, cam, det):
        assert len(select_frustum(np.array([[11.0 / 70.0, 0.0, 10.0]]), det, cam)) == 0

    def test_mask_takes_precedence(self, cam):
        mask = np.zeros((360, 1200), dtype=bool)
        mask[170:191, 590:600] = True
        det = Detection2D(frame_id="000000", cls="Car", bbox=(590, 170, 610, 190), mask=mask)
        pts = np.array([[5.0 / 70.0, 0.0, 10.0], [-5.0 / 70.0, 0.0, 10.0]])
        kept = select_frustum(pts, det, cam)
        assert kept.shape == (1, 3)
        assert kept[0, 0] < 0

    def test_bbox_must_be_ordered(self):
        with pytest.raises(ValueError):
            Detection2D(frame_id="0", cls="Car", bbox=(10, 10, 5, 20))

    def test_clamped_bbox(self):
        det = Detection2D(frame_id="0", cls="Car", bbox=(-20, 10, 1300, 400))
        assert det.clamped((1242, 375)).bbox == (0.0, 10.0, 1241.0, 374.0)

    def test_dominant_cluster(self):
        rng = np.random.default_rng(0)
        big = rng.uniform(0, 0.5, size=(80, 3)) + [0, 0, 10]
        small = rng.uniform(0, 0.5, size=(20, 3)) + [5, 0, 10]
        out = cluster_select(np.vstack([small, big]))
        assert len(out) == 80
        assert np.all(out[:, 0] < 1)

    def test_single_cluster_returned_whole(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(0, 0.5, size=(100, 3))
        assert len(cluster_select(pts)) == 100

    def test_all_noise(self):
        g = np.arange(5) * 2.0
        pts = np.array([[x, y, z] for x in g for y in g for z in g])
        with pytest.raises(ClusteringError) as exc:
            cluster_select(pts)
        assert exc.value.reason == "all-noise"

    def test_cluster_too_small(self):
        rng = np.random.default_rng(2)
        with pytest.raises(ClusteringError) as exc:
            cluster_select(rng.uniform(0, 0.3, size=(10, 3)))
        assert exc.value.reason == "too-few-points"

    def test_empty_input(self):
        with pytest.raises(ClusteringError) as exc:
            cluster_select(np.empty((0, 3)))
        assert exc.value.reason == "empty-frustum"


class TestObjectPoints:
    """Test suite for median filtering, sampling and densities."""

    def test_median_split_and_resampling(self):
        pts = np.column_stack([np.linspace(0, 1, 100), np.r_[np.full(50, 0.5), np.full(50, 1.5)], np.full(100, 10.0)])
        obj = finalize_object_points(pts, rng_seed=0)
        assert obj.M == 100
        assert np.all(obj.pts3d[:, 1] == 0.5)
        assert obj.y_L == 0.5

    def test_equal_heights_all_survive(self):
        pts = np.column_stack([np.arange(150) * 0.01, np.full(150, 1.0), np.full(150, 10.0)])
        obj = finalize_object_points(pts, rng_seed=0)
        # no replacement when enough points survive
        assert len(np.unique(obj.pts3d[:, 0])) == 100

    def test_sampling_is_deterministic(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(0, 1, size=(60, 3))
        a = finalize_object_points(pts, rng_seed=42)
        b = finalize_object_points(pts, rng_seed=42)
        assert np.array_equal(a.pts3d, b.pts3d)

    def test_density_example(self):
        bev = np.array([[0, 0], [0.1, 0], [0.2, 0], [5, 5]])
        assert compute_density(bev, 0.4).tolist() == [3, 3, 3, 1]

    def test_density_radius_is_strict(self):
        bev = np.array([[0, 0], [0.5, 0]])
        assert compute_density(bev, 0.5).tolist() == [1, 1]

    def test_object_points_fields(self):
        obj = ObjectPoints.from_points(np.array([[0, 1, 10], [2, 3, 11]]), R=0.4)
        assert obj.M == 2
        assert obj.y_L == 2.0
        assert obj.d_x == 2.0
        assert np.all(obj.density >= 1)
        assert np.array_equal(obj.bev, [[0, 10], [2, 11]])


class TestExtractObjects:
    """Test suite for the full extraction chain on synthetic frames."""

    @pytest.fixture
    def scene(self):
        box = Box3D(x=0.5, y=1.65, z=15.0, h=1.6, w=1.8, l=4.0, theta_y=0.0)
        return generate_scene(SceneSpec(seed=5), boxes=[box])

    @pytest.fixture
    def detections(self, scene):
        bbox, _ = projected_bbox(scene.gt_boxes[0], scene.cam)
        return [Detection2D(frame_id="000000", cls="Car", bbox=bbox),
                Detection2D(frame_id="000000", cls="Car", bbox=(5, 5, 40, 40))]

    def test_object_points_project_inside_bbox(self, scene, detections):
        objects, skips = extract_objects(scene.raw_scan(), scene.cam, detections, seed=1)
        obj = objects[0]
        assert obj is not None
        assert obj.M == 100
        uv = project_points(obj.pts3d, scene.cam)
        x1, y1, x2, y2 = detections[0].bbox
        assert np.all((uv[:, 0] >= x1) & (uv[:, 0] <= x2) & (uv[:, 1] >= y1) & (uv[:, 1] <= y2))
        assert np.array_equal(obj.density, compute_density(obj.bev, obj.R))

    def test_points_lie_on_the_box(self, scene, detections):
        objects, _ = extract_objects(scene.raw_scan(), scene.cam, detections, seed=1)
        from src.geometry import bev_rect_of
        assert np.all(bev_rect_of(scene.gt_boxes[0]).contains(objects[0].bev, tol=0.1))

    def test_empty_detection_is_skipped(self, scene, detections):
        objects, skips = extract_objects(scene.raw_scan(), scene.cam, detections, seed=1)
        assert objects[1] is None
        assert len(skips) == 1
        assert skips[0].det_index == 1
        assert skips[0].reason == "empty-frustum"

    def test_unusable_detections_are_skipped(self, scene, detections):
        outside = Detection2D(frame_id="000000", cls="Car", bbox=(1300, 50, 1400, 120))
        inverted = Detection2D.model_construct(frame_id="000000", cls="Car", score=0.9,
                                               bbox=(700.0, 50.0, 600.0, 120.0), mask=None)
        objects, skips = extract_objects(scene.raw_scan(), scene.cam,
                                         [outside, detections[0], inverted], seed=1)
        assert objects[0] is None and objects[2] is None
        assert objects[1] is not None
        assert [(s.det_index, s.reason) for s in skips] == [(0, "bad-detection"), (2, "bad-detection")]

    def test_detection_problem(self):
        inside = Detection2D(frame_id="0", cls="Car", bbox=(-20, 10, 1300, 400))
        assert inside.problem((1242, 375)) is None
        outside = Detection2D(frame_id="0", cls="Car", bbox=(10, 400, 50, 450))
        assert "collapses" in outside.problem((1242, 375))

    def test_deterministic_given_seed(self, scene, detections):
        a, _ = extract_objects(scene.raw_scan(), scene.cam, detections, seed=9)
        b, _ = extract_objects(scene.raw_scan(), scene.cam, detections, seed=9)
        assert np.array_equal(a[0].pts3d, b[0].pts3d)

    def test_no_detections(self, scene):
        assert extract_objects(scene.raw_scan(), scene.cam, []) == ([], [])

    def test_ransac_fallback_logged(self, cam, mocker):
        warn = mocker.patch("src.pointcloud.extraction.logger.warning")
        scan = RawScan(points=[[0, 0, 10, 0]] * 3)
        det = Detection2D(frame_id="000001", cls="Car", bbox=(500, 100, 700, 300))
        objects, skips = extract_objects(scan, cam, [det])
        assert objects == [None]
        assert warn.call_count >= 1

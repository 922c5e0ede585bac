#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Sat Oct 17 2026

preprocessing, features, RANSAC, ICP and the outer registration loop
"""
import re
from logging import DEBUG

import numpy as np
from pytest import approx, raises
from scipy.spatial.transform import Rotation

from laserinsert.errors import (DegenerateFeatureError, DivergenceError,
                                InsufficientCorrespondencesError,
                                InvalidArgumentError,
                                RegistrationFailedError)
from laserinsert.geom import Pose, PointCloud, quat_distance, transform_cloud
from laserinsert.registration import (DESCRIPTOR_SIZE, HISTOGRAM_BINS,
                                      RegistrationParams, compute_features,
                                      estimate_normals, estimate_pose,
                                      icp_refine, preprocess, ransac_register,
                                      remove_statistical_outliers,
                                      voxel_downsample)
from laserinsert.scansim import (Box, CalibrationError, CompositeSurface,
                                 Cylinder, EyePlate, ScannerConfig, Scene,
                                 ScenePart, plan_sweep, sample_mesh,
                                 sweep_scan_parts)

PART = CompositeSurface((
    (Box((2e-3, 1e-3, 5e-4)), Pose()),
    (Cylinder(3e-4, 5e-4), Pose([1.2e-3, 4e-4, 1e-3]))
))
MOVE = Pose.from_rotation([1e-3, -5e-4, 2e-4],
                          Rotation.from_rotvec([0.1, -0.15, 0.2]))


def part_params(**kwargs) -> RegistrationParams:
    settings = dict(rho_icp=1e-8, voxel_size=1e-4, feature_radius=5e-4,
                    ransac_inlier_threshold=1.5e-4,
                    icp_max_correspondence_dist=3e-4,
                    ransac_early_stop=True)
    settings.update(kwargs)
    return RegistrationParams(**settings)


def grid(count: int = 10) -> np.ndarray:
    x, y = np.meshgrid(np.arange(count), np.arange(count))
    return np.column_stack([x.ravel(), y.ravel(), np.zeros(count ** 2)])


def test_params_validation():
    with raises(InvalidArgumentError):
        RegistrationParams(q0=(1.0, 1.0, 0.0, 0.0))
    with raises(InvalidArgumentError):
        RegistrationParams(rho_icp=0.0)
    with raises(InvalidArgumentError):
        RegistrationParams(normal_neighbours=2)
    with raises(InvalidArgumentError):
        RegistrationParams(ransac_confidence=1.0)
    params = RegistrationParams.from_dict({"voxel_size": 1e-4})
    assert params.with_q0([0, 1, 0, 0]).q0 == (0.0, 1.0, 0.0, 0.0)
    assert params.q0 == (1.0, 0.0, 0.0, 0.0)


def test_outlier_removed():
    cloud = PointCloud(np.vstack([grid(), [[100.0, 100.0, 100.0]]]))
    filtered = remove_statistical_outliers(cloud, 20, 2.0)
    assert len(filtered) == 100
    assert filtered.points.max() < 10


def test_voxel_centroids_and_normals():
    cloud = PointCloud([[0.1, 0.1, 0.1], [0.3, 0.3, 0.3], [1.5, 0.5, 0.5]],
                       [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    down = voxel_downsample(cloud, 1.0)
    assert len(down) == 2
    first = np.argmin(down.points[:, 0])
    assert np.allclose(down.points[first], [0.2, 0.2, 0.2])
    assert np.allclose(down.normals[first], [0, np.sqrt(0.5), np.sqrt(0.5)])


def test_preprocess_rejects_empty():
    with raises(InvalidArgumentError):
        preprocess(PointCloud.empty(), RegistrationParams())


def test_normals_face_viewpoint():
    plane = PointCloud(grid() * 0.1, viewpoint=[0.5, 0.5, -3.0])
    normals = estimate_normals(plane).normals
    assert np.allclose(normals, [0, 0, -1])
    with raises(DegenerateFeatureError):
        estimate_normals(PointCloud([[0, 0, 0], [1, 0, 0]]))


def test_features_histograms():
    cloud = voxel_downsample(sample_mesh(PART, 20000, 0), 1e-4)
    features = compute_features(cloud, 5e-4)
    assert features.descriptors.shape == (len(features), DESCRIPTOR_SIZE)
    assert len(features) > 0.5 * len(cloud)
    for block in range(3):
        sums = features.descriptors[
            :, block * HISTOGRAM_BINS:(block + 1) * HISTOGRAM_BINS
        ].sum(axis=1)
        assert np.allclose(sums, 100.0)


def test_features_radius_below_spacing():
    cloud = voxel_downsample(sample_mesh(PART, 20000, 0), 1e-4)
    with raises(DegenerateFeatureError):
        compute_features(cloud, 1e-5)


def test_icp_recovers_small_offset():
    cloud = sample_mesh(PART, 20000, 1)
    offset = Pose.from_rotation([5e-6, -3e-6, 2e-6],
                                Rotation.from_rotvec([0.002, 0.0, -0.001]))
    trace = []
    fitness, total = icp_refine(cloud, transform_cloud(cloud, offset),
                                RegistrationParams(), offset, trace)
    assert fitness < 1e-12
    assert np.linalg.norm(total.position) < 1e-6
    assert quat_distance(total.orientation, [1, 0, 0, 0]) < 1e-3
    assert trace[-1] <= trace[0]


def test_icp_diverges_without_overlap():
    cloud = sample_mesh(PART, 1000, 1)
    far = transform_cloud(cloud, Pose([1.0, 0.0, 0.0]))
    with raises(DivergenceError):
        icp_refine(cloud, far, RegistrationParams())


def test_ransac_independent_of_workers():
    ref = compute_features(voxel_downsample(sample_mesh(PART, 20000, 2),
                                            1e-4), 5e-4)
    scan = compute_features(voxel_downsample(
        transform_cloud(sample_mesh(PART, 20000, 3), MOVE), 1e-4), 5e-4)
    single = ransac_register(scan, ref, part_params(ransac_iterations=1024),
                             5)
    threaded = ransac_register(scan, ref,
                               part_params(ransac_iterations=1024,
                                           workers=3), 5)
    assert np.allclose(single[0].matrix(), threaded[0].matrix(), atol=1e-12)
    assert single[2] == approx(threaded[2])


def test_estimate_pose():
    ref = sample_mesh(PART, 40000, 4)
    scan = transform_cloud(sample_mesh(PART, 40000, 5), MOVE)
    result = estimate_pose(scan, ref, part_params(q0=MOVE.orientation), 6)
    assert result.fitness <= 1e-8
    assert np.linalg.norm(result.pose.position - MOVE.position) < 5e-5
    assert quat_distance(result.pose.orientation, MOVE.orientation) < 0.03
    assert 1 <= result.outer_loops_used <= 10
    assert len(result.fitness_history) == result.outer_loops_used
    assert result.to_dict()["fitness"] == approx(result.fitness)


def test_estimate_pose_gives_up():
    ref = sample_mesh(PART, 20000, 4)
    scan = transform_cloud(sample_mesh(PART, 20000, 5), MOVE)
    params = part_params(q0=MOVE.orientation, rho_icp=1e-30,
                         max_outer_loops=2, ransac_iterations=512)
    with raises(RegistrationFailedError) as error:
        estimate_pose(scan, ref, params, 7)
    if error.value.best is not None:
        assert error.value.best.outer_loops_used == 2


def test_ransac_runs_every_iteration_unless_told(caplog):
    ref = compute_features(voxel_downsample(sample_mesh(PART, 20000, 2),
                                            1e-4), 5e-4)
    scan = compute_features(voxel_downsample(
        transform_cloud(sample_mesh(PART, 20000, 3), MOVE), 1e-4), 5e-4)
    caplog.set_level(DEBUG)
    ransac_register(scan, ref, part_params(ransac_iterations=2048,
                                           ransac_early_stop=False), 8)
    assert "after 2048 hypotheses" in caplog.text
    caplog.clear()
    ransac_register(scan, ref, part_params(ransac_iterations=2048), 8)
    drawn = re.search(r"after (\d+) hypotheses", caplog.text)
    assert 0 < int(drawn.group(1)) <= 2048


def needle_plate_scan(seed: int) -> PointCloud:
    plate = EyePlate(6e-3, 1.2e-3, 5e-4, (1.5e-4, 1.75e-4), 8e-4)
    scanner = ScannerConfig()
    poses = plan_sweep([0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], scanner,
                       np.pi / 4, 2e-3)
    return sweep_scan_parts(Scene((ScenePart("target", plate),)), poses,
                            scanner, CalibrationError(), seed)["target"]


def test_needle_plate_perturbations():
    ref = needle_plate_scan(10)
    full = needle_plate_scan(11)
    rng = np.random.default_rng(12)
    params = RegistrationParams(rho_icp=2e-9, ransac_early_stop=True,
                                feature_radius=3e-4)
    recovered = 0
    for run in range(20):
        scan = full.select(rng.choice(len(full), 5000, replace=False))
        direction = rng.normal(size=(2, 3))
        direction /= np.linalg.norm(direction, axis=1)[:, None]
        truth = Pose.from_rotation(
            direction[0] * rng.uniform(0, 1e-3),
            Rotation.from_rotvec(direction[1]
                                 * rng.uniform(0, np.radians(15)))
        )
        try:
            result = estimate_pose(transform_cloud(scan, truth), ref,
                                   params, run)
        except RegistrationFailedError:
            continue
        recovered += (
            np.linalg.norm(result.pose.position - truth.position) < 3e-5
            and quat_distance(result.pose.orientation, truth.orientation)
            < np.radians(0.5)
        )
    assert recovered >= 19


def test_gate_soundness():
    rng = np.random.default_rng(13)
    ref = sample_mesh(PART, 3000, 14)
    for run in range(200):
        truth = Pose.from_rotation(rng.uniform(-5e-4, 5e-4, 3),
                                   Rotation.random(random_state=rng))
        q0 = Rotation.random(random_state=rng).as_quat()[[3, 0, 1, 2]]
        rho_rot = rng.uniform(0.1, np.pi)
        params = part_params(q0=q0, rho_rot=rho_rot, voxel_size=1.5e-4,
                             max_outer_loops=3, ransac_iterations=256,
                             rho_icp=rng.choice([1e-30, 1e-8]))
        scan = transform_cloud(sample_mesh(PART, 3000, 15 + run), truth)
        try:
            result = estimate_pose(scan, ref, params, run)
        except RegistrationFailedError as error:
            result = error.best
        except (DegenerateFeatureError, InsufficientCorrespondencesError):
            continue
        if result is None:
            continue
        assert quat_distance(result.pose.orientation, q0) < rho_rot
        history = np.array(result.fitness_history)
        assert np.all(np.diff(history) <= 0)
        assert history[-1] == approx(result.fitness)

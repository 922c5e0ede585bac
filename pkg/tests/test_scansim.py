#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Sat Oct 17 2026

surfaces, the virtual line scanner and mesh sampling
"""
import numpy as np
from pytest import approx, mark, raises
from scipy.stats import chi2

from laserinsert.errors import DegenerateMeshError, InvalidArgumentError
from laserinsert.geom import Pose
from laserinsert.scansim import (Box, CalibrationError, CompositeSurface,
                                 Cylinder, EyePlate, ScannerConfig, Scene,
                                 ScenePart, Sphere, TriangleMesh, plan_sweep,
                                 sample_mesh, scan_profile, sweep_scan,
                                 sweep_scan_parts)


def rays(origin, direction):
    direction = np.asarray(direction, dtype=float)
    return (np.array([origin], dtype=float),
            np.array([direction / np.linalg.norm(direction)]))


@mark.parametrize("surface,origin,direction,expected", [
    (Box((1.0, 1.0, 1.0)), [0, 0, -5], [0, 0, 1], 4.0),
    (Box((1.0, 1.0, 1.0)), [3, 0, -5], [0, 0, 1], np.inf),
    (Cylinder(1.0, 2.0), [-5, 0, 0], [1, 0, 0], 4.0),
    (Cylinder(1.0, 2.0), [0, 0, -5], [0, 0, 1], 3.0),
    (Sphere(1.0), [0, 0, -3], [0, 0, 1], 2.0),
    (Sphere(1.0), [0, 2, -3], [0, 0, 1], np.inf),
])
def test_primitive_hits(surface, origin, direction, expected):
    assert surface.intersect(*rays(origin, direction))[0] == approx(expected)


def test_rays_start_inside():
    t = Box((1.0, 1.0, 1.0)).intersect(*rays([0, 0, 0], [0, 0, 1]))
    assert np.isinf(t[0])


def test_eye_plate_hole_passes_rays():
    plate = EyePlate(6.0, 1.2, 0.5, (0.15, 0.175), 0.8)
    assert np.isinf(plate.intersect(*rays([0, 0, -1], [0, 0, 1]))[0])
    assert plate.intersect(*rays([2, 0, -1], [0, 0, 1]))[0] == approx(1.0)


def test_eye_plate_hole_wall():
    plate = EyePlate(6.0, 1.2, 0.5, (0.15, 0.175), 0.8)
    t = plate.intersect(*rays([-0.1, 0, -1], [0.2, 0, 1]))[0]
    assert t == approx(np.sqrt(0.25 ** 2 + 1.25 ** 2))


def test_eye_plate_validation():
    with raises(InvalidArgumentError):
        EyePlate(1.0, 1.0, 0.1, (0.6, 0.1))
    with raises(InvalidArgumentError):
        EyePlate(1.0, 1.0, 0.0, (0.1, 0.1))


def test_composite_takes_nearest_component():
    composite = CompositeSurface((
        (Cylinder(1.0, 1.0), Pose([0, 0, 0])),
        (Box((0.5, 0.5, 0.5)), Pose([0, 0, -3]))
    ))
    assert composite.intersect(*rays([0, 0, -5], [0, 0, 1]))[0] \
        == approx(1.5)
    assert composite.to_mesh().faces.shape == (12 + 4 * 64, 3)


def test_stl_mesh_intersection():
    mesh = TriangleMesh.from_file("data/test/cube.stl")
    assert mesh.intersect(*rays([0.3, 0.6, -1], [0, 0, 1]))[0] \
        == approx(1.0)
    assert mesh.intersect(*rays([0.3, 0.6, 0.5], [0, 0, 1]))[0] \
        == approx(0.5)
    assert np.isinf(mesh.intersect(*rays([2, 2, -1], [0, 0, 1]))[0])


def test_box_mesh_agrees_with_box():
    rng = np.random.default_rng(2)
    box = Box((0.3, 0.2, 0.1))
    origins = rng.normal(size=(200, 3)) + [0, 0, -3]
    targets = rng.uniform(-0.25, 0.25, size=(200, 3)) * [1, 0.6, 0.3]
    directions = targets - origins
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    assert np.allclose(box.to_mesh().intersect(origins, directions),
                       box.intersect(origins, directions))


def test_scene_validation():
    part = ScenePart("a", Sphere(1.0))
    with raises(InvalidArgumentError):
        Scene((part, ScenePart("a", Sphere(2.0))))
    sliver = TriangleMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]],
                          [[0, 1, 2], [0, 1, 3]])
    with raises(DegenerateMeshError):
        Scene((ScenePart("mesh", sliver),))


def test_scene_owner_and_pose():
    scene = Scene((ScenePart("near", Sphere(1.0), Pose([0, 0, 0])),
                   ScenePart("far", Sphere(1.0), Pose([0, 0, 5]))))
    t, owner = scene.intersect(*rays([0, 0, -5], [0, 0, 1]))
    assert t[0] == approx(4.0)
    assert owner[0] == 0
    moved = scene.with_pose("near", Pose([0, 0, 20]))
    t, owner = moved.intersect(*rays([0, 0, -5], [0, 0, 1]))
    assert t[0] == approx(9.0)
    assert owner[0] == 1
    assert scene.only("far").part_ids == ["far"]


def test_scanner_config_validation():
    with raises(InvalidArgumentError):
        ScannerConfig(points_per_profile=4096)
    with raises(InvalidArgumentError):
        ScannerConfig(depth_noise_std=-1.0)
    with raises(InvalidArgumentError):
        ScannerConfig(sweep_step=0.0)
    assert ScannerConfig(depth_noise_std=0.0).depth_noise_std == 0.0


def test_lateral_positions_on_grid():
    cfg = ScannerConfig()
    lateral = cfg.lateral_positions()
    assert len(lateral) == 2048
    assert np.all(np.diff(lateral) > 0)
    steps = (lateral - lateral[0]) / cfg.lateral_resolution
    assert np.allclose(steps, np.round(steps), atol=1e-6)


def floor_scene() -> Scene:
    return Scene((ScenePart("floor", Box((0.05, 0.05, 0.01)),
                            Pose([0, 0, 0.01])),))


def test_profile_depths():
    cfg = ScannerConfig(depth_noise_std=0.0)
    profile = scan_profile(floor_scene(), Pose([0, 0, -0.1]), cfg,
                           np.random.default_rng(0))
    assert len(profile) == 2048
    assert np.allclose(profile.samples[:, 2], 0.1)
    assert np.all(np.diff(profile.samples[:, 0]) > 0)


def test_profile_depth_noise():
    cfg = ScannerConfig()
    profile = scan_profile(floor_scene(), Pose([0, 0, -0.1]), cfg,
                           np.random.default_rng(0))
    residuals = profile.samples[:, 2] - 0.1
    statistic = np.sum(residuals ** 2) / cfg.depth_noise_std ** 2
    count = len(residuals)
    assert chi2.ppf(0.005, count) < statistic < chi2.ppf(0.995, count)


def test_sweep_reports_through_assumed_pose():
    cfg = ScannerConfig(depth_noise_std=0.0)
    trajectory = [Pose([0, y, -0.1]) for y in np.linspace(-1e-3, 1e-3, 5)]
    cloud = sweep_scan(floor_scene(), trajectory, cfg, CalibrationError(), 1)
    assert len(cloud) == 5 * 2048
    assert np.allclose(cloud.points[:, 2], 0.0, atol=1e-12)
    closer = CalibrationError(Pose([0, 0, 1e-3]))
    cloud = sweep_scan(floor_scene(), trajectory, cfg, closer, 1)
    assert np.allclose(cloud.points[:, 2], -1e-3)


def test_sweep_deterministic_and_parallel_invariant():
    cfg = ScannerConfig()
    trajectory = [Pose([0, y, -0.1]) for y in np.linspace(-1e-3, 1e-3, 6)]
    cal = CalibrationError.from_magnitudes(5e-4, 0.01, 3)
    one = sweep_scan(floor_scene(), trajectory, cfg, cal, 7, workers=1)
    many = sweep_scan(floor_scene(), trajectory, cfg, cal, 7, workers=3)
    assert np.array_equal(one.points, many.points)
    other = sweep_scan(floor_scene(), trajectory, cfg, cal, 8)
    assert not np.array_equal(one.points, other.points)


def test_sweep_validation():
    cfg = ScannerConfig()
    with raises(InvalidArgumentError):
        sweep_scan(floor_scene(), [], cfg, CalibrationError(), 0)
    with raises(InvalidArgumentError):
        sweep_scan(Scene(()), [Pose()], cfg, CalibrationError(), 0)


def test_sweep_parts_split_hits():
    scene = Scene((
        ScenePart("left", Box((0.002, 0.002, 0.002)), Pose([-0.005, 0, 0])),
        ScenePart("right", Box((0.002, 0.002, 0.002)), Pose([0.005, 0, 0]))
    ))
    cfg = ScannerConfig()
    trajectory = [Pose([0, y, -0.1]) for y in np.linspace(-1e-3, 1e-3, 3)]
    parts = sweep_scan_parts(scene, trajectory, cfg, CalibrationError(), 0)
    whole = sweep_scan(scene, trajectory, cfg, CalibrationError(), 0)
    assert len(parts["left"]) + len(parts["right"]) == len(whole)
    assert np.all(parts["left"].points[:, 0] < 0)
    assert np.all(parts["right"].points[:, 0] > 0)


def test_calibration_magnitudes():
    cal = CalibrationError.from_magnitudes(5e-4, 0.0087, 0)
    assert cal.translation == approx(5e-4)
    assert cal.angle == approx(0.0087)


def test_plan_sweep_centres_on_point():
    cfg = ScannerConfig()
    center = np.array([0.4, 0.1, 0.3])
    poses = plan_sweep(center, [1, 0, 0, 0], cfg, np.pi / 4, 2e-3)
    assert len(poses) == 81
    middle = poses[40]
    assert np.allclose(middle.position + cfg.standoff * middle.axis(2),
                       center)
    assert np.allclose(middle.axis(2), [np.sqrt(0.5), 0, np.sqrt(0.5)])
    steps = np.linalg.norm(np.diff([pose.position for pose in poses],
                                   axis=0), axis=1)
    assert np.allclose(steps, cfg.sweep_step)


def test_sample_cube_faces():
    mesh = TriangleMesh.from_file("data/test/cube.stl")
    cloud = sample_mesh(mesh, 6000, 0)
    assert len(cloud) == 6000
    on_face = np.isclose(cloud.points, 0.0) | np.isclose(cloud.points, 1.0)
    assert np.all(on_face.any(axis=1))
    outward = np.einsum("nk,nk->n", cloud.normals, cloud.points - 0.5)
    assert np.all(outward > 0)
    sigma = np.sqrt(6000 * (1 / 6) * (5 / 6))
    for axis in range(3):
        for side in (-1.0, 1.0):
            count = np.sum(np.isclose(cloud.normals[:, axis], side))
            assert abs(count - 1000) < 3 * sigma


def test_sample_area_weighting():
    mesh = TriangleMesh.from_file("data/test/two_triangles.obj")
    cloud = sample_mesh(mesh, 10000, 1)
    big = np.mean(cloud.points[:, 0] < 5)
    assert abs(big - 0.9) < 3 * np.sqrt(0.09 / 10000)


def test_sample_deterministic():
    mesh = Box((1.0, 2.0, 3.0))
    a = sample_mesh(mesh, 100, 5)
    b = sample_mesh(mesh, 100, 5)
    assert np.array_equal(a.points, b.points)


def test_sample_errors():
    line = TriangleMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])
    with raises(DegenerateMeshError):
        sample_mesh(line, 10, 0)
    with raises(InvalidArgumentError):
        sample_mesh(Sphere(1.0), 10, 0)
    with raises(InvalidArgumentError):
        sample_mesh(Box((1.0, 1.0, 1.0)), 0, 0)


def test_sample_single_triangle():
    corners = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    cloud = sample_mesh(TriangleMesh(corners, [[0, 1, 2]]), 5, 3)
    assert len(cloud) == 5
    u = cloud.points[:, 0] / 2.0
    v = cloud.points[:, 1]
    assert np.all(u >= 0) and np.all(v >= 0) and np.all(u + v <= 1 + 1e-12)
    assert np.allclose(cloud.points[:, 2], 0.0)
    assert np.allclose(np.abs(cloud.normals[:, 2]), 1.0)

#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Sat Oct 17 2026

kinematics, inverse kinematics and the proprioception error model
"""
import numpy as np
from pytest import approx, mark, raises
from scipy.spatial.transform import Rotation

from laserinsert.arm import (ArmModel, ErrorModelConfig, IkParams,
                             ProprioceptionError, SerialChain, SimulatedArm,
                             execute_motion, fk, generate_initial_configs,
                             ik, jacobian)
from laserinsert.errors import (InvalidArgumentError, LimitViolationError,
                                UnreachableTargetError)
from laserinsert.geom import Pose, quat_distance
from laserinsert.scenario import ArmConfig

IC1 = np.array([0.2, -0.4, -0.15, -2.3, 0.1, 1.95, 0.9])


def planar() -> SerialChain:
    return SerialChain([[0, 0, 0, 0], [1, 0, 0, 0]],
                       [[-np.pi, np.pi], [-np.pi, np.pi]],
                       tool=Pose([1, 0, 0]))


@mark.parametrize("q,expected", [
    ([0, 0], [2, 0, 0]),
    ([np.pi / 2, 0], [0, 2, 0]),
    ([0, np.pi / 2], [1, 1, 0]),
])
def test_planar_fk(q, expected):
    assert np.allclose(fk(planar(), q).position, expected)


def test_single_link_file():
    model = SerialChain.from_file("data/test/single_link.mdh")
    assert model.dof == 1
    pose = fk(model, [np.pi / 2])
    assert np.allclose(pose.position, [0, 0, 0.5])
    assert np.allclose(pose.axis(0), [0, 1, 0])
    with raises(InvalidArgumentError):
        fk(model, [3.5])
    assert fk(model, [3.5], check_limits=False).position[2] == approx(0.5)


def test_arm_needs_seven_joints():
    with raises(InvalidArgumentError):
        ArmModel.from_file("data/test/single_link.mdh")
    with raises(InvalidArgumentError):
        ArmModel(planar().dh_parameters, planar().joint_limits)
    assert ArmModel.panda().dof == 7
    assert isinstance(ArmModel.panda(), SerialChain)


def test_model_validation(tmp_path):
    with raises(InvalidArgumentError):
        SerialChain([[0, 0, 0, 0]], [[1.0, -1.0]])
    with raises(InvalidArgumentError):
        SerialChain([[0, 0, 0]], [[-1.0, 1.0]])
    path = tmp_path / "short.mdh"
    path.write_text("0 0 0 0 -1\n")
    with raises(InvalidArgumentError):
        SerialChain.from_file(path)
    with raises(InvalidArgumentError):
        fk(planar(), [0, 0, 0])


def chain(model: SerialChain, q: np.ndarray) -> np.ndarray:
    transform = model.base_pose.matrix()
    for (a, d, alpha, offset), angle in zip(model.dh_parameters, q):
        rot_x, trans_x = np.eye(4), np.eye(4)
        rot_z, trans_z = np.eye(4), np.eye(4)
        rot_x[:3, :3] = Rotation.from_rotvec([alpha, 0, 0]).as_matrix()
        trans_x[0, 3] = a
        rot_z[:3, :3] = Rotation.from_rotvec(
            [0, 0, angle + offset]).as_matrix()
        trans_z[2, 3] = d
        transform = transform @ rot_x @ trans_x @ rot_z @ trans_z
    return transform @ model.tool.matrix()


def test_fk_matches_homogeneous_chain():
    model = ArmModel.panda()
    rng = np.random.default_rng(8)
    for _ in range(100):
        q = rng.uniform(model.lower, model.upper)
        assert np.allclose(fk(model, q).matrix(), chain(model, q),
                           rtol=0.0, atol=1e-10)


def test_jacobian_matches_finite_differences():
    model = ArmModel.panda()
    step = 1e-7
    analytic = jacobian(model, IC1)
    base = fk(model, IC1)
    for joint in range(model.dof):
        q = IC1.copy()
        q[joint] += step
        moved = fk(model, q)
        linear = (moved.position - base.position) / step
        angular = (moved.rotation * base.rotation.inv()).as_rotvec() / step
        assert np.allclose(analytic[:3, joint], linear, atol=1e-5)
        assert np.allclose(analytic[3:, joint], angular, atol=1e-5)


def test_ik_reaches_pose_near_bias():
    model = ArmModel.panda()
    target = fk(model, IC1)
    start = model.clip(IC1 + 0.1)
    q = ik(model, target, IC1, start)
    reached = fk(model, q)
    assert np.linalg.norm(reached.position - target.position) < 1e-6
    assert quat_distance(reached.orientation, target.orientation) < 1e-5
    assert np.allclose(q, IC1, atol=1e-3)


def test_ik_round_trip():
    model = ArmModel.panda()
    rng = np.random.default_rng(21)
    middle = 0.5 * (model.lower + model.upper)
    half = 0.4 * (model.upper - model.lower)
    for _ in range(100):
        q = rng.uniform(middle - half, middle + half)
        target = fk(model, q)
        start = model.clip(q + rng.normal(0.0, 0.05, 7))
        reached = fk(model, ik(model, target, q, start))
        assert np.linalg.norm(reached.position - target.position) < 1e-6
        assert quat_distance(reached.orientation, target.orientation) \
            < 1e-5


def test_ic1_and_ic2_solutions_follow_their_bias():
    arm = ArmConfig(IC1)
    model = arm.model
    target = fk(model, IC1)
    ic2 = arm.ic2_config
    assert abs(ic2[0] - IC1[0]) > 0.2
    first = ik(model, target, IC1, IC1)
    second = ik(model, target, ic2, IC1)
    assert not np.allclose(first, second, atol=1e-3)
    assert np.linalg.norm(first - IC1) < np.linalg.norm(first - ic2)
    assert np.linalg.norm(second - ic2) < np.linalg.norm(second - IC1)
    reached = fk(model, second)
    assert np.linalg.norm(reached.position - target.position) < 1e-6


def test_ik_bias_never_farther_than_free_solve():
    model = ArmModel.panda()
    target = fk(model, IC1)
    start = model.clip(IC1 + 0.1)
    free = ik(model, target, IC1, start, IkParams(nullspace_gain=0.0))
    biased = ik(model, target, IC1, start)
    assert np.linalg.norm(biased - IC1) \
        <= np.linalg.norm(free - IC1) + 1e-9


def test_ik_unreachable():
    model = ArmModel.panda()
    with raises(UnreachableTargetError):
        ik(model, Pose([5.0, 0.0, 0.0]), IC1, IC1,
           IkParams(max_iterations=100))


def test_ik_limit_violation():
    model = SerialChain.from_file("data/test/single_link.mdh")
    target = Pose.from_rotation([0, 0, 0.5],
                                Rotation.from_rotvec([0, 0, 3.1]))
    with raises(LimitViolationError):
        ik(model, target, [0.0], [0.0], IkParams(max_iterations=50))
    with raises(InvalidArgumentError):
        ik(model, target, [0.0], [3.2])


def test_ik_params_validation():
    with raises(InvalidArgumentError):
        IkParams(damping=-1.0)
    with raises(InvalidArgumentError):
        IkParams(position_tolerance=0.0)
    assert IkParams.from_dict({"max_iterations": 20}).max_iterations == 20


def test_zero_error_reports_truth():
    model = ArmModel.panda()
    reported, actual = execute_motion(model, ProprioceptionError.zero(7),
                                      IC1)
    assert np.allclose(reported.matrix(), actual.matrix())


def test_bias_is_seeded():
    cfg = ErrorModelConfig()
    first = ProprioceptionError.from_config(cfg, 7, 4)
    again = ProprioceptionError.from_config(cfg, 7, 4)
    other = ProprioceptionError.from_config(cfg, 7, 5)
    assert np.array_equal(first.joint_bias, again.joint_bias)
    assert not np.array_equal(first.joint_bias, other.joint_bias)
    assert np.array_equal(first.draw(IC1), again.draw(IC1))


def test_repeat_noise_redrawn_at_zero_travel():
    err = ProprioceptionError(np.zeros(7), 1e-3, 1)
    samples = np.array([err.draw(IC1) for _ in range(1000)])
    assert np.std(samples) == approx(1e-3, rel=0.1)
    assert not np.allclose(samples[0], samples[1])


def test_drift_kept_over_short_travel():
    err = ProprioceptionError(np.zeros(7), 0.0, 2, drift_std=1e-3,
                              drift_correlation_travel=0.05)
    previous = np.full(7, 1e-3)
    err.settle(IC1, previous)
    assert np.array_equal(err.draw(IC1), previous)
    near = err.draw(IC1 + 1e-4)
    assert np.allclose(near, previous, rtol=0.0, atol=1e-4)
    err.settle(IC1, previous)
    assert not np.allclose(err.draw(IC1 + 1.0), previous)


def test_drift_stationary_after_long_travel():
    err = ProprioceptionError(np.zeros(7), 0.0, 3, drift_std=1e-3,
                              drift_correlation_travel=0.05)
    samples = []
    for _ in range(1000):
        err.settle(IC1, np.zeros(7))
        samples.append(err.draw(IC1 + 1.0))
    assert np.std(samples) == approx(1e-3, rel=0.1)


def tip_spread(positions: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.var(positions, axis=0))))


def test_default_error_model_is_panda_like():
    model = ArmModel.panda()
    cfg = ErrorModelConfig()
    err = ProprioceptionError.from_config(cfg, 7, 12)
    err.settle(IC1)
    positions = np.array([execute_motion(model, err, IC1)[1].position
                          for _ in range(100)])
    assert 0.0 < tip_spread(positions) <= 1e-4

    reported = fk(model, IC1).position
    offsets = []
    for seed in range(50):
        err = ProprioceptionError.from_config(cfg, 7, seed)
        err.settle(IC1)
        actual = execute_motion(model, err, IC1)[1].position
        offsets.append(np.linalg.norm(actual - reported))
    assert 5e-4 <= np.median(offsets) <= 3e-3


def test_bias_shifts_mean_not_spread():
    model = ArmModel.panda()
    spreads, means = [], []
    for bias in (np.zeros(7), np.full(7, 1e-3)):
        err = ProprioceptionError(bias, 2e-5, 6)
        positions = np.array([execute_motion(model, err, IC1)[1].position
                              for _ in range(200)])
        spreads.append(tip_spread(positions))
        means.append(positions.mean(axis=0))
    assert spreads[1] == approx(spreads[0], rel=0.05)
    assert np.linalg.norm(means[1] - means[0]) > 1e-4


def test_error_config_validation():
    with raises(InvalidArgumentError):
        ErrorModelConfig(joint_bias_std=-1.0)
    zero = ErrorModelConfig.zero()
    assert ProprioceptionError.from_config(zero, 7, 0).draw(IC1) \
        == approx(np.zeros(7))


def test_simulated_arm_tracks_command():
    model = ArmModel.panda()
    error = ProprioceptionError.from_config(ErrorModelConfig(), 7, 9)
    arm = SimulatedArm(model, error, IC1)
    target = model.clip(IC1 + 0.05)
    reported, actual = arm.move(target)
    assert np.array_equal(arm.config, target)
    assert np.allclose(arm.reported_pose().matrix(), reported.matrix())
    assert arm.actual is actual
    assert np.linalg.norm(reported.position - actual.position) > 0


def test_initial_configs_at_distances():
    model = ArmModel.panda()
    distances = [0.03, 0.1, 0.2]
    configs = generate_initial_configs(model, IC1, 11, distances)
    x_ins = fk(model, IC1).position
    for q, distance in zip(configs, distances):
        assert model.within_limits(q)
        assert np.linalg.norm(fk(model, q).position - x_ins) \
            == approx(distance, rel=1e-6)
    with raises(InvalidArgumentError):
        generate_initial_configs(model, IC1, 11, [0.1, 0.05])

#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Thu Oct 15 2026

serial arm kinematics, joint-space proprioception error model and
null-space biased inverse kinematics
"""
from __future__ import annotations
from dataclasses import dataclass, field
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (InvalidArgumentError, LimitViolationError,
                     UnreachableTargetError)
from .geom import Pose

logger = getLogger(__file__)

PANDA_MDH = Path(__file__).parent / "data" / "panda.mdh"
# hand, fingers and held object behind the flange, rotated like the gripper
PANDA_TOOL = Pose([0.0, 0.0, 0.2254],
                  [np.cos(-np.pi / 8), 0.0, 0.0, np.sin(-np.pi / 8)])
PANDA_DOF = 7

JointConfig = np.ndarray


def _link_transform(a: float, d: float, alpha: float,
                    theta: float) -> np.ndarray:
    """RotX(alpha) TransX(a) RotZ(theta) TransZ(d).
    """
    ca, sa = np.cos(alpha), np.sin(alpha)
    ct, st = np.cos(theta), np.sin(theta)
    return np.array([
        [ct, -st, 0.0, a],
        [st * ca, ct * ca, -sa, -sa * d],
        [st * sa, ct * sa, ca, ca * d],
        [0.0, 0.0, 0.0, 1.0]
    ])


@dataclass(frozen=True, eq=False)
class SerialChain:
    """Serial revolute chain in modified DH convention, any number of joints.

    Args:
        dh_parameters (np.ndarray): one row (a, d, alpha, theta_offset) per
            joint, meters and radians
        joint_limits (np.ndarray): one row (min, max) per joint, radians
        base_pose (Pose): chain base in the world frame
        tool (Pose): tool point in the last joint frame
    """
    dh_parameters: np.ndarray
    joint_limits: np.ndarray
    base_pose: Pose = field(default_factory=Pose)
    tool: Pose = field(default_factory=Pose)

    def __post_init__(self):
        dh = np.array(self.dh_parameters, dtype=float)
        limits = np.array(self.joint_limits, dtype=float)
        if dh.ndim != 2 or dh.shape[1] != 4 or len(dh) == 0:
            raise InvalidArgumentError("DH table needs rows of 4 values.")
        if limits.shape != (len(dh), 2):
            raise InvalidArgumentError("Need one (min, max) pair per joint.")
        if np.any(limits[:, 0] >= limits[:, 1]):
            raise InvalidArgumentError("Joint limits must satisfy min < max.")
        dh.setflags(write=False)
        limits.setflags(write=False)
        object.__setattr__(self, "dh_parameters", dh)
        object.__setattr__(self, "joint_limits", limits)

    def __repr__(self) -> str:
        return "%s(dof=%d, base=%s)" % (type(self).__name__, self.dof,
                                        self.base_pose)

    @property
    def dof(self) -> int:
        return len(self.dh_parameters)

    @property
    def lower(self) -> np.ndarray:
        return self.joint_limits[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.joint_limits[:, 1]

    @classmethod
    def from_file(cls, path: Union[str, Path],
                  base_pose: Optional[Pose] = None,
                  tool: Optional[Pose] = None):
        """Read a DH table, one joint per row:
        a, d, alpha, theta_offset, min, max.
        """
        table = np.loadtxt(path, comments="#", ndmin=2)
        if table.shape[1] != 6:
            raise InvalidArgumentError(
                f"{path}: expected 6 columns per joint, got {table.shape[1]}."
            )
        model = cls(table[:, :4], table[:, 4:],
                    base_pose or Pose.identity(), tool or Pose.identity())
        logger.debug("Loaded %s from %s.", repr(model), path)
        return model

    def within_limits(self, q: JointConfig) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.lower) and np.all(q <= self.upper))

    def check_config(self, q: JointConfig) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,) or not np.all(np.isfinite(q)):
            raise InvalidArgumentError(
                f"Expected {self.dof} finite joint angles."
            )
        return q

    def clip(self, q: JointConfig) -> np.ndarray:
        return np.clip(q, self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class ArmModel(SerialChain):
    """7-DoF arm of the bench. Shorter chains are SerialChain instances.
    """

    def __post_init__(self):
        super().__post_init__()
        if self.dof != PANDA_DOF:
            raise InvalidArgumentError(
                f"An arm has {PANDA_DOF} joints, got {self.dof}."
            )

    @classmethod
    def panda(cls, base_pose: Optional[Pose] = None,
              tool: Optional[Pose] = None) -> ArmModel:
        return cls.from_file(PANDA_MDH, base_pose,
                             PANDA_TOOL if tool is None else tool)


def joint_frames(model: SerialChain, q: JointConfig) -> List[np.ndarray]:
    """World frame of every joint followed by the tool frame.
    """
    transform = model.base_pose.matrix()
    frames = []
    for (a, d, alpha, offset), angle in zip(model.dh_parameters, q):
        transform = transform @ _link_transform(a, d, alpha, angle + offset)
        frames.append(transform)
    frames.append(transform @ model.tool.matrix())
    return frames


def fk(model: SerialChain, q: JointConfig,
       check_limits: bool = True) -> Pose:
    """Tool pose of a joint configuration.

    Raises:
        InvalidArgumentError: wrong length, or joints outside the limits
            while check_limits is set
    """
    q = model.check_config(q)
    if check_limits and not model.within_limits(q):
        raise InvalidArgumentError("Joint configuration outside the limits.")
    return Pose.from_matrix(joint_frames(model, q)[-1])


def jacobian(model: SerialChain, q: JointConfig) -> np.ndarray:
    """Geometric 6 x n Jacobian of the tool point, linear rows first, in the
    world frame.
    """
    q = model.check_config(q)
    frames = joint_frames(model, q)
    tip = frames[-1][:3, 3]
    result = np.empty((6, model.dof))
    for i, frame in enumerate(frames[:-1]):
        axis = frame[:3, 2]
        result[:3, i] = np.cross(axis, tip - frame[:3, 3])
        result[3:, i] = axis
    return result


def pose_error(target: Pose, current: Pose) -> np.ndarray:
    """6-D error (position, rotation vector) taking current onto target.
    """
    rotation = (target.rotation * current.rotation.inv()).as_rotvec()
    return np.concatenate([target.position - current.position, rotation])


@dataclass
class IkParams:
    """Damped least squares settings.
    """
    damping: float = 1e-3
    nullspace_gain: float = 0.1
    max_iterations: int = 500
    position_tolerance: float = 1e-6
    orientation_tolerance: float = 1e-5
    step_tolerance: float = 1e-6
    max_position_step: float = 0.05
    max_rotation_step: float = 0.5

    def __post_init__(self):
        if self.damping < 0 or self.nullspace_gain < 0:
            raise InvalidArgumentError("Negative damping or gain.")
        if self.max_iterations < 1:
            raise InvalidArgumentError("IK needs at least one iteration.")
        if min(self.position_tolerance, self.orientation_tolerance,
               self.step_tolerance, self.max_position_step,
               self.max_rotation_step) <= 0:
            raise InvalidArgumentError("IK tolerances must be positive.")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> IkParams:
        return cls(**data)


def ik(model: SerialChain, target: Pose, bias_config: JointConfig,
       start: JointConfig, params: Optional[IkParams] = None) -> np.ndarray:
    """Joint configuration reaching target, pulled toward bias_config in the
    null space of the task.

    Iterates dq = J+ e + (I - J+ J) k (q_bias - q) with the damped
    pseudo-inverse J+ = J^T (J J^T + lambda^2 I)^-1, clipping the error per
    step and the joints to their limits. Converged when the pose error is
    within tolerance and the applied step is negligible, so the result also
    sits at the configuration closest to the bias that the chain reaches
    from start.

    Raises:
        InvalidArgumentError: start outside the limits
        LimitViolationError: no convergence with a joint held at a limit
        UnreachableTargetError: no convergence otherwise
    """
    params = params or IkParams()
    q = model.check_config(start).copy()
    bias = model.check_config(bias_config)
    if not model.within_limits(q):
        raise InvalidArgumentError("IK start outside the joint limits.")
    identity = np.eye(model.dof)
    damping = params.damping ** 2 * np.eye(6)
    for iteration in range(params.max_iterations):
        frames = joint_frames(model, q)
        current = Pose.from_matrix(frames[-1])
        error = pose_error(target, current)
        position_error = np.linalg.norm(error[:3])
        rotation_error = np.linalg.norm(error[3:])
        if position_error > params.max_position_step:
            error[:3] *= params.max_position_step / position_error
        if rotation_error > params.max_rotation_step:
            error[3:] *= params.max_rotation_step / rotation_error
        matrix = jacobian(model, q)
        at_lower = q <= model.lower
        at_upper = q >= model.upper
        locked = np.zeros(model.dof, dtype=bool)
        # joints pushed against their limits drop out of the solve
        for _ in range(model.dof):
            active = np.where(locked, 0.0, 1.0)
            reduced = matrix * active
            pseudo_inverse = reduced.T @ np.linalg.solve(
                reduced @ reduced.T + damping, np.eye(6)
            )
            null = (identity - pseudo_inverse @ reduced) \
                @ (params.nullspace_gain * (bias - q)) * active
            step = pseudo_inverse @ error + null
            pushing = ~locked & ((at_lower & (step < 0))
                                 | (at_upper & (step > 0)))
            if not pushing.any():
                break
            locked |= pushing
        updated = model.clip(q + step)
        if position_error < params.position_tolerance \
                and rotation_error < params.orientation_tolerance \
                and np.linalg.norm(updated - q) < params.step_tolerance:
            logger.debug("IK converged after %i iterations.", iteration)
            return q
        q = updated
    at_limit = np.isclose(q, model.lower, atol=1e-9) \
        | np.isclose(q, model.upper, atol=1e-9)
    message = "IK did not converge in %i iterations (error %.3e m, %.3e rad)" \
        % (params.max_iterations, position_error, rotation_error)
    if at_limit.any():
        raise LimitViolationError(
            message + ", joints %s at their limits." % np.flatnonzero(at_limit)
        )
    raise UnreachableTargetError(message + ".")


@dataclass
class ErrorModelConfig:
    """Parameters of the proprioception error, radians.

    Args:
        joint_bias_std (float): std of the fixed per-joint offsets
        repeat_noise_std (float): std of the noise drawn afresh for every
            motion, also between repeats of one configuration
        drift_std (float): stationary std of the slowly varying joint drift
        drift_correlation_travel (float): joint travel over which the drift
            decorrelates, 0 for a fresh drift on every motion
    """
    joint_bias_std: float = 8e-4
    repeat_noise_std: float = 1e-5
    drift_std: float = 1.2e-4
    drift_correlation_travel: float = 0.5

    def __post_init__(self):
        if min(self.joint_bias_std, self.repeat_noise_std,
               self.drift_std, self.drift_correlation_travel) < 0:
            raise InvalidArgumentError(
                "Error model parameters must not be negative."
            )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> ErrorModelConfig:
        return cls(**data)

    @classmethod
    def zero(cls) -> ErrorModelConfig:
        return cls(0.0, 0.0, 0.0, 0.0)


class ProprioceptionError:
    """Joint-space error of one arm instance: fixed biases (accuracy), noise
    redrawn per commanded motion (repeatability) and a joint drift.

    The drift follows the commanded joint travel: after a motion of travel
    s it keeps the share rho = exp(-s / L) of its previous value and is
    topped up to its stationary std, L = drift_correlation_travel. Small
    corrective motions thus keep the drift, distant ones redraw it. The
    repeatability noise is independent of travel. Confined to one trial at
    a time.

    Args:
        joint_bias (Sequence[float]): fixed offsets, radians
        repeat_noise_std (float): per-motion noise std, radians
        seed (int): seed of the noise stream
        drift_std (float): stationary drift std, radians
        drift_correlation_travel (float): decorrelation travel, radians
    """

    def __init__(self, joint_bias: Sequence[float], repeat_noise_std: float,
                 seed: int, drift_std: float = 0.0,
                 drift_correlation_travel: float = 0.0) -> None:
        self.joint_bias = np.array(joint_bias, dtype=float)
        self.joint_bias.setflags(write=False)
        self.repeat_noise_std = repeat_noise_std
        self.drift_std = drift_std
        self.drift_correlation_travel = drift_correlation_travel
        self.seed = seed
        self.rng = np.random.default_rng([seed, 1])
        self.last_commanded: Optional[np.ndarray] = None
        self.drift: Optional[np.ndarray] = None
        logger.debug("Created %s.", repr(self))

    def __repr__(self) -> str:
        return "ProprioceptionError(bias=%s, repeat_noise_std=%g, " \
            "drift_std=%g)" % (np.array2string(self.joint_bias, precision=6),
                               self.repeat_noise_std, self.drift_std)

    @classmethod
    def from_config(cls, cfg: ErrorModelConfig, dof: int,
                    seed: int) -> ProprioceptionError:
        bias = np.random.default_rng([seed, 0]).normal(
            0.0, cfg.joint_bias_std, dof
        ) if cfg.joint_bias_std > 0 else np.zeros(dof)
        return cls(bias, cfg.repeat_noise_std, seed, cfg.drift_std,
                   cfg.drift_correlation_travel)

    @classmethod
    def zero(cls, dof: int) -> ProprioceptionError:
        return cls(np.zeros(dof), 0.0, 0)

    def _stationary_drift(self) -> np.ndarray:
        return self.rng.normal(0.0, 1.0, len(self.joint_bias)) \
            * self.drift_std

    def settle(self, commanded: JointConfig,
               drift: Optional[np.ndarray] = None) -> None:
        """Declare the arm at rest at commanded, e.g. at home. The drift is
        drawn from its stationary distribution unless given.
        """
        self.last_commanded = np.array(commanded, dtype=float)
        self.drift = self._stationary_drift() if drift is None \
            else np.array(drift, dtype=float)

    def draw(self, commanded: JointConfig) -> np.ndarray:
        """Joint error of the next motion, ending at commanded, on top of
        the bias.
        """
        commanded = np.asarray(commanded, dtype=float)
        fresh = self._stationary_drift()
        if self.drift is None:
            self.drift = fresh
        else:
            travel = float(np.linalg.norm(commanded - self.last_commanded))
            correlation = np.exp(-travel / self.drift_correlation_travel) \
                if self.drift_correlation_travel > 0 else 0.0
            self.drift = correlation * self.drift \
                + np.sqrt(1.0 - correlation ** 2) * fresh
        self.last_commanded = commanded.copy()
        noise = self.rng.normal(0.0, self.repeat_noise_std,
                                len(self.joint_bias))
        return self.drift + noise

    def actual_config(self, commanded: JointConfig) -> np.ndarray:
        return np.asarray(commanded, dtype=float) + self.joint_bias \
            + self.draw(commanded)


def execute_motion(model: SerialChain, err: ProprioceptionError,
                   commanded: JointConfig) -> Tuple[Pose, Pose]:
    """Move to commanded.

    Returns:
        Tuple[Pose, Pose]: reported tool pose (what the arm believes) and
            actual tool pose (ground truth)
    """
    reported = fk(model, commanded)
    actual = fk(model, err.actual_config(commanded), check_limits=False)
    return reported, actual


class SimulatedArm:
    """Arm instance of one trial: kinematics, its error model and the last
    commanded configuration.
    """

    def __init__(self, model: SerialChain, error: ProprioceptionError,
                 config: JointConfig) -> None:
        self.model = model
        self.error = error
        self.config = model.check_config(config).copy()
        self.actual: Optional[Pose] = None

    def move(self, commanded: JointConfig) -> Tuple[Pose, Pose]:
        reported, actual = execute_motion(self.model, self.error, commanded)
        self.config = np.array(commanded, dtype=float)
        self.actual = actual
        return reported, actual

    def reported_pose(self) -> Pose:
        return fk(self.model, self.config)


def generate_initial_configs(model: SerialChain,
                             insertion_config: JointConfig,
                             seed: int, distances: Optional[Sequence[float]]
                             = None) -> List[np.ndarray]:
    """Configurations whose tool points lie at strictly increasing distance
    from the tool point of insertion_config.

    Each configuration moves away from insertion_config along a random
    joint-space direction, scaled by bisection to hit its distance.

    Args:
        model (SerialChain): arm
        insertion_config (JointConfig): configuration at the insertion pose
        seed (int): seed of the directions
        distances (Optional[Sequence[float]]): tool point distances, meters,
            default ten from 3 cm to 30 cm
    """
    distances = np.linspace(0.03, 0.3, 10) if distances is None \
        else np.asarray(distances, dtype=float)
    if np.any(np.diff(distances) <= 0) or np.any(distances <= 0):
        raise InvalidArgumentError("Distances must be positive, increasing.")
    origin = model.check_config(insertion_config)
    x_ins = fk(model, origin).position
    rng = np.random.default_rng(seed)

    def reach(direction: np.ndarray, scale: float) -> float:
        q = model.clip(origin + scale * direction)
        return float(np.linalg.norm(fk(model, q).position - x_ins))

    configs = []
    for distance in distances:
        for attempt in range(100):
            direction = rng.normal(size=model.dof)
            direction /= np.linalg.norm(direction)
            low, high = 0.0, 0.05
            while reach(direction, high) < distance and high < 4.0:
                low, high = high, 2.0 * high
            if reach(direction, high) < distance:
                continue
            for _ in range(60):
                middle = 0.5 * (low + high)
                if reach(direction, middle) < distance:
                    low = middle
                else:
                    high = middle
            configs.append(model.clip(origin + high * direction))
            break
        else:
            raise InvalidArgumentError(
                f"No configuration found at {distance} m."
            )
    logger.debug("Generated %i initial configurations.", len(configs))
    return configs

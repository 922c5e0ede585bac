#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Thu Oct 15 2026

relative corrective trajectories, their execution and the geometric
success check
"""
from __future__ import annotations
from csv import writer as csv_writer
from dataclasses import dataclass
from logging import getLogger
from typing import List, Optional, Sequence, TextIO, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.transform import Rotation, Slerp

from .arm import IkParams, SimulatedArm, ik
from .errors import (DegenerateApproachError, InvalidArgumentError,
                     UnreachableTargetError)
from .geom import Pose, rotation_to_quat

logger = getLogger(__file__)

MAX_APPROACH_ANGLE = np.deg2rad(30.0)


def pose_offset(start: Pose, end: Pose) -> Pose:
    """World-frame offset taking start to end: position difference and
    rotation end * start^-1.
    """
    return Pose(end.position - start.position,
                rotation_to_quat(end.rotation * start.rotation.inv()))


def apply_offset(pose: Pose, offset: Pose) -> Pose:
    return Pose(pose.position + offset.position,
                rotation_to_quat(offset.rotation * pose.rotation))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Timed pose sequence, at least two waypoints.
    """
    waypoints: Tuple[Pose, ...]
    timestamps: np.ndarray

    def __post_init__(self):
        waypoints = tuple(self.waypoints)
        timestamps = np.array(self.timestamps, dtype=float)
        if len(waypoints) < 2:
            raise InvalidArgumentError("A trajectory needs 2 waypoints.")
        if timestamps.shape != (len(waypoints),) \
                or np.any(np.diff(timestamps) <= 0):
            raise InvalidArgumentError(
                "Need one strictly increasing timestamp per waypoint."
            )
        timestamps.setflags(write=False)
        object.__setattr__(self, "waypoints", waypoints)
        object.__setattr__(self, "timestamps", timestamps)

    def __len__(self) -> int:
        return len(self.waypoints)

    def positions(self) -> np.ndarray:
        return np.array([waypoint.position for waypoint in self.waypoints])

    def offsets(self) -> List[Pose]:
        """Offset of every waypoint from the first one.
        """
        return [pose_offset(self.waypoints[0], waypoint)
                for waypoint in self.waypoints]

    def increments(self) -> List[Pose]:
        """Offsets between consecutive waypoints.
        """
        return [pose_offset(a, b)
                for a, b in zip(self.waypoints[:-1], self.waypoints[1:])]

    def to_csv(self, file_handler: TextIO) -> None:
        writer = csv_writer(file_handler)
        writer.writerow(["t", "x", "y", "z", "qw", "qx", "qy", "qz"])
        for time, waypoint in zip(self.timestamps, self.waypoints):
            writer.writerow([repr(float(value)) for value in np.concatenate(
                [[time], waypoint.position, waypoint.orientation]
            )])


def plan_relative_trajectory(p_obj: Pose, p_target: Pose, T: int = 50,
                             duration: float = 2.0) -> Trajectory:
    """Corrective trajectory from p_obj to p_target.

    Positions follow a clamped cubic spline (zero end velocities) and
    orientations a slerp on the same eased time scale. The first and last
    waypoints are p_obj and p_target themselves. Executors use
    Trajectory.offsets() so the correction applies relative to the current
    state.
    """
    if T < 2:
        raise InvalidArgumentError("T must be at least 2.")
    if not duration > 0:
        raise InvalidArgumentError("Duration must be positive.")
    times = np.linspace(0.0, duration, T)
    spline = CubicSpline([0.0, duration],
                         np.stack([p_obj.position, p_target.position]),
                         bc_type="clamped")
    positions = spline(times)
    # same ease-in/out for the orientation
    phase = times / duration
    progress = np.clip(3 * phase ** 2 - 2 * phase ** 3, 0.0, 1.0)
    slerp = Slerp([0.0, 1.0], Rotation.concatenate([p_obj.rotation,
                                                    p_target.rotation]))
    rotations = slerp(progress)
    waypoints = [Pose(position, rotation_to_quat(rotation))
                 for position, rotation in zip(positions, rotations)]
    waypoints[0] = p_obj
    waypoints[-1] = p_target
    logger.debug("Planned %i waypoints over %g s, correction %.3e m.",
                 T, duration,
                 np.linalg.norm(p_target.position - p_obj.position))
    return Trajectory(tuple(waypoints), times)


def execute_insertion(arm: SimulatedArm, traj: Trajectory,
                      ic_bias: Sequence[float],
                      ik_params: Optional[IkParams] = None
                      ) -> Tuple[Pose, List[np.ndarray]]:
    """Track the trajectory offsets from the arm's current reported pose.

    Every waypoint is solved by ik from the current configuration, biased
    toward ic_bias, and executed as one motion.

    Raises:
        UnreachableTargetError: carrying the failing waypoint index

    Returns:
        Tuple[Pose, List[np.ndarray]]: actual final tool pose and the
            commanded configuration of every executed waypoint
    """
    start = arm.reported_pose()
    path: List[np.ndarray] = []
    final = arm.actual
    for index, offset in enumerate(traj.offsets()):
        if index == 0:
            continue
        target = apply_offset(start, offset)
        try:
            q = ik(arm.model, target, ic_bias, arm.config, ik_params)
        except UnreachableTargetError as e:
            raise type(e)(f"Waypoint {index}: {e}", waypoint=index) from e
        _, final = arm.move(q)
        path.append(q)
    if final is None:
        final = arm.actual
    logger.debug("Executed %i waypoints.", len(path))
    return final, path


def _unit(vector, name: str) -> np.ndarray:
    vector = np.array(vector, dtype=float)
    if vector.shape != (3,) or not np.all(np.isfinite(vector)) \
            or abs(np.linalg.norm(vector) - 1.0) > 1e-6:
        raise InvalidArgumentError(f"{name} must be a unit 3-vector.")
    return vector


@dataclass(frozen=True, eq=False)
class InsertionTarget:
    """Elliptical hole: centre on the entry plane, axis pointing into the
    part, semi-axes along hole_u_axis and axis x hole_u_axis. The u axis
    belongs to the part, so the hole moves rigidly with it.
    """
    hole_center: np.ndarray
    hole_axis: np.ndarray
    hole_semi_axes: Tuple[float, float]
    hole_u_axis: np.ndarray
    part_clearance_depth: float = 0.0

    def __post_init__(self):
        center = np.array(self.hole_center, dtype=float)
        if center.shape != (3,) or not np.all(np.isfinite(center)):
            raise InvalidArgumentError("Hole centre must be 3 finite values.")
        axis = _unit(self.hole_axis, "Hole axis")
        if len(self.hole_semi_axes) != 2 or min(self.hole_semi_axes) <= 0:
            raise InvalidArgumentError("Hole semi-axes must be positive.")
        if self.part_clearance_depth < 0:
            raise InvalidArgumentError("Clearance depth must not be negative.")
        u_axis = _unit(self.hole_u_axis, "Hole u axis")
        if abs(u_axis @ axis) > 1e-6:
            raise InvalidArgumentError(
                "Hole u axis must be perpendicular to the hole axis."
            )
        object.__setattr__(self, "hole_center", center)
        object.__setattr__(self, "hole_axis", axis)
        object.__setattr__(self, "hole_semi_axes",
                           tuple(float(a) for a in self.hole_semi_axes))
        object.__setattr__(self, "hole_u_axis", u_axis)

    @classmethod
    def from_pose(cls, hole_pose: Pose, semi_axes: Tuple[float, float],
                  depth: float) -> InsertionTarget:
        """Hole whose frame has the axis as z and the first semi-axis as x.
        """
        return cls(hole_pose.position, hole_pose.axis(2), semi_axes,
                   hole_pose.axis(0), depth)


@dataclass(frozen=True, eq=False)
class InsertedObject:
    """Tip of the inserted object.
    """
    tip_position: np.ndarray
    tip_direction: np.ndarray
    tip_radius: float = 0.0

    def __post_init__(self):
        position = np.array(self.tip_position, dtype=float)
        if position.shape != (3,) or not np.all(np.isfinite(position)):
            raise InvalidArgumentError("Tip position must be 3 finite values.")
        object.__setattr__(self, "tip_position", position)
        object.__setattr__(self, "tip_direction",
                           _unit(self.tip_direction, "Tip direction"))
        if self.tip_radius < 0:
            raise InvalidArgumentError("Tip radius must not be negative.")

    @classmethod
    def from_tool_pose(cls, pose: Pose, tip_radius: float) -> InsertedObject:
        return cls(pose.position, pose.axis(2), tip_radius)


@dataclass(frozen=True)
class InsertionCheck:
    success: bool
    margin: float
    entry_margin: float
    depth_margin: float
    approach_angle: float
    miss_distance: float


def _radial_margin(obj: InsertedObject, target: InsertionTarget,
                   depth: float, denominator: float
                   ) -> Tuple[float, float]:
    plane_point = target.hole_center + depth * target.hole_axis
    t = (plane_point - obj.tip_position) @ target.hole_axis / denominator
    offset = obj.tip_position + t * obj.tip_direction - plane_point
    u = offset @ target.hole_u_axis
    v = offset @ np.cross(target.hole_axis, target.hole_u_axis)
    a = target.hole_semi_axes[0] - obj.tip_radius
    b = target.hole_semi_axes[1] - obj.tip_radius
    radius = np.hypot(u, v)
    if a <= 0 or b <= 0:
        return min(a, b) - radius, radius
    if radius == 0:
        return min(a, b), radius
    scaled = np.hypot(u / a, v / b)
    # distance from the intersection to the shrunk ellipse along its ray
    return radius / scaled - radius, radius


def check_insertion(obj: InsertedObject,
                    target: InsertionTarget) -> InsertionCheck:
    """Project the tip ray through the hole.

    Success needs the ray strictly inside the hole ellipse shrunk by the tip
    radius, at the entry plane and at part_clearance_depth, and a tip
    direction within 30 degrees of the hole axis. The margin is the smaller
    signed distance to the shrunk ellipse along the radial line from the
    hole centre (the smaller shrunk semi-axis on the axis itself). The
    miss distance is the radial offset of the ray at the entry plane.

    Raises:
        DegenerateApproachError: tip ray parallel to the hole plane
    """
    denominator = float(obj.tip_direction @ target.hole_axis)
    if abs(denominator) < 1e-12:
        raise DegenerateApproachError("Tip ray parallel to the hole plane.")
    entry, miss = _radial_margin(obj, target, 0.0, denominator)
    deep, _ = _radial_margin(obj, target, target.part_clearance_depth,
                             denominator)
    angle = float(np.arccos(np.clip(denominator, -1.0, 1.0)))
    margin = min(entry, deep)
    return InsertionCheck(bool(margin > 0 and angle < MAX_APPROACH_ANGLE),
                          float(margin), float(entry), float(deep), angle,
                          float(miss))

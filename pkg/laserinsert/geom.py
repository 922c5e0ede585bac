#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Mon Oct 12 2026

rigid-body geometry: poses, quaternion metrics, point clouds and
nearest-neighbour queries

Quaternions are stored scalar first, (w, x, y, z), everywhere in this package
and in every file it reads or writes.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from logging import getLogger
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from .errors import InvalidArgumentError

logger = getLogger(__file__)

UNIT_TOLERANCE = 1e-6


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def quat_to_rotation(quaternion: Sequence[float]) -> Rotation:
    """Convert a (w, x, y, z) quaternion to a scipy Rotation.
    """
    w, x, y, z = quaternion
    return Rotation.from_quat([x, y, z, w])


def rotation_to_quat(rotation: Rotation) -> np.ndarray:
    """Convert a scipy Rotation to a (w, x, y, z) quaternion.
    """
    x, y, z, w = rotation.as_quat()
    return np.array([w, x, y, z])


def _check_unit(quaternion: np.ndarray, name: str) -> np.ndarray:
    quaternion = np.asarray(quaternion, dtype=float)
    if quaternion.shape != (4,) or not np.all(np.isfinite(quaternion)):
        raise InvalidArgumentError(f"{name} must be 4 finite values.")
    if abs(np.linalg.norm(quaternion) - 1.0) > UNIT_TOLERANCE:
        raise InvalidArgumentError(f"{name} is not a unit quaternion.")
    return quaternion


def quat_distance(q1: Sequence[float], q2: Sequence[float]) -> float:
    """Geodesic angle between two orientations.

    Args:
        q1 (Sequence[float]): unit quaternion (w, x, y, z)
        q2 (Sequence[float]): unit quaternion (w, x, y, z)

    Raises:
        InvalidArgumentError: an input deviates from unit norm by more
            than 1e-6

    Returns:
        float: rotation angle in [0, pi], invariant to the sign of either
            quaternion
    """
    q1 = _check_unit(q1, "q1")
    q2 = _check_unit(q2, "q2")
    dot = min(1.0, abs(float(np.dot(q1, q2))))
    return 2.0 * float(np.arccos(dot))


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform, position in meters and orientation as unit
    quaternion (w, x, y, z).

    The quaternion is normalised on construction; both arrays are read-only.
    """
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0])
    )

    def __post_init__(self):
        position = np.array(self.position, dtype=float)
        orientation = np.array(self.orientation, dtype=float)
        if position.shape != (3,) or not np.all(np.isfinite(position)):
            raise InvalidArgumentError("Position must be 3 finite values.")
        if orientation.shape != (4,) or not np.all(np.isfinite(orientation)):
            raise InvalidArgumentError(
                "Pose orientation must be 4 finite values."
            )
        norm = np.linalg.norm(orientation)
        if norm < 1e-12:
            raise InvalidArgumentError("Pose orientation has zero norm.")
        object.__setattr__(self, "position", _frozen(position))
        object.__setattr__(self, "orientation", _frozen(orientation / norm))

    def __repr__(self) -> str:
        return "Pose(position=%s, orientation=%s)" % (
            np.array2string(self.position, precision=9),
            np.array2string(self.orientation, precision=9)
        )

    @classmethod
    def identity(cls) -> Pose:
        return cls()

    @classmethod
    def from_rotation(cls, position: Sequence[float],
                      rotation: Rotation) -> Pose:
        return cls(np.asarray(position, dtype=float),
                   rotation_to_quat(rotation))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> Pose:
        """Pose of a 4x4 homogeneous matrix.
        """
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (4, 4):
            raise InvalidArgumentError("Homogeneous matrix must be 4x4.")
        return cls.from_rotation(matrix[:3, 3],
                                 Rotation.from_matrix(matrix[:3, :3]))

    @classmethod
    def from_dict(cls, data: dict) -> Pose:
        return cls(data.get("position", [0.0, 0.0, 0.0]),
                   data.get("orientation", [1.0, 0.0, 0.0, 0.0]))

    @property
    def rotation(self) -> Rotation:
        return quat_to_rotation(self.orientation)

    @property
    def rotation_matrix(self) -> np.ndarray:
        return self.rotation.as_matrix()

    def axis(self, index: int) -> np.ndarray:
        """Unit vector of the local x (0), y (1) or z (2) axis.
        """
        return self.rotation_matrix[:, index]

    def matrix(self) -> np.ndarray:
        matrix = np.eye(4)
        matrix[:3, :3] = self.rotation_matrix
        matrix[:3, 3] = self.position
        return matrix

    def inverse(self) -> Pose:
        inverse_rotation = self.rotation.inv()
        return Pose.from_rotation(-inverse_rotation.apply(self.position),
                                  inverse_rotation)

    def compose(self, other: Pose) -> Pose:
        return pose_compose(self, other)

    def __matmul__(self, other: Pose) -> Pose:
        return pose_compose(self, other)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map points (N x 3 or 3) from the local into the parent frame.
        """
        points = np.asarray(points, dtype=float)
        return points @ self.rotation_matrix.T + self.position

    def to_dict(self) -> dict:
        return {
            "position": self.position.tolist(),
            "orientation": self.orientation.tolist()
        }


def pose_compose(a: Pose, b: Pose) -> Pose:
    """Pose of the homogeneous product T(a) T(b).
    """
    rotation_a = a.rotation
    return Pose.from_rotation(rotation_a.apply(b.position) + a.position,
                              rotation_a * b.rotation)


def kabsch(source: np.ndarray, target: np.ndarray) -> Pose:
    """Least-squares rigid transform mapping source points onto target
    points (SVD with reflection correction).

    Args:
        source (np.ndarray): N x 3 points
        target (np.ndarray): N x 3 corresponding points

    Returns:
        Pose: transform T with T(source) ~ target
    """
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    if source.shape != target.shape or source.ndim != 2 or len(source) < 3:
        raise InvalidArgumentError(
            "Rigid fit needs two equally shaped sets of at least 3 points."
        )
    source_centroid = source.mean(axis=0)
    target_centroid = target.mean(axis=0)
    covariance = (source - source_centroid).T @ (target - target_centroid)
    u, _, vt = np.linalg.svd(covariance)
    correction = np.eye(3)
    correction[2, 2] = np.sign(np.linalg.det(vt.T @ u.T)) or 1.0
    rotation = vt.T @ correction @ u.T
    translation = target_centroid - rotation @ source_centroid
    return Pose.from_rotation(translation, Rotation.from_matrix(rotation))


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered 3-D points in meters, optional unit normals of the same
    length and optional viewpoint (sensor position the points were seen
    from, used to orient estimated normals).
    """
    points: np.ndarray
    normals: Optional[np.ndarray] = None
    viewpoint: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(points)):
            raise InvalidArgumentError("Point cloud holds non-finite points.")
        object.__setattr__(self, "points", _frozen(points))
        if self.normals is not None:
            normals = np.array(self.normals, dtype=float).reshape(-1, 3)
            if len(normals) != len(points):
                raise InvalidArgumentError(
                    "Normals count differs from points count."
                )
            if not np.all(np.isfinite(normals)) or np.any(
                np.abs(np.linalg.norm(normals, axis=1) - 1.0) > UNIT_TOLERANCE
            ):
                raise InvalidArgumentError("Normals must be unit vectors.")
            object.__setattr__(self, "normals", _frozen(normals))
        if self.viewpoint is not None:
            viewpoint = np.array(self.viewpoint, dtype=float)
            if viewpoint.shape != (3,) or not np.all(np.isfinite(viewpoint)):
                raise InvalidArgumentError("Viewpoint needs 3 finite values.")
            object.__setattr__(self, "viewpoint", _frozen(viewpoint))

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return "PointCloud(points=%d, normals=%s)" % (
            len(self), self.normals is not None
        )

    @classmethod
    def empty(cls) -> PointCloud:
        return cls(np.zeros((0, 3)))

    @property
    def has_normals(self) -> bool:
        return self.normals is not None

    def select(self, indices: np.ndarray) -> PointCloud:
        """Sub-cloud by index array or boolean mask, order preserved.
        """
        return PointCloud(
            self.points[indices],
            None if self.normals is None else self.normals[indices],
            self.viewpoint
        )

    def with_normals(self, normals: np.ndarray) -> PointCloud:
        return PointCloud(self.points, normals, self.viewpoint)

    def crop(self, lower: Sequence[float],
             upper: Sequence[float]) -> PointCloud:
        """Keep the points inside the closed axis-aligned box [lower, upper].
        """
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if np.any(lower > upper):
            raise InvalidArgumentError("Crop box lower corner above upper.")
        inside = np.all((self.points >= lower) & (self.points <= upper),
                        axis=1)
        logger.debug("Crop kept %i of %i points.", inside.sum(), len(self))
        return self.select(inside)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        if len(self) == 0:
            raise InvalidArgumentError("Empty cloud has no bounds.")
        return self.points.min(axis=0), self.points.max(axis=0)

    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def transformed(self, pose: Pose) -> PointCloud:
        return transform_cloud(self, pose)

    @staticmethod
    def concatenate(clouds: Sequence[PointCloud]) -> PointCloud:
        clouds = [cloud for cloud in clouds if len(cloud) > 0]
        if not clouds:
            return PointCloud.empty()
        normals = None
        if all(cloud.has_normals for cloud in clouds):
            normals = np.concatenate([cloud.normals for cloud in clouds])
        return PointCloud(np.concatenate([cloud.points for cloud in clouds]),
                          normals, clouds[0].viewpoint)


def transform_cloud(cloud: PointCloud, pose: Pose) -> PointCloud:
    """Apply a rigid transform to points, normals and viewpoint.
    """
    rotation = pose.rotation_matrix
    return PointCloud(
        cloud.points @ rotation.T + pose.position,
        None if cloud.normals is None else cloud.normals @ rotation.T,
        None if cloud.viewpoint is None else rotation @ cloud.viewpoint
        + pose.position
    )


class SpatialIndex:
    """Immutable kd-tree over the points of a cloud.

    Nearest-neighbour ties resolve to the lowest point index.

    Args:
        points (np.ndarray): N x 3 points (or a PointCloud)
    """
    # number of candidates inspected for exact-distance ties
    tie_candidates = 4

    def __init__(self, points) -> None:
        if isinstance(points, PointCloud):
            points = points.points
        self.points = _frozen(np.array(points, dtype=float).reshape(-1, 3))
        if len(self.points) == 0:
            raise InvalidArgumentError("Cannot index an empty cloud.")
        self.tree = cKDTree(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def query(self, queries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest point for each query row.

        Returns:
            Tuple[np.ndarray, np.ndarray]: distances and indices
        """
        queries = np.asarray(queries, dtype=float).reshape(-1, 3)
        k = min(self.tie_candidates, len(self))
        distances, indices = self.tree.query(queries, k=k)
        if k == 1:
            return distances, indices
        tied = distances == distances[:, :1]
        best = np.where(tied, indices, np.iinfo(indices.dtype).max).min(axis=1)
        # all candidates tied, further equidistant points may exist
        for row in np.flatnonzero(tied[:, -1]):
            best[row] = self._lowest_tied(queries[row], distances[row, 0])
        return distances[:, 0], best

    def _lowest_tied(self, query: np.ndarray, distance: float) -> int:
        found = np.asarray(
            self.tree.query_ball_point(query, distance * (1.0 + 1e-9)),
            dtype=np.int64
        )
        exact = np.linalg.norm(self.points[found] - query, axis=1)
        return int(found[exact == exact.min()].min())

    def nearest(self, point: Sequence[float]) -> Tuple[float, int]:
        distances, indices = self.query(np.asarray(point, dtype=float))
        return float(distances[0]), int(indices[0])

    def knn(self, queries: np.ndarray,
            k: int) -> Tuple[np.ndarray, np.ndarray]:
        queries = np.asarray(queries, dtype=float).reshape(-1, 3)
        k = min(k, len(self))
        distances, indices = self.tree.query(queries, k=k)
        return distances.reshape(len(queries), k), \
            indices.reshape(len(queries), k)

    def within(self, queries: np.ndarray, radius: float):
        """Indices of the points within radius of each query (sorted).
        """
        queries = np.asarray(queries, dtype=float).reshape(-1, 3)
        return [
            np.sort(np.asarray(found, dtype=np.int64))
            for found in self.tree.query_ball_point(queries, radius)
        ]

#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Tue Oct 13 2026

virtual laser line scanner

The sensor frame has its origin on the laser line: rays leave the sensor
parallel to its +z axis, spread along x (lateral axis), and the sensor is
swept along y between profiles.
"""
from __future__ import annotations
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from logging import getLogger
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import trimesh
from trimesh.sample import sample_surface

from .errors import DegenerateMeshError, InvalidArgumentError
from .geom import Pose, PointCloud, pose_compose, quat_to_rotation
from .meshio import read_mesh

logger = getLogger(__file__)

# smallest accepted ray parameter, rays never report hits at their origin
RAY_EPSILON = 1e-12
MIN_TRIANGLE_AREA = 1e-18


def _slab_interval(origins: np.ndarray, directions: np.ndarray,
                   lower: np.ndarray, upper: np.ndarray
                   ) -> Tuple[np.ndarray, np.ndarray]:
    """Ray parameter interval inside an axis-aligned box.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        t_lower = (lower - origins) / directions
        t_upper = (upper - origins) / directions
    near = np.minimum(t_lower, t_upper)
    far = np.maximum(t_lower, t_upper)
    parallel = directions == 0
    inside = (origins >= lower) & (origins <= upper)
    near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
    far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
    return near.max(axis=1), far.min(axis=1)


def _elliptic_interval(origins: np.ndarray, directions: np.ndarray,
                       a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """Ray parameter interval inside the infinite elliptic cylinder
    (x/a)^2 + (y/b)^2 <= 1 around the local z axis.
    """
    qa = (directions[:, 0] / a) ** 2 + (directions[:, 1] / b) ** 2
    qb = origins[:, 0] * directions[:, 0] / a ** 2 \
        + origins[:, 1] * directions[:, 1] / b ** 2
    qc = (origins[:, 0] / a) ** 2 + (origins[:, 1] / b) ** 2 - 1.0
    discriminant = qb ** 2 - qa * qc
    axial = qa == 0
    crossing = (discriminant > 0) & ~axial
    root = np.sqrt(np.where(crossing, discriminant, 0.0))
    safe = np.where(axial, 1.0, qa)
    near = np.where(crossing, (-qb - root) / safe, np.inf)
    far = np.where(crossing, (-qb + root) / safe, -np.inf)
    # rays along the axis stay inside (or outside) forever
    near = np.where(axial & (qc < 0), -np.inf, near)
    far = np.where(axial & (qc < 0), np.inf, far)
    return near, far


def _entry(near: np.ndarray, far: np.ndarray) -> np.ndarray:
    return np.where((far >= near) & (near > RAY_EPSILON), near, np.inf)


class SurfaceModel(ABC):
    """Solid or surface in its own local frame that rays can hit.
    """
    @abstractmethod
    def intersect(self, origins: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
        """Distance along each unit ray to the first hit, inf on a miss.

        Args:
            origins (np.ndarray): N x 3 ray origins, local frame
            directions (np.ndarray): N x 3 unit ray directions, local frame
        """
        ...


@dataclass(frozen=True, eq=False)
class TriangleMesh(SurfaceModel):
    """Triangle soup, watertightness not required.
    """
    vertices: np.ndarray
    faces: np.ndarray
    # number of triangles tested per batch of a profile
    chunk_size: int = field(default=512, repr=False)

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float).reshape(-1, 3)
        faces = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(faces) == 0:
            raise DegenerateMeshError("Mesh has no triangle.")
        if faces.min() < 0 or faces.max() >= len(vertices):
            raise InvalidArgumentError("Face index out of vertex range.")
        if not np.all(np.isfinite(vertices)):
            raise InvalidArgumentError("Mesh holds non-finite vertices.")
        vertices.setflags(write=False)
        faces.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)
        logger.debug("Created %s.", repr(self))

    def __repr__(self) -> str:
        return "TriangleMesh(vertices=%d, faces=%d)" % (
            len(self.vertices), len(self.faces)
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> TriangleMesh:
        parser = read_mesh(path)
        return cls(parser.vertices, parser.faces)

    @property
    def triangles(self) -> np.ndarray:
        return self.vertices[self.faces]

    def face_cross(self) -> np.ndarray:
        triangles = self.triangles
        return np.cross(triangles[:, 1] - triangles[:, 0],
                        triangles[:, 2] - triangles[:, 0])

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_cross(), axis=1)

    def intersect(self, origins: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
        # Moeller-Trumbore over all rays against a batch of triangles
        triangles = self.triangles
        corner = triangles[:, 0]
        edge1 = triangles[:, 1] - corner
        edge2 = triangles[:, 2] - corner
        best = np.full(len(origins), np.inf)
        batch = max(1, min(self.chunk_size,
                           (1 << 21) // max(1, len(origins))))
        for start in range(0, len(triangles), batch):
            e1 = edge1[start:start + batch]
            e2 = edge2[start:start + batch]
            pvec = np.cross(directions[:, None, :], e2[None, :, :])
            det = np.einsum("nfk,fk->nf", pvec, e1)
            valid = np.abs(det) > 1e-30
            inv_det = np.where(valid, 1.0 / np.where(valid, det, 1.0), 0.0)
            tvec = origins[:, None, :] - corner[None, start:start + batch]
            u = np.einsum("nfk,nfk->nf", tvec, pvec) * inv_det
            qvec = np.cross(tvec, e1[None, :, :])
            v = np.einsum("nfk,nk->nf", qvec, directions) * inv_det
            t = np.einsum("nfk,fk->nf", qvec, e2) * inv_det
            hit = valid & (u >= 0) & (v >= 0) & (u + v <= 1) \
                & (t > RAY_EPSILON)
            best = np.minimum(best, np.where(hit, t, np.inf).min(axis=1))
        return best


@dataclass(frozen=True)
class Box(SurfaceModel):
    """Axis-aligned box centred on the local origin.
    """
    half_extents: Tuple[float, float, float]

    def __post_init__(self):
        if len(self.half_extents) != 3 or min(self.half_extents) <= 0:
            raise InvalidArgumentError("Box half extents must be positive.")

    def intersect(self, origins: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
        half = np.asarray(self.half_extents, dtype=float)
        return _entry(*_slab_interval(origins, directions, -half, half))

    def to_mesh(self) -> TriangleMesh:
        corners = np.array([
            [x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)
        ], dtype=float) * np.asarray(self.half_extents, dtype=float)
        # outward winding, corner index = 4x + 2y + z
        faces = [
            (0, 1, 3), (0, 3, 2), (4, 6, 7), (4, 7, 5),
            (0, 4, 5), (0, 5, 1), (2, 3, 7), (2, 7, 6),
            (0, 2, 6), (0, 6, 4), (1, 5, 7), (1, 7, 3)
        ]
        return TriangleMesh(corners, faces)


@dataclass(frozen=True)
class Cylinder(SurfaceModel):
    """Capped circular cylinder around the local z axis, centred on the
    origin.
    """
    radius: float
    half_length: float

    def __post_init__(self):
        if self.radius <= 0 or self.half_length <= 0:
            raise InvalidArgumentError("Cylinder dimensions must be positive.")

    def intersect(self, origins: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
        side_near, side_far = _elliptic_interval(origins, directions,
                                                 self.radius, self.radius)
        lower = np.array([-np.inf, -np.inf, -self.half_length])
        slab_near, slab_far = _slab_interval(origins, directions,
                                             lower, -lower)
        return _entry(np.maximum(side_near, slab_near),
                      np.minimum(side_far, slab_far))

    def to_mesh(self, segments: int = 64) -> TriangleMesh:
        angles = np.linspace(0.0, 2.0 * np.pi, segments, endpoint=False)
        ring = np.column_stack([self.radius * np.cos(angles),
                                self.radius * np.sin(angles),
                                np.zeros(segments)])
        bottom = ring - [0.0, 0.0, self.half_length]
        top = ring + [0.0, 0.0, self.half_length]
        centers = np.array([[0.0, 0.0, -self.half_length],
                            [0.0, 0.0, self.half_length]])
        vertices = np.concatenate([bottom, top, centers])
        faces = []
        for i in range(segments):
            j = (i + 1) % segments
            faces.append((i, j, segments + j))
            faces.append((i, segments + j, segments + i))
            faces.append((2 * segments, j, i))
            faces.append((2 * segments + 1, segments + i, segments + j))
        return TriangleMesh(vertices, faces)


@dataclass(frozen=True)
class Sphere(SurfaceModel):
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidArgumentError("Sphere radius must be positive.")

    def intersect(self, origins: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
        half_b = np.einsum("nk,nk->n", origins, directions)
        c = np.einsum("nk,nk->n", origins, origins) - self.radius ** 2
        discriminant = half_b ** 2 - c
        root = np.sqrt(np.maximum(discriminant, 0.0))
        near = np.where(discriminant > 0, -half_b - root, np.inf)
        far = np.where(discriminant > 0, -half_b + root, -np.inf)
        return _entry(near, far)


@dataclass(frozen=True)
class EyePlate(SurfaceModel):
    """Rectangular plate with an elliptical through-hole, the needle eye
    and socket analog.

    The local frame is the hole frame: the hole centre lies on the entry
    face at the origin, the hole axis is +z and the plate fills
    0 <= z <= thickness. The first semi-axis runs along x. The plate
    outline is shifted by hole_offset along x so that the part has no
    symmetry that maps the hole onto itself.

    Args:
        width (float): plate extent along x
        height (float): plate extent along y
        thickness (float): plate extent along z (hole depth)
        semi_axes (Tuple[float, float]): hole semi-axes along x and y
        hole_offset (float): x coordinate of the plate centre
    """
    width: float
    height: float
    thickness: float
    semi_axes: Tuple[float, float]
    hole_offset: float = 0.0

    def __post_init__(self):
        if min(self.width, self.height, self.thickness) <= 0 \
                or min(self.semi_axes) <= 0:
            raise InvalidArgumentError("Plate dimensions must be positive.")
        a, b = self.semi_axes
        if abs(self.hole_offset) + a >= self.width / 2 \
                or b >= self.height / 2:
            raise InvalidArgumentError("Hole does not fit inside the plate.")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.hole_offset - self.width / 2,
                         -self.height / 2, 0.0])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.hole_offset + self.width / 2,
                         self.height / 2, self.thickness])

    def intersect(self, origins: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
        box_near, box_far = _slab_interval(origins, directions,
                                           self.lower, self.upper)
        hole_near, hole_far = _elliptic_interval(origins, directions,
                                                 *self.semi_axes)
        # solid = box minus hole: entering the box inside the hole moves
        # the first hit to where the ray leaves the hole
        in_hole = (hole_near <= box_near) & (box_near < hole_far)
        near = np.where(in_hole, hole_far, box_near)
        return _entry(near, box_far)


def _local_rays(pose: Pose, origins: np.ndarray, directions: np.ndarray
                ) -> Tuple[np.ndarray, np.ndarray]:
    rotation = pose.rotation_matrix
    return (origins - pose.position) @ rotation, directions @ rotation


@dataclass(frozen=True, eq=False)
class CompositeSurface(SurfaceModel):
    """Rigid union of surfaces, each placed by a pose in the composite's
    frame, e.g. a held thread together with the gripper finger.
    """
    components: Tuple[Tuple[SurfaceModel, Pose], ...]

    def __post_init__(self):
        components = tuple((surface, pose)
                           for surface, pose in self.components)
        if not components:
            raise InvalidArgumentError("Composite needs a component.")
        object.__setattr__(self, "components", components)

    def intersect(self, origins: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
        best = np.full(len(origins), np.inf)
        for surface, pose in self.components:
            best = np.minimum(best, surface.intersect(
                *_local_rays(pose, origins, directions)
            ))
        return best

    def to_mesh(self) -> TriangleMesh:
        vertices, faces, count = [], [], 0
        for surface, pose in self.components:
            mesh = surface if isinstance(surface, TriangleMesh) \
                else surface.to_mesh()
            vertices.append(pose.apply(mesh.vertices))
            faces.append(mesh.faces + count)
            count += len(mesh.vertices)
        return TriangleMesh(np.concatenate(vertices), np.concatenate(faces))


@dataclass(frozen=True, eq=False)
class ScenePart:
    part_id: str
    surface: SurfaceModel
    pose: Pose = field(default_factory=Pose)


@dataclass(frozen=True, eq=False)
class Scene:
    """Parts placed in the base frame, nearest hit wins.
    """
    parts: Tuple[ScenePart, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        object.__setattr__(self, "parts", parts)
        ids = [part.part_id for part in parts]
        if len(set(ids)) != len(ids):
            raise InvalidArgumentError("Scene part ids must be unique.")
        for part in parts:
            if isinstance(part.surface, TriangleMesh) and np.any(
                part.surface.face_areas() <= MIN_TRIANGLE_AREA
            ):
                raise DegenerateMeshError(
                    f"Part '{part.part_id}' has a degenerate triangle."
                )
        logger.debug("Created scene with parts %s.", ids)

    def __len__(self) -> int:
        return len(self.parts)

    @property
    def part_ids(self) -> List[str]:
        return [part.part_id for part in self.parts]

    def part(self, part_id: str) -> ScenePart:
        for part in self.parts:
            if part.part_id == part_id:
                return part
        raise InvalidArgumentError(f"Unknown part '{part_id}'.")

    def with_pose(self, part_id: str, pose: Pose) -> Scene:
        self.part(part_id)
        return Scene(tuple(
            ScenePart(part.part_id, part.surface, pose)
            if part.part_id == part_id else part
            for part in self.parts
        ))

    def only(self, part_id: str) -> Scene:
        return Scene((self.part(part_id),))

    def intersect(self, origins: np.ndarray, directions: np.ndarray
                  ) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest hit over all parts.

        Returns:
            Tuple[np.ndarray, np.ndarray]: ray distances (inf on a miss) and
                index of the part that was hit (-1 on a miss)
        """
        best = np.full(len(origins), np.inf)
        owner = np.full(len(origins), -1)
        for index, part in enumerate(self.parts):
            t = part.surface.intersect(
                *_local_rays(part.pose, origins, directions)
            )
            closer = t < best
            best = np.where(closer, t, best)
            owner = np.where(closer, index, owner)
        return best, owner


@dataclass
class ScannerConfig:
    """Laser line scanner parameters, lengths in meters.

    Rays sit on the lateral_resolution grid, so the ray spacing
    lateral_span / (points_per_profile - 1) may not drop below it.
    """
    points_per_profile: int = 2048
    lateral_span: float = 0.025
    depth_noise_std: float = 1.5e-6
    lateral_resolution: float = 12e-6
    standoff: float = 0.1
    sweep_step: float = 25e-6

    def __post_init__(self):
        if self.points_per_profile < 2:
            raise InvalidArgumentError("A profile needs at least 2 points.")
        if min(self.lateral_span, self.lateral_resolution,
               self.standoff, self.sweep_step) <= 0:
            raise InvalidArgumentError(
                "Scanner lengths must be strictly positive."
            )
        if self.depth_noise_std < 0:
            raise InvalidArgumentError("Depth noise std must not be negative.")
        if self.lateral_span / (self.points_per_profile - 1) \
                < self.lateral_resolution:
            raise InvalidArgumentError(
                "Ray spacing is finer than the lateral resolution."
            )

    @classmethod
    def from_dict(cls, data: dict) -> ScannerConfig:
        return cls(**data)

    def lateral_positions(self) -> np.ndarray:
        """Lateral coordinate of every ray, snapped to the resolution grid.
        """
        start = -self.lateral_span / 2
        steps = np.arange(self.points_per_profile) * (
            self.lateral_span / (self.points_per_profile - 1)
        )
        return start + np.round(steps / self.lateral_resolution) \
            * self.lateral_resolution


@dataclass
class CalibrationError:
    """Error between the assumed and the true sensor-to-flange transform:
    true = assumed * sensor_mount_offset.
    """
    sensor_mount_offset: Pose = field(default_factory=Pose)

    @classmethod
    def from_magnitudes(cls, translation: float, angle: float,
                        seed: int) -> CalibrationError:
        """Offset with the given translation magnitude (m) and rotation
        angle (rad) along random directions.
        """
        if not np.isfinite(translation) or not np.isfinite(angle):
            raise InvalidArgumentError("Calibration error must be finite.")
        rng = np.random.default_rng(seed)
        direction = rng.normal(size=3)
        axis = rng.normal(size=3)
        offset = Pose(
            translation * direction / np.linalg.norm(direction),
            np.concatenate([[np.cos(angle / 2)],
                            np.sin(angle / 2) * axis / np.linalg.norm(axis)])
        )
        return cls(offset)

    @property
    def translation(self) -> float:
        return float(np.linalg.norm(self.sensor_mount_offset.position))

    @property
    def angle(self) -> float:
        return float(self.sensor_mount_offset.rotation.magnitude())


@dataclass(frozen=True, eq=False)
class ScanProfile:
    """Samples of one laser line in the sensor frame, ordered by strictly
    increasing lateral coordinate; rays without return are absent.
    """
    index: int
    samples: np.ndarray
    part_indices: np.ndarray

    def __len__(self) -> int:
        return len(self.samples)


def scan_profile(scene: Scene, true_pose: Pose, cfg: ScannerConfig,
                 rng: np.random.Generator, index: int = 0) -> ScanProfile:
    """Cast one laser line from the true sensor pose.
    """
    lateral = cfg.lateral_positions()
    local_origins = np.column_stack([lateral, np.zeros_like(lateral),
                                     np.zeros_like(lateral)])
    rotation = true_pose.rotation_matrix
    origins = local_origins @ rotation.T + true_pose.position
    directions = np.broadcast_to(rotation[:, 2], origins.shape)
    t, owner = scene.intersect(origins, np.ascontiguousarray(directions))
    # noise is drawn for every ray so the stream does not depend on hits
    noise = rng.normal(0.0, cfg.depth_noise_std, size=len(t)) \
        if cfg.depth_noise_std > 0 else np.zeros(len(t))
    hit = np.isfinite(t)
    samples = np.column_stack([lateral[hit], np.zeros(hit.sum()),
                               t[hit] + noise[hit]])
    return ScanProfile(index, samples, owner[hit])


def _sweep(scene: Scene, trajectory: Sequence[Pose], cfg: ScannerConfig,
           cal: CalibrationError, seed: int,
           workers: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if len(trajectory) == 0:
        raise InvalidArgumentError("Scanner trajectory is empty.")
    if len(scene) == 0:
        raise InvalidArgumentError("Scene is empty.")
    if seed < 0:
        raise InvalidArgumentError("Seed must not be negative.")

    def profile(index: int) -> Tuple[np.ndarray, np.ndarray]:
        assumed = trajectory[index]
        true_pose = pose_compose(assumed, cal.sensor_mount_offset)
        rng = np.random.default_rng([seed, index])
        result = scan_profile(scene, true_pose, cfg, rng, index)
        # the robot only knows the assumed sensor pose
        return assumed.apply(result.samples), result.part_indices

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        profiles = list(executor.map(profile, range(len(trajectory))))
    points = np.concatenate([points for points, _ in profiles])
    owners = np.concatenate([owners for _, owners in profiles])
    viewpoint = trajectory[len(trajectory) // 2].position
    logger.debug("Swept %i profiles, %i hits.", len(trajectory), len(points))
    return points, owners, viewpoint


def sweep_scan(scene: Scene, scanner_pose_trajectory: Sequence[Pose],
               cfg: ScannerConfig, cal: CalibrationError, seed: int,
               workers: int = 1) -> PointCloud:
    """Sweep the laser line over the scene.

    Args:
        scene (Scene): scanned parts, base frame
        scanner_pose_trajectory (Sequence[Pose]): assumed sensor pose of
            every profile
        cfg (ScannerConfig): scanner parameters
        cal (CalibrationError): error of the assumed sensor mounting
        seed (int): noise seed, profile k draws from the stream (seed, k)
        workers (int): number of threads computing profiles

    Raises:
        InvalidArgumentError: trajectory or scene empty

    Returns:
        PointCloud: all hits in the base frame, profile by profile, with
            the middle sensor position as viewpoint; empty without hits
    """
    points, _, viewpoint = _sweep(scene, scanner_pose_trajectory, cfg, cal,
                                  seed, workers)
    return PointCloud(points, viewpoint=viewpoint)


def sweep_scan_parts(scene: Scene, scanner_pose_trajectory: Sequence[Pose],
                     cfg: ScannerConfig, cal: CalibrationError, seed: int,
                     workers: int = 1) -> Dict[str, PointCloud]:
    """Same sweep as sweep_scan, hits split by the part that produced them.
    """
    points, owners, viewpoint = _sweep(scene, scanner_pose_trajectory, cfg,
                                       cal, seed, workers)
    return {
        part.part_id: PointCloud(points[owners == index],
                                 viewpoint=viewpoint)
        for index, part in enumerate(scene.parts)
    }


def plan_sweep(center: Sequence[float], orientation: Sequence[float],
               cfg: ScannerConfig, view_tilt: float = np.pi / 4,
               sweep_length: float = 2e-3) -> List[Pose]:
    """Scanner poses sweeping across a point of interest.

    The rays travel along (sin(view_tilt), 0, cos(view_tilt)) of the frame
    given by orientation, so a zero tilt looks straight down its z axis.
    The laser line lies in that frame's x-z plane and the sweep runs along
    its y axis, centred on the point, at cfg.standoff along the rays.

    Args:
        center (Sequence[float]): point of interest, base frame
        orientation (Sequence[float]): frame orientation (w, x, y, z)
        cfg (ScannerConfig): scanner parameters (standoff, sweep_step)
        view_tilt (float): ray tilt against the frame's z axis, radians
        sweep_length (float): distance covered by the sweep, meters

    Returns:
        List[Pose]: assumed sensor pose per profile
    """
    if sweep_length < 0:
        raise InvalidArgumentError("Sweep length must not be negative.")
    rotation = quat_to_rotation(orientation).as_matrix()
    ray = rotation @ np.array([np.sin(view_tilt), 0.0, np.cos(view_tilt)])
    sweep = rotation[:, 1]
    lateral = np.cross(sweep, ray)
    sensor_rotation = np.column_stack([lateral, sweep, ray])
    base = np.asarray(center, dtype=float) - cfg.standoff * ray
    count = int(np.floor(sweep_length / cfg.sweep_step + 1e-9)) + 1
    offsets = (np.arange(count) - (count - 1) / 2) * cfg.sweep_step
    template = Pose.from_matrix(np.block([
        [sensor_rotation, base[:, None]], [np.zeros((1, 3)), np.ones((1, 1))]
    ]))
    return [Pose(base + offset * sweep, template.orientation)
            for offset in offsets]


def sample_mesh(mesh: SurfaceModel, target_count: int,
                seed: int) -> PointCloud:
    """Area-weighted uniform surface sampling with normals of the host
    triangles.

    Boxes and cylinders are tessellated first. Degenerate triangles get
    zero weight.

    Raises:
        DegenerateMeshError: no triangle with positive area
        InvalidArgumentError: target_count below 1 or surface without
            tessellation
    """
    if target_count < 1:
        raise InvalidArgumentError("Sample count must be at least 1.")
    if not isinstance(mesh, TriangleMesh):
        to_mesh = getattr(mesh, "to_mesh", None)
        if to_mesh is None:
            raise InvalidArgumentError(
                f"{type(mesh).__name__} cannot be sampled."
            )
        mesh = to_mesh()
    cross = mesh.face_cross()
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    areas = np.where(areas > MIN_TRIANGLE_AREA, areas, 0.0)
    if areas.sum() == 0:
        raise DegenerateMeshError("Mesh has only degenerate triangles.")
    surface = trimesh.Trimesh(mesh.vertices, mesh.faces, process=False)
    points, faces = sample_surface(
        surface, target_count, face_weight=areas, seed=seed
    )
    normals = cross[faces] / (2.0 * areas[faces])[:, None]
    logger.debug("Sampled %i points from %s.", target_count, repr(mesh))
    return PointCloud(np.asarray(points, dtype=float), normals)

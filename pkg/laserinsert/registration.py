#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Wed Oct 14 2026

pose estimation by point cloud registration: filtering, FPFH features,
feature RANSAC, orientation gate and ICP refinement in a fitness loop

Every transform estimated here maps the reference cloud into the scan
frame.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from logging import getLogger
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import open3d as o3d
from scipy.sparse import csr_matrix
from scipy.spatial import cKDTree

from .errors import (DegenerateFeatureError, DivergenceError,
                     InsufficientCorrespondencesError, InvalidArgumentError,
                     PreprocessingDegenerateError, RegistrationFailedError)
from .geom import (Pose, PointCloud, SpatialIndex, kabsch, pose_compose,
                   quat_distance, transform_cloud)
from .seeds import derive_seed

logger = getLogger(__file__)

HISTOGRAM_BINS = 11
DESCRIPTOR_SIZE = 3 * HISTOGRAM_BINS
MIN_FEATURE_NEIGHBOURS = 5
# fitness sentinel before the first accepted estimate
UNSET_FITNESS = 1e6


@dataclass
class RegistrationParams:
    """Thresholds and tuning of the registration pipeline, lengths in
    meters.

    Args:
        rho_icp (float): accepted ICP fitness, mean squared distance (m^2)
        rho_rot (float): orientation gate around q0, radians
        q0 (Tuple[float, ...]): expected orientation (w, x, y, z)
        voxel_size (float): downsampling grid
        outlier_mean_k (int): neighbours of the statistical outlier filter
        outlier_std_ratio (float): outlier cut in standard deviations
        ransac_iterations (int): hypothesis budget per RANSAC run
        ransac_inlier_threshold (float): inlier distance
        icp_max_iterations (int): ICP iteration cap
        icp_max_correspondence_dist (float): ICP pairing distance
        max_outer_loops (int): RANSAC + ICP rounds before giving up
        feature_radius (float): FPFH support radius
        normal_neighbours (int): neighbourhood of PCA normals
        ransac_confidence (float): early stop probability of RANSAC
        ransac_early_stop (bool): end RANSAC once ransac_confidence is
            reached instead of drawing all ransac_iterations hypotheses
        edge_length_ratio (float): similarity of sampled triangle edges
        ransac_validation_points (int): ref keypoints scoring a hypothesis
        ransac_batch (int): hypotheses drawn and evaluated together
        workers (int): threads evaluating hypothesis batches
    """
    rho_icp: float = 25e-12
    rho_rot: float = np.pi / 4
    q0: Tuple[float, ...] = (1.0, 0.0, 0.0, 0.0)
    voxel_size: float = 40e-6
    outlier_mean_k: int = 20
    outlier_std_ratio: float = 2.0
    ransac_iterations: int = 20000
    ransac_inlier_threshold: float = 60e-6
    icp_max_iterations: int = 60
    icp_max_correspondence_dist: float = 150e-6
    max_outer_loops: int = 10
    feature_radius: float = 200e-6
    normal_neighbours: int = 10
    ransac_confidence: float = 0.999
    ransac_early_stop: bool = False
    edge_length_ratio: float = 0.9
    ransac_validation_points: int = 1000
    ransac_batch: int = 256
    workers: int = 1

    def __post_init__(self):
        self.q0 = tuple(float(value) for value in self.q0)
        if len(self.q0) != 4 or abs(np.linalg.norm(self.q0) - 1.0) > 1e-6:
            raise InvalidArgumentError("q0 must be a unit quaternion.")
        if not self.rho_icp > 0:
            raise InvalidArgumentError("rho_icp must be positive.")
        if not 0 < self.rho_rot <= np.pi:
            raise InvalidArgumentError("rho_rot must lie in (0, pi].")
        if min(self.voxel_size, self.ransac_inlier_threshold,
               self.icp_max_correspondence_dist, self.feature_radius,
               self.outlier_std_ratio) <= 0:
            raise InvalidArgumentError("Lengths and ratios must be positive.")
        if min(self.outlier_mean_k, self.ransac_iterations,
               self.icp_max_iterations, self.max_outer_loops,
               self.normal_neighbours, self.ransac_validation_points,
               self.ransac_batch, self.workers) < 1:
            raise InvalidArgumentError("Counts must be at least 1.")
        if self.normal_neighbours < 3:
            raise InvalidArgumentError("Normals need at least 3 neighbours.")
        if not 0 < self.ransac_confidence < 1 \
                or not 0 < self.edge_length_ratio < 1:
            raise InvalidArgumentError(
                "Confidence and edge ratio must lie in (0, 1)."
            )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> RegistrationParams:
        return cls(**data)

    def with_q0(self, q0: Sequence[float]) -> RegistrationParams:
        return replace(self, q0=tuple(q0))


@dataclass(frozen=True, eq=False)
class RegistrationResult:
    """Estimated ref to scan pose and its diagnostics.
    """
    pose: Pose
    fitness: float
    outer_loops_used: int
    ransac_inlier_fraction: float
    # best fitness after every outer loop
    fitness_history: Tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not self.fitness >= 0:
            raise InvalidArgumentError("Fitness must not be negative.")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pose": self.pose.to_dict(),
            "fitness": self.fitness,
            "outer_loops_used": self.outer_loops_used,
            "ransac_inlier_fraction": self.ransac_inlier_fraction,
            "fitness_history": list(self.fitness_history)
        }


@dataclass(frozen=True, eq=False)
class FeatureCloud:
    """Keypoints with one 33-bin descriptor each.
    """
    keypoints: PointCloud
    descriptors: np.ndarray

    def __post_init__(self):
        descriptors = np.array(self.descriptors, dtype=float)
        if descriptors.shape != (len(self.keypoints), DESCRIPTOR_SIZE):
            raise InvalidArgumentError(
                "Expected one %i-bin descriptor per keypoint."
                % DESCRIPTOR_SIZE
            )
        if not np.all(np.isfinite(descriptors)) or np.any(descriptors < 0):
            raise InvalidArgumentError(
                "Descriptors must be finite and non-negative."
            )
        descriptors.setflags(write=False)
        object.__setattr__(self, "descriptors", descriptors)

    def __len__(self) -> int:
        return len(self.keypoints)


def _open3d_cloud(cloud: PointCloud) -> o3d.geometry.PointCloud:
    pcd = o3d.geometry.PointCloud()
    pcd.points = o3d.utility.Vector3dVector(np.array(cloud.points))
    return pcd


def remove_statistical_outliers(cloud: PointCloud, mean_k: int,
                                std_ratio: float) -> PointCloud:
    """Drop points whose mean distance to their mean_k neighbours exceeds
    the global mean by more than std_ratio standard deviations.
    """
    k = min(mean_k, len(cloud) - 1)
    if k < 1:
        return cloud
    # Open3D counts the point itself as its first neighbour
    _, kept = _open3d_cloud(cloud).remove_statistical_outlier(
        nb_neighbors=k + 1, std_ratio=std_ratio
    )
    keep = np.zeros(len(cloud), dtype=bool)
    keep[np.asarray(kept, dtype=np.int64)] = True
    logger.debug("Outlier filter kept %i of %i points.", keep.sum(),
                 len(cloud))
    return cloud.select(keep)


def voxel_downsample(cloud: PointCloud, voxel_size: float) -> PointCloud:
    """One point per occupied voxel at the centroid of its members; normals
    are averaged and renormalised.

    The grid is anchored at the origin, so downsampling a downsampled cloud
    again keeps every point. Output is sorted by voxel.
    """
    lower = np.floor(cloud.points.min(axis=0) / voxel_size) * voxel_size
    upper = (np.floor(cloud.points.max(axis=0) / voxel_size) + 1.0) \
        * voxel_size
    down, _, traces = _open3d_cloud(cloud).voxel_down_sample_and_trace(
        voxel_size=voxel_size, min_bound=lower, max_bound=upper
    )
    centroids = np.asarray(down.points)
    inverse = np.empty(len(cloud), dtype=np.int64)
    first = np.empty(len(centroids), dtype=np.int64)
    for voxel, members in enumerate(traces):
        members = np.asarray(members, dtype=np.int64)
        inverse[members] = voxel
        first[voxel] = members.min()
    normals = None
    if cloud.has_normals:
        normals = np.zeros((len(centroids), 3))
        np.add.at(normals, inverse, cloud.normals)
        lengths = np.linalg.norm(normals, axis=1)
        # cancelling normals fall back to the first member's normal
        normals = np.where(lengths[:, None] > 1e-9,
                           normals / np.maximum(lengths, 1e-300)[:, None],
                           cloud.normals[first])
    keys = np.floor(centroids / voxel_size)
    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0]))
    return PointCloud(centroids[order],
                      None if normals is None else normals[order],
                      cloud.viewpoint)


def preprocess(cloud: PointCloud, params: RegistrationParams) -> PointCloud:
    """Statistical outlier removal followed by voxel-grid downsampling.

    Raises:
        InvalidArgumentError: empty input
        PreprocessingDegenerateError: filtering removed every point
    """
    if len(cloud) == 0:
        raise InvalidArgumentError("Cannot preprocess an empty cloud.")
    filtered = remove_statistical_outliers(cloud, params.outlier_mean_k,
                                           params.outlier_std_ratio)
    if len(filtered) == 0:
        raise PreprocessingDegenerateError("Outlier filter emptied the cloud.")
    downsampled = voxel_downsample(filtered, params.voxel_size)
    logger.debug("Preprocessed %i into %i points.", len(cloud),
                 len(downsampled))
    return downsampled


def estimate_normals(cloud: PointCloud, neighbours: int = 10) -> PointCloud:
    """PCA normals over the nearest neighbours, oriented toward the
    viewpoint (or away from the centroid without one).
    """
    if len(cloud) < 3:
        raise DegenerateFeatureError("Normals need at least 3 points.")
    _, indices = SpatialIndex(cloud).knn(cloud.points,
                                         min(neighbours, len(cloud)))
    patches = cloud.points[indices]
    centred = patches - patches.mean(axis=1, keepdims=True)
    covariance = np.einsum("nki,nkj->nij", centred, centred)
    _, vectors = np.linalg.eigh(covariance)
    normals = vectors[:, :, 0]
    if cloud.viewpoint is not None:
        towards = cloud.viewpoint - cloud.points
    else:
        towards = cloud.points - cloud.centroid()
    flip = np.einsum("nk,nk->n", normals, towards) < 0
    normals = np.where(flip[:, None], -normals, normals)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return cloud.with_normals(normals)


def _pair_features(points: np.ndarray, normals: np.ndarray,
                   source: np.ndarray, target: np.ndarray
                   ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Darboux frame angles (alpha, phi, theta) of point pairs.
    """
    delta = points[target] - points[source]
    distance = np.linalg.norm(delta, axis=1)
    delta = delta / distance[:, None]
    n1, n2 = normals[source], normals[target]
    angle1 = np.einsum("nk,nk->n", n1, delta)
    angle2 = np.einsum("nk,nk->n", n2, delta)
    # the point whose normal is closer to the connecting line is the source
    swap = np.abs(angle1) < np.abs(angle2)
    u = np.where(swap[:, None], n2, n1)
    other = np.where(swap[:, None], n1, n2)
    delta = np.where(swap[:, None], -delta, delta)
    phi = np.where(swap, -angle2, angle1)
    v = np.cross(delta, u)
    v_norm = np.linalg.norm(v, axis=1)
    v = np.where(v_norm[:, None] > 1e-12,
                 v / np.maximum(v_norm, 1e-300)[:, None], 0.0)
    w = np.cross(u, v)
    alpha = np.einsum("nk,nk->n", v, other)
    theta = np.arctan2(np.einsum("nk,nk->n", w, other),
                       np.einsum("nk,nk->n", u, other))
    return alpha, phi, theta


def _bin(values: np.ndarray, lower: float, upper: float) -> np.ndarray:
    index = np.floor((values - lower) / (upper - lower) * HISTOGRAM_BINS)
    return np.clip(index, 0, HISTOGRAM_BINS - 1).astype(np.int64)


def compute_features(cloud: PointCloud, radius: float,
                     normal_neighbours: int = 10) -> FeatureCloud:
    """FPFH descriptor of every point with at least 5 neighbours inside
    radius.

    Normals are estimated by PCA when the cloud carries none. Points with
    fewer neighbours are not used as keypoints.

    Args:
        cloud (PointCloud): input cloud
        radius (float): feature support radius
        normal_neighbours (int): PCA neighbourhood if normals are missing

    Raises:
        DegenerateFeatureError: more than half of the points have fewer than
            5 neighbours, i.e. the radius is below the point spacing

    Returns:
        FeatureCloud: keypoints (with normals) and descriptors
    """
    if not cloud.has_normals:
        cloud = estimate_normals(cloud, normal_neighbours)
    index = SpatialIndex(cloud)
    neighbourhoods = index.within(cloud.points, radius)
    source = np.repeat(np.arange(len(cloud)),
                       [len(found) for found in neighbourhoods])
    target = np.concatenate(neighbourhoods)
    distance = np.linalg.norm(cloud.points[target] - cloud.points[source],
                              axis=1)
    # drops the query point itself and exact duplicates
    pairs = distance > 0
    source, target, distance = source[pairs], target[pairs], distance[pairs]
    counts = np.bincount(source, minlength=len(cloud))
    usable = counts >= MIN_FEATURE_NEIGHBOURS
    if usable.sum() == 0 or usable.sum() < 0.5 * len(cloud):
        raise DegenerateFeatureError(
            "Feature radius %g m leaves %i of %i points with fewer than %i "
            "neighbours." % (radius, (~usable).sum(), len(cloud),
                             MIN_FEATURE_NEIGHBOURS)
        )

    # simplified point feature histograms
    alpha, phi, theta = _pair_features(cloud.points, cloud.normals,
                                       source, target)
    increment = 100.0 / counts[source]
    spfh = np.zeros((len(cloud), DESCRIPTOR_SIZE))
    np.add.at(spfh, (source, _bin(alpha, -1.0, 1.0)), increment)
    np.add.at(spfh, (source, HISTOGRAM_BINS + _bin(phi, -1.0, 1.0)),
              increment)
    np.add.at(spfh, (source, 2 * HISTOGRAM_BINS + _bin(theta, -np.pi, np.pi)),
              increment)

    # neighbour histograms weighted by inverse distance
    weights = csr_matrix((1.0 / distance, (source, target)),
                         shape=(len(cloud), len(cloud)))
    weighted = weights @ spfh
    descriptors = np.zeros_like(weighted)
    for block in range(3):
        columns = slice(block * HISTOGRAM_BINS, (block + 1) * HISTOGRAM_BINS)
        total = weighted[:, columns].sum(axis=1, keepdims=True)
        descriptors[:, columns] = np.where(
            total > 0, weighted[:, columns] * 100.0 / np.where(
                total > 0, total, 1.0), 0.0
        )
    logger.debug("Computed %i descriptors, %i points without support.",
                 usable.sum(), (~usable).sum())
    return FeatureCloud(cloud.select(usable), descriptors[usable])


def _batch_kabsch(source: np.ndarray, target: np.ndarray
                  ) -> Tuple[np.ndarray, np.ndarray]:
    source_centroid = source.mean(axis=1, keepdims=True)
    target_centroid = target.mean(axis=1, keepdims=True)
    covariance = np.einsum("bni,bnj->bij", source - source_centroid,
                           target - target_centroid)
    u, _, vt = np.linalg.svd(covariance)
    v = np.swapaxes(vt, 1, 2)
    ut = np.swapaxes(u, 1, 2)
    sign = np.sign(np.linalg.det(v @ ut))
    sign[sign == 0] = 1.0
    correction = np.tile(np.eye(3), (len(source), 1, 1))
    correction[:, 2, 2] = sign
    rotation = v @ correction @ ut
    translation = target_centroid[:, 0] - np.einsum(
        "bij,bj->bi", rotation, source_centroid[:, 0]
    )
    return rotation, translation


@dataclass
class _Hypotheses:
    index: np.ndarray
    rotation: np.ndarray
    translation: np.ndarray
    correspondence_ratio: np.ndarray
    inlier_fraction: np.ndarray
    rmse: np.ndarray


class _RansacProblem:
    """Shared state of one RANSAC run.
    """

    def __init__(self, scan: FeatureCloud, ref: FeatureCloud,
                 params: RegistrationParams, seed: int) -> None:
        self.params = params
        self.seed = seed
        self.scan_points = scan.keypoints.points
        self.ref_points = ref.keypoints.points
        self.scan_index = SpatialIndex(self.scan_points)
        # descriptor nearest neighbour of every ref keypoint
        _, matches = cKDTree(scan.descriptors).query(ref.descriptors, k=1)
        self.corr_ref = self.ref_points
        self.corr_scan = self.scan_points[matches]
        validation = np.random.default_rng([seed, 1 << 30]).permutation(
            len(self.ref_points)
        )[:params.ransac_validation_points]
        self.validation_points = self.ref_points[np.sort(validation)]

    def evaluate(self, first: int, last: int) -> _Hypotheses:
        params = self.params
        indices = np.arange(first, last)
        samples = np.array([
            np.random.default_rng([self.seed, i]).choice(
                len(self.corr_ref), 3, replace=False
            )
            for i in indices
        ]).reshape(-1, 3)
        ref = self.corr_ref[samples]
        scan = self.corr_scan[samples]
        # prerejection on the similarity of the sampled triangles
        keep = np.ones(len(indices), dtype=bool)
        for a, b in ((0, 1), (1, 2), (2, 0)):
            ref_edge = np.linalg.norm(ref[:, a] - ref[:, b], axis=1)
            scan_edge = np.linalg.norm(scan[:, a] - scan[:, b], axis=1)
            longer = np.maximum(ref_edge, scan_edge)
            shorter = np.minimum(ref_edge, scan_edge)
            keep &= (longer > 0) & (shorter >= params.edge_length_ratio
                                    * longer)
        indices, ref, scan = indices[keep], ref[keep], scan[keep]
        rotation, translation = _batch_kabsch(ref, scan)
        moved = np.einsum("bij,bnj->bni", rotation, ref) \
            + translation[:, None, :]
        keep = np.all(np.linalg.norm(moved - scan, axis=2)
                      < params.ransac_inlier_threshold, axis=1)
        indices, rotation, translation = \
            indices[keep], rotation[keep], translation[keep]

        ratios = np.empty(len(indices))
        fractions = np.empty(len(indices))
        rmse = np.empty(len(indices))
        for k in range(len(indices)):
            moved = self.corr_ref @ rotation[k].T + translation[k]
            ratios[k] = np.mean(np.linalg.norm(moved - self.corr_scan, axis=1)
                                < params.ransac_inlier_threshold)
            distances, _ = self.scan_index.query(
                self.validation_points @ rotation[k].T + translation[k]
            )
            inliers = distances < params.ransac_inlier_threshold
            fractions[k] = inliers.mean()
            rmse[k] = np.sqrt(np.mean(distances[inliers] ** 2)) \
                if inliers.any() else np.inf
        return _Hypotheses(indices, rotation, translation, ratios, fractions,
                           rmse)

    def inlier_fraction(self, pose: Pose) -> float:
        distances, _ = self.scan_index.query(pose.apply(self.ref_points))
        return float(np.mean(distances < self.params.ransac_inlier_threshold))


def _required_iterations(ratio: float, confidence: float,
                         budget: int) -> int:
    if ratio <= 0:
        return budget
    if ratio >= 1:
        return 1
    estimate = np.log(1.0 - confidence) / np.log(1.0 - ratio ** 3)
    return int(min(budget, np.ceil(estimate)))


def ransac_register(scan: FeatureCloud, ref: FeatureCloud,
                    params: RegistrationParams, seed: int
                    ) -> Tuple[Pose, PointCloud, float]:
    """Coarse ref to scan alignment from 3-point feature correspondences.

    Hypothesis i draws its sample from the stream (seed, i). Hypotheses
    are evaluated in batches, possibly in parallel, and accepted strictly
    in index order, so the result does not depend on params.workers. All
    params.ransac_iterations hypotheses are drawn unless
    params.ransac_early_stop is set; then the run ends once the
    correspondence inlier ratio of the best hypothesis makes a better one
    unlikely at params.ransac_confidence.

    Raises:
        InsufficientCorrespondencesError: fewer than 3 keypoints on a side

    Returns:
        Tuple[Pose, PointCloud, float]: transform, ref keypoints moved into
            the scan frame, fraction of ref keypoints with a scan keypoint
            closer than the inlier threshold
    """
    if len(scan) < 3 or len(ref) < 3:
        raise InsufficientCorrespondencesError(
            "RANSAC needs 3 keypoints, got %i scan and %i ref."
            % (len(scan), len(ref))
        )
    problem = _RansacProblem(scan, ref, params, seed)
    limit = params.ransac_iterations
    best: Optional[Tuple[float, float, np.ndarray, np.ndarray]] = None
    start = 0
    with ThreadPoolExecutor(max_workers=params.workers) as executor:
        while start < limit:
            stop = min(limit, start + params.ransac_batch * params.workers)
            bounds = list(range(start, stop, params.ransac_batch)) + [stop]
            batches = list(executor.map(
                problem.evaluate, bounds[:-1], bounds[1:]
            ))
            for batch in batches:
                for k, index in enumerate(batch.index):
                    if index >= limit:
                        break
                    score = (batch.inlier_fraction[k], -batch.rmse[k])
                    if best is None or score > best[:2]:
                        best = (*score, batch.rotation[k],
                                batch.translation[k])
                        if not params.ransac_early_stop:
                            continue
                        limit = min(limit, _required_iterations(
                            batch.correspondence_ratio[k],
                            params.ransac_confidence,
                            params.ransac_iterations
                        ))
            start = stop
    if best is None:
        logger.warning("No RANSAC hypothesis survived prerejection.")
        pose = Pose.identity()
    else:
        pose = Pose.from_matrix(np.block([
            [best[2], best[3][:, None]], [np.zeros((1, 3)), np.ones((1, 1))]
        ]))
        pose = _refine(problem, pose, params.ransac_inlier_threshold)
    aligned = transform_cloud(ref.keypoints, pose)
    fraction = problem.inlier_fraction(pose)
    logger.debug("RANSAC stopped after %i hypotheses, inlier fraction %.3f.",
                 start, fraction)
    return pose, aligned, fraction


def _refine(problem: _RansacProblem, pose: Pose, threshold: float) -> Pose:
    """Kabsch fit over the spatial inliers of the winning hypothesis.
    """
    moved = pose.apply(problem.ref_points)
    distances, matches = problem.scan_index.query(moved)
    inliers = distances < threshold
    if inliers.sum() < 3:
        return pose
    step = kabsch(moved[inliers], problem.scan_points[matches[inliers]])
    return pose_compose(step, pose)


def icp_refine(scan: PointCloud, init_aligned_ref: PointCloud,
               params: RegistrationParams,
               init_pose: Optional[Pose] = None,
               trace: Optional[List[float]] = None) -> Tuple[float, Pose]:
    """Point-to-point ICP moving the coarsely aligned ref onto the scan.

    Args:
        scan (PointCloud): fixed cloud
        init_aligned_ref (PointCloud): ref already moved by init_pose
        params (RegistrationParams): iteration cap and pairing distance
        init_pose (Optional[Pose]): coarse pose, identity if omitted
        trace (Optional[List[float]]): receives the fitness of every
            iteration

    Raises:
        DivergenceError: fewer than 3 correspondences at an iteration

    Returns:
        Tuple[float, Pose]: mean squared correspondence distance at the
            final pose and the total ref to scan transform
    """
    if len(scan) == 0 or len(init_aligned_ref) == 0:
        raise InvalidArgumentError("ICP needs two non-empty clouds.")
    index = SpatialIndex(scan)
    moving = np.array(init_aligned_ref.points)
    increment = Pose.identity()

    def correspondences() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        distances, matches = index.query(moving)
        paired = distances <= params.icp_max_correspondence_dist
        if paired.sum() < 3:
            raise DivergenceError(
                "ICP kept %i correspondences." % paired.sum()
            )
        return distances, matches, paired

    for iteration in range(params.icp_max_iterations):
        distances, matches, paired = correspondences()
        if trace is not None:
            trace.append(float(np.mean(distances[paired] ** 2)))
        step = kabsch(moving[paired], index.points[matches[paired]])
        moving = step.apply(moving)
        increment = pose_compose(step, increment)
        if np.linalg.norm(step.position) < 1e-9 \
                and step.rotation.magnitude() < 1e-8:
            break
    distances, _, paired = correspondences()
    fitness = float(np.mean(distances[paired] ** 2))
    total = increment if init_pose is None \
        else pose_compose(increment, init_pose)
    logger.debug("ICP finished after %i iterations, fitness %.3e.",
                 iteration + 1, fitness)
    return fitness, total


def estimate_pose(scan: PointCloud, ref: PointCloud,
                  params: RegistrationParams, seed: int
                  ) -> RegistrationResult:
    """Pose of the reference object inside the scan.

    Repeats RANSAC, the orientation gate around params.q0 and ICP with a
    fresh seed per round, keeping the lowest ICP fitness, until the best
    fitness reaches params.rho_icp. Both the RANSAC and the refined
    orientation have to pass the gate.

    Raises:
        RegistrationFailedError: params.max_outer_loops rounds without
            reaching rho_icp, carrying the best result (or None)
    """
    scan_down = preprocess(scan, params)
    ref_down = preprocess(ref, params)
    scan_features = compute_features(scan_down, params.feature_radius,
                                     params.normal_neighbours)
    ref_features = compute_features(ref_down, params.feature_radius,
                                    params.normal_neighbours)
    q0 = np.asarray(params.q0)
    best_fitness = UNSET_FITNESS
    best: Optional[RegistrationResult] = None
    history: List[float] = []
    for loop in range(params.max_outer_loops):
        loop_seed = derive_seed(seed, loop)
        coarse, aligned, inlier_fraction = ransac_register(
            scan_features, ref_features, params, loop_seed
        )
        if quat_distance(coarse.orientation, q0) < params.rho_rot:
            try:
                fitness, refined = icp_refine(scan_down, aligned, params,
                                              coarse)
            except DivergenceError as e:
                logger.warning("ICP diverged in loop %i: %s", loop + 1, e)
            else:
                if quat_distance(refined.orientation, q0) < params.rho_rot \
                        and fitness < best_fitness:
                    best_fitness = fitness
                    best = RegistrationResult(refined, fitness, loop + 1,
                                              inlier_fraction)
        else:
            logger.debug("Loop %i: RANSAC orientation gated out.", loop + 1)
        history.append(best_fitness)
        if best is not None and best_fitness <= params.rho_icp:
            result = replace(best, outer_loops_used=loop + 1,
                             fitness_history=tuple(history))
            logger.debug("Registered in %i loops: %s", loop + 1,
                         repr(result))
            return result
    if best is not None:
        best = replace(best, outer_loops_used=params.max_outer_loops,
                       fitness_history=tuple(history))
    raise RegistrationFailedError(
        "Best fitness %.3e above %.3e after %i loops."
        % (best_fitness, params.rho_icp, params.max_outer_loops),
        best
    )

#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Sat Oct 17 2026

experiment harness: one trial per strategy, target setting, initial
configuration and seed

A trial teaches the insertion configuration (the plate is placed where the
arm actually put the tool), moves to an initial configuration and then
approaches the hole with one of the strategies:

    proprio_ic1      ik toward the approach pose biased to IC1
    proprio_ic2      the same biased to IC2
    laser_corrected  proprio_ic2, then scan, register plate and object and
                     correct relative to the current state, rescanning
                     on failure
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from logging import getLogger
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .arm import ProprioceptionError, SimulatedArm, ik
from .errors import (DegenerateApproachError, DegenerateFeatureError,
                     DivergenceError, InsufficientCorrespondencesError,
                     InvalidArgumentError,
                     PreprocessingDegenerateError, RegistrationFailedError,
                     UnreachableTargetError)
from .geom import PointCloud, Pose, transform_cloud
from .insertion import (InsertedObject, InsertionCheck, InsertionTarget,
                        check_insertion, execute_insertion,
                        plan_relative_trajectory)
from .meshio import write_ply
from .reports import ExperimentReport, TrialRecord
from .registration import RegistrationResult, estimate_pose
from .scansim import (CalibrationError, Scene, ScenePart, SurfaceModel,
                      TriangleMesh, plan_sweep, sample_mesh, sweep_scan_parts)
from .scenario import ReferenceConfig, ScenarioConfig
from .seeds import derive_seed

logger = getLogger(__file__)

# entropy tags of the streams derived from a trial seed
ARM_STREAM = 0
CALIBRATION_STREAM = 1
SCAN_STREAM = 2
TARGET_REGISTRATION_STREAM = 3
OBJECT_REGISTRATION_STREAM = 4
# entropy tag of the reference streams derived from the master seed
REFERENCE_STREAM = 1 << 20

# fewest points of a part scan worth registering
MIN_SCAN_POINTS = 100

REGISTRATION_ERRORS = (RegistrationFailedError, PreprocessingDegenerateError,
                       DegenerateFeatureError,
                       InsufficientCorrespondencesError, DivergenceError)


def make_reference_cloud(mesh_path: Union[str, Path, SurfaceModel],
                         target_count: int, seed: int,
                         output: Optional[Union[str, Path]] = None,
                         crop: Optional[Tuple[Sequence[float],
                                              Sequence[float]]] = None
                         ) -> PointCloud:
    """Sample a CAD model into a reference cloud.

    Args:
        mesh_path (Union[str, Path, SurfaceModel]): STL/OBJ file or a
            surface that tessellates
        target_count (int): points sampled before cropping
        seed (int): sampling seed
        output (Optional[Union[str, Path]]): PLY file to write
        crop (Optional[Tuple[Sequence[float], Sequence[float]]]): lower and
            upper corner of the kept sub-part

    Raises:
        OSError: unreadable mesh or unwritable output
        DegenerateMeshError: mesh without usable triangle
    """
    mesh = mesh_path if isinstance(mesh_path, SurfaceModel) \
        else TriangleMesh.from_file(mesh_path)
    cloud = sample_mesh(mesh, target_count, seed)
    if crop is not None:
        cloud = cloud.crop(*crop)
        logger.debug("Crop kept %i of %i points.", len(cloud), target_count)
    if output is not None:
        write_ply(cloud, output)
        logger.info("Wrote %i points to %s.", len(cloud), output)
    return cloud


@dataclass(frozen=True, eq=False)
class References:
    """Reference clouds of plate and object, each in its own part frame.
    """
    target: PointCloud
    held_object: PointCloud


def sweep_poses(cfg: ScenarioConfig) -> List[Pose]:
    """Sensor poses of the sweep across the recorded insertion pose.
    """
    p_ins = cfg.recorded_insertion_pose
    return plan_sweep(p_ins.position, p_ins.orientation, cfg.scanner,
                      cfg.sweep.view_tilt, cfg.sweep.length)


def build_scene(cfg: ScenarioConfig, hole_pose: Pose,
                tool_pose: Pose) -> Scene:
    return Scene(tuple(
        [ScenePart("target", cfg.target.surface, hole_pose),
         ScenePart("object", cfg.held_object.surface, tool_pose)]
        + [ScenePart(part.part_id, part.surface, part.pose)
           for part in cfg.extra_parts]
    ))


def _reference(cfg: ScenarioConfig, reference: ReferenceConfig,
               part: ScenePart, seed: int) -> PointCloud:
    if reference.source == "scan":
        clouds = sweep_scan_parts(Scene((part,)), sweep_poses(cfg),
                                  cfg.scanner, CalibrationError(), seed)
        cloud = transform_cloud(clouds[part.part_id], part.pose.inverse())
        if reference.crop is not None:
            cloud = cloud.crop(*reference.crop)
    else:
        mesh = part.surface if reference.source == "cad" \
            else reference.path
        cloud = make_reference_cloud(mesh, reference.count, seed,
                                     crop=reference.crop)
    logger.debug("Reference of %s: %i points from %s.", part.part_id,
                 len(cloud), reference.source)
    return cloud


def build_references(cfg: ScenarioConfig) -> References:
    """Reference clouds of the scenario, identical for every trial.

    Scanned references come from a sweep over the part alone at its nominal
    pose (plate at p_ins, object at the approach pose) without calibration
    error, mapped into the part frame.
    """
    target = _reference(
        cfg, cfg.target.reference,
        ScenePart("target", cfg.target.surface, cfg.recorded_insertion_pose),
        derive_seed(cfg.master_seed, REFERENCE_STREAM, cfg.setting, 0)
    )
    held_object = _reference(
        cfg, cfg.held_object.reference,
        ScenePart("object", cfg.held_object.surface, cfg.approach_pose()),
        derive_seed(cfg.master_seed, REFERENCE_STREAM, cfg.setting, 1)
    )
    return References(target, held_object)


def _check(cfg: ScenarioConfig, target: InsertionTarget,
           actual: Pose) -> InsertionCheck:
    obj = InsertedObject.from_tool_pose(actual, cfg.held_object.tip_radius)
    try:
        return check_insertion(obj, target)
    except DegenerateApproachError:
        return InsertionCheck(False, -np.inf, -np.inf, -np.inf, np.pi / 2,
                              np.inf)


class _Trial:
    """State of one running trial.
    """

    def __init__(self, cfg: ScenarioConfig, initial_index: int,
                 trial_seed: int) -> None:
        self.cfg = cfg
        self.seed = trial_seed
        model = cfg.arm.model
        error = ProprioceptionError.from_config(
            cfg.arm.error_model, model.dof,
            derive_seed(trial_seed, ARM_STREAM)
        )
        error.settle(cfg.arm.home_config)
        self.arm = SimulatedArm(model, error, cfg.arm.home_config)
        # teaching: the tool threads the hole where it actually is
        _, taught = self.arm.move(cfg.arm.ic1_config)
        self.hole_pose = taught if cfg.target.pose is None \
            else cfg.target.pose
        self.target = InsertionTarget.from_pose(
            self.hole_pose, cfg.target.semi_axes, cfg.target.thickness
        )
        self.arm.move(cfg.initial_configs[initial_index])
        logger.debug("Trial %i: hole at %s, start %i.", trial_seed,
                     self.hole_pose, initial_index)

    def approach(self, bias: np.ndarray) -> InsertionCheck:
        """Proprioceptive move to the approach pose.

        Raises:
            UnreachableTargetError: ik failed
        """
        q = ik(self.arm.model, self.cfg.approach_pose(), bias,
               self.arm.config, self.cfg.arm.ik)
        _, actual = self.arm.move(q)
        return _check(self.cfg, self.target, actual)

    def register(self, references: References, attempt: int
                 ) -> Tuple[RegistrationResult, RegistrationResult]:
        """Scan the scene from the current state and register plate and
        object.

        Raises:
            RegistrationFailedError: a part is missing from the scan or its
                registration failed the fitness gate
        """
        cfg = self.cfg
        calibration = CalibrationError.from_magnitudes(
            cfg.calibration.translation, cfg.calibration.angle,
            derive_seed(self.seed, CALIBRATION_STREAM)
        )
        clouds = sweep_scan_parts(
            build_scene(cfg, self.hole_pose, self.arm.actual),
            sweep_poses(cfg), cfg.scanner, calibration,
            derive_seed(self.seed, SCAN_STREAM, attempt)
        )
        logger.debug("Scan %i: %i plate and %i object points.", attempt,
                     len(clouds["target"]), len(clouds["object"]))
        for part_id in ("target", "object"):
            if len(clouds[part_id]) < MIN_SCAN_POINTS:
                raise RegistrationFailedError(
                    f"Scan {attempt} caught {len(clouds[part_id])} "
                    f"{part_id} points."
                )
        target = estimate_pose(
            clouds["target"], references.target,
            cfg.target_registration.with_q0(
                cfg.recorded_insertion_pose.orientation
            ),
            derive_seed(self.seed, TARGET_REGISTRATION_STREAM, attempt)
        )
        held_object = estimate_pose(
            clouds["object"], references.held_object,
            cfg.object_registration.with_q0(
                self.arm.reported_pose().orientation
            ),
            derive_seed(self.seed, OBJECT_REGISTRATION_STREAM, attempt)
        )
        return target, held_object

    def correct(self, target: RegistrationResult,
                held_object: RegistrationResult) -> InsertionCheck:
        """Move the object by the registered object to approach offset.
        """
        cfg = self.cfg
        hole = target.pose
        p_target = Pose(hole.position
                        - cfg.motion.approach_standoff * hole.axis(2),
                        hole.orientation)
        trajectory = plan_relative_trajectory(
            held_object.pose, p_target, cfg.motion.steps,
            cfg.motion.duration
        )
        actual, _ = execute_insertion(self.arm, trajectory,
                                      cfg.arm.ic2_config, cfg.arm.ik)
        return _check(cfg, self.target, actual)


def _laser_corrected(trial: _Trial, references: References,
                     record: dict) -> None:
    check = trial.approach(trial.cfg.arm.ic2_config)
    record.update(margin=check.margin, miss_distance=check.miss_distance)
    if check.success:
        record.update(success=True, raw_success=True, cause=None)
        return
    for attempt in range(trial.cfg.rescan_retries + 1):
        record["retries_used"] = attempt
        if attempt > 0:
            logger.warning("Trial %i: rescanning after %s.", trial.seed,
                           record["cause"])
        try:
            target, held_object = trial.register(references, attempt)
        except REGISTRATION_ERRORS as e:
            best = getattr(e, "best", None)
            logger.debug("Registration failed: %s", e)
            record.update(cause="registration_failed",
                          target_fitness=None if best is None
                          else best.fitness)
            continue
        record.update(target_fitness=target.fitness,
                      object_fitness=held_object.fitness)
        try:
            check = trial.correct(target, held_object)
        except UnreachableTargetError as e:
            logger.debug("Correction unreachable: %s", e)
            record["cause"] = "unreachable"
            continue
        record.update(margin=check.margin, miss_distance=check.miss_distance)
        if check.success:
            record.update(success=True, raw_success=attempt == 0, cause=None)
            return
        record["cause"] = "miss"


def derive_trial_seed(cfg: ScenarioConfig, setting: int,
                      initial_index: int, trial: int) -> int:
    """Seed of a trial of the experiment over cfg.
    """
    return derive_seed(cfg.master_seed, setting, initial_index, trial)


def run_trial(cfg: ScenarioConfig, initial_index: int, trial_seed: int,
              strategy: Optional[str] = None, trial: int = 0,
              references: Optional[References] = None) -> TrialRecord:
    """One full pipeline pass.

    The trial seed alone determines the outcome, so a record's seed replays
    it bit-exactly. Failures are returned as records with their cause.

    Args:
        cfg (ScenarioConfig): scenario at one target setting
        initial_index (int): index into cfg.initial_configs
        trial_seed (int): seed of the trial
        strategy (Optional[str]): strategy, the first of cfg.strategies if
            omitted
        trial (int): trial number stored in the record
        references (Optional[References]): prebuilt reference clouds
    """
    strategy = strategy or cfg.strategies[0]
    if strategy not in cfg.strategies:
        raise InvalidArgumentError(f"Unknown strategy '{strategy}'.")
    state = _Trial(cfg, initial_index, trial_seed)
    record = dict(strategy=strategy, initial_index=initial_index,
                  trial=trial, seed=trial_seed, success=False,
                  raw_success=False, cause="unreachable",
                  setting=cfg.setting)
    try:
        if strategy == "laser_corrected":
            _laser_corrected(state, references or build_references(cfg),
                             record)
        else:
            bias = cfg.arm.ic1_config if strategy == "proprio_ic1" \
                else cfg.arm.ic2_config
            check = state.approach(bias)
            record.update(success=check.success, raw_success=check.success,
                          cause=None if check.success else "miss",
                          margin=check.margin,
                          miss_distance=check.miss_distance)
    except UnreachableTargetError as e:
        logger.debug("Trial %i unreachable: %s", trial_seed, e)
    result = TrialRecord(**record)
    logger.info("%s setting %i #%i seed %i: %s", strategy, cfg.setting,
                initial_index + 1, trial_seed, "success" if result.success
                else f"failure ({result.cause})")
    return result


def run_experiment(cfg: ScenarioConfig,
                   workers: Optional[int] = None) -> ExperimentReport:
    """All trials of the scenario: every strategy on every target setting
    and initial configuration, cfg.trials times each.

    Trial seeds derive from (master seed, setting, initial index, trial),
    so all strategies meet the same arm instances. The report does not
    depend on the number of workers.
    """
    workers = workers or cfg.workers
    views = cfg.setting_configs()
    references = [
        build_references(view) if "laser_corrected" in cfg.strategies
        else None
        for view in views
    ]
    jobs = [
        (strategy, setting, index, trial,
         derive_trial_seed(cfg, setting, index, trial))
        for strategy in cfg.strategies
        for setting, view in enumerate(views)
        for index in range(len(view.initial_configs))
        for trial in range(cfg.trials)
    ]
    logger.info("Running %i trials of '%s' on %i workers.", len(jobs),
                cfg.name, workers)

    def run(job: Tuple[str, int, int, int, int]) -> TrialRecord:
        strategy, setting, index, trial, seed = job
        return run_trial(views[setting], index, seed, strategy, trial,
                         references[setting])

    with ThreadPoolExecutor(max_workers=workers) as executor:
        records = list(executor.map(run, jobs))
    report = ExperimentReport(cfg.name, cfg.config_hash, cfg.master_seed,
                              records, cfg.setting_names)
    logger.info("Finished '%s':\n%s", cfg.name, report.get_summary())
    return report

#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Fri Oct 16 2026

scenario files: scene, arm, scanner and registration settings of one
insertion experiment

Scenario files are JSON objects. Lengths are meters, angles radians and
quaternions (w, x, y, z). Relative file paths are resolved against the
directory of the scenario file. See docs/scenario.schema.json.
"""
from __future__ import annotations
from dataclasses import dataclass, field, fields, replace
from hashlib import sha256
from json import JSONDecodeError, dumps as jsondumps, load as jsonload
from logging import getLogger
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .arm import (ArmModel, ErrorModelConfig, IkParams, PANDA_MDH,
                  PANDA_TOOL, fk, generate_initial_configs, ik)
from .errors import ConfigError, LaserInsertError
from .geom import Pose
from .registration import RegistrationParams
from .scansim import (Box, CompositeSurface, Cylinder, EyePlate,
                      ScannerConfig, Sphere, SurfaceModel, TriangleMesh)

logger = getLogger(__file__)

STRATEGIES = ("proprio_ic1", "proprio_ic2", "laser_corrected")
REFERENCE_SOURCES = ("scan", "cad", "mesh")
# ready pose of the Panda, the arm rests there before teaching
PANDA_HOME = (0.0, -np.pi / 4, 0.0, -3 * np.pi / 4, 0.0, np.pi / 2, np.pi / 4)


def _check_keys(data: Any, allowed, where: str,
                required=()) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object.")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}.")
    missing = sorted(set(required) - set(data))
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}.")
    return data


def _dataclass_section(cls, data: Any, where: str):
    """Build a parameter dataclass from its JSON section.
    """
    data = _check_keys(data, [f.name for f in fields(cls)], where)
    try:
        return cls.from_dict(data)
    except (LaserInsertError, TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def _pose(data: Any, where: str) -> Pose:
    data = _check_keys(data, ["position", "orientation"], where,
                       ["position", "orientation"])
    try:
        return Pose.from_dict(data)
    except (LaserInsertError, TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def _vector(data: Any, length: int, where: str) -> np.ndarray:
    try:
        vector = np.array(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e
    if vector.shape != (length,) or not np.all(np.isfinite(vector)):
        raise ConfigError(f"{where} must hold {length} finite numbers.")
    return vector


@dataclass
class ReferenceConfig:
    """Where the reference cloud of a part comes from.

    Args:
        source (str): "scan" (a-priori scan of the part alone at its
            nominal pose), "cad" (sampled tessellation of the part) or
            "mesh" (sampled STL/OBJ file in the part frame)
        count (int): sample count of cad and mesh references
        path (Optional[Path]): mesh file of the "mesh" source
        crop (Optional[Tuple[np.ndarray, np.ndarray]]): lower and upper
            corner of the kept box, part frame
    """
    source: str = "scan"
    count: int = 20000
    path: Optional[Path] = None
    crop: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        if self.source not in REFERENCE_SOURCES:
            raise ConfigError(f"Unknown reference source '{self.source}'.")
        if self.count < 1:
            raise ConfigError("Reference count must be at least 1.")
        if (self.source == "mesh") != (self.path is not None):
            raise ConfigError("Exactly mesh references need a path.")
        if self.crop is not None and np.any(self.crop[0] > self.crop[1]):
            raise ConfigError("Crop box lower corner exceeds the upper.")

    @classmethod
    def from_dict(cls, data: Any, base_dir: Path) -> ReferenceConfig:
        data = _check_keys(data, ["source", "count", "path", "crop"],
                           "reference")
        crop = None
        if data.get("crop") is not None:
            box = _check_keys(data["crop"], ["lower", "upper"], "crop",
                              ["lower", "upper"])
            crop = (_vector(box["lower"], 3, "crop.lower"),
                    _vector(box["upper"], 3, "crop.upper"))
        path = data.get("path")
        return cls(data.get("source", "scan"), int(data.get("count", 20000)),
                   None if path is None else base_dir / path, crop)


@dataclass
class TargetConfig:
    """Plate with the elliptical hole, placed with its hole frame at the
    actual tool pose taught at the insertion configuration unless a pose
    is given.
    """
    width: float
    height: float
    thickness: float
    semi_axes: Tuple[float, float]
    hole_offset: float = 0.0
    pose: Optional[Pose] = None
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)

    def __post_init__(self):
        self.surface = EyePlate(self.width, self.height, self.thickness,
                                tuple(self.semi_axes), self.hole_offset)
        if self.reference.source == "cad":
            raise ConfigError("The plate has no tessellation, use a scan "
                              "or a mesh reference.")

    @classmethod
    def from_dict(cls, data: Any, base_dir: Path) -> TargetConfig:
        keys = ["width", "height", "thickness", "semi_axes", "hole_offset",
                "pose", "reference"]
        data = _check_keys(data, keys, "target", keys[:4])
        return cls(
            float(data["width"]), float(data["height"]),
            float(data["thickness"]),
            tuple(_vector(data["semi_axes"], 2, "target.semi_axes")),
            float(data.get("hole_offset", 0.0)),
            None if data.get("pose") is None
            else _pose(data["pose"], "target.pose"),
            ReferenceConfig.from_dict(data.get("reference", {}), base_dir)
        )


@dataclass
class ObjectConfig:
    """Held object in the tool frame: a cylinder (thread or plug) whose
    tip sits on the tool point and which extends along -z, and an
    optional holder box standing for the gripper finger.
    """
    radius: float
    length: float
    holder_half_extents: Optional[Tuple[float, float, float]] = None
    holder_offset: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)

    def __post_init__(self):
        body = Cylinder(self.radius, self.length / 2)
        components = [(body, Pose([0.0, 0.0, -self.length / 2]))]
        if self.holder_half_extents is not None:
            components.append((Box(tuple(self.holder_half_extents)),
                               Pose(self.holder_offset)))
        self.surface = CompositeSurface(tuple(components))

    @property
    def tip_radius(self) -> float:
        return self.radius

    @classmethod
    def from_dict(cls, data: Any, base_dir: Path) -> ObjectConfig:
        data = _check_keys(data, ["radius", "length", "holder", "reference"],
                           "object", ["radius", "length"])
        half_extents, offset = None, (0.0, 0.0, 0.0)
        if data.get("holder") is not None:
            holder = _check_keys(data["holder"], ["half_extents", "offset"],
                                 "object.holder", ["half_extents"])
            half_extents = tuple(_vector(holder["half_extents"], 3,
                                         "object.holder.half_extents"))
            offset = tuple(_vector(holder.get("offset", [0.0] * 3), 3,
                                   "object.holder.offset"))
        return cls(float(data["radius"]), float(data["length"]),
                   half_extents, offset,
                   ReferenceConfig.from_dict(data.get("reference", {}),
                                             base_dir))


def _box(data: Dict[str, Any], base_dir: Path) -> SurfaceModel:
    return Box(tuple(_vector(data["half_extents"], 3, "half_extents")))


def _cylinder(data: Dict[str, Any], base_dir: Path) -> SurfaceModel:
    return Cylinder(float(data["radius"]), float(data["half_length"]))


def _sphere(data: Dict[str, Any], base_dir: Path) -> SurfaceModel:
    return Sphere(float(data["radius"]))


def _mesh(data: Dict[str, Any], base_dir: Path) -> SurfaceModel:
    return TriangleMesh.from_file(base_dir / data["path"])


REGISTERED_SHAPES: Dict[str, Tuple[Callable, List[str]]] = {
    "box": (_box, ["half_extents"]),
    "cylinder": (_cylinder, ["radius", "half_length"]),
    "sphere": (_sphere, ["radius"]),
    "mesh": (_mesh, ["path"])
}


@dataclass
class ExtraPart:
    """Static part that shows up in scans but takes no part in the
    insertion, e.g. a fixture next to the plate.
    """
    part_id: str
    surface: SurfaceModel
    pose: Pose

    @classmethod
    def from_dict(cls, data: Any, base_dir: Path) -> ExtraPart:
        if not isinstance(data, dict) or data.get("shape") \
                not in REGISTERED_SHAPES:
            raise ConfigError("Extra parts need a shape out of %s."
                              % sorted(REGISTERED_SHAPES))
        builder, keys = REGISTERED_SHAPES[data["shape"]]
        where = "extra part '%s'" % data.get("id")
        data = _check_keys(data, ["id", "shape", "pose"] + keys, where,
                           ["id", "pose"] + keys)
        if data["id"] in ("target", "object"):
            raise ConfigError(f"{where}: id is reserved.")
        try:
            surface = builder(data, base_dir)
        except (LaserInsertError, TypeError, ValueError) as e:
            raise ConfigError(f"{where}: {e}") from e
        return cls(str(data["id"]), surface, _pose(data["pose"], where))


@dataclass
class ArmConfig:
    """Arm kinematics, error model and the taught configurations.

    Args:
        insertion_config (np.ndarray): IC1, configuration taught at the
            insertion pose
        ic2_joint1_shift (float): joint 1 shift of IC1 that IC2 is adapted
            from while keeping the IC1 tool pose
        home_config (np.ndarray): rest configuration before teaching
        dh_file (Optional[Path]): modified-DH table, Panda if omitted
        base_pose (Pose): arm base in the world frame
        tool (Optional[Pose]): tool point in the flange frame
        error_model (ErrorModelConfig): proprioception error parameters
        ik (IkParams): inverse kinematics settings
    """
    insertion_config: np.ndarray
    ic2_joint1_shift: float = np.pi / 2
    home_config: np.ndarray = field(
        default_factory=lambda: np.array(PANDA_HOME)
    )
    dh_file: Optional[Path] = None
    base_pose: Pose = field(default_factory=Pose)
    tool: Optional[Pose] = None
    error_model: ErrorModelConfig = field(default_factory=ErrorModelConfig)
    ik: IkParams = field(default_factory=IkParams)

    def __post_init__(self):
        try:
            if self.dh_file is None:
                self.model = ArmModel.from_file(
                    PANDA_MDH, self.base_pose,
                    PANDA_TOOL if self.tool is None else self.tool
                )
            else:
                self.model = ArmModel.from_file(self.dh_file, self.base_pose,
                                                self.tool)
            self.insertion_config = self.model.check_config(
                self.insertion_config
            )
            self.home_config = self.model.check_config(self.home_config)
        except LaserInsertError as e:
            raise ConfigError(f"arm: {e}") from e
        for name in ("insertion_config", "home_config"):
            if not self.model.within_limits(getattr(self, name)):
                raise ConfigError(f"arm: {name} outside the joint limits.")
        shifted = np.array(self.insertion_config)
        shifted[0] += self.ic2_joint1_shift
        if not self.model.within_limits(shifted):
            raise ConfigError("arm: shifted IC1 outside the joint limits.")
        # IC2 reaches the IC1 pose, adapted from the shifted configuration
        try:
            self.ic2_config = ik(self.model,
                                 fk(self.model, self.insertion_config),
                                 shifted, self.insertion_config, self.ik)
        except LaserInsertError as e:
            raise ConfigError(f"arm: no IC2 configuration, {e}") from e
        logger.debug("IC2 configuration %s.",
                     np.array2string(self.ic2_config, precision=4))

    @property
    def ic1_config(self) -> np.ndarray:
        return self.insertion_config

    @classmethod
    def from_dict(cls, data: Any, base_dir: Path) -> ArmConfig:
        keys = ["insertion_config", "ic2_joint1_shift", "home_config",
                "dh_file", "base_pose", "tool", "error_model", "ik"]
        data = _check_keys(data, keys, "arm", ["insertion_config"])
        return cls(
            np.array(data["insertion_config"], dtype=float),
            float(data.get("ic2_joint1_shift", np.pi / 2)),
            np.array(data.get("home_config", PANDA_HOME), dtype=float),
            None if data.get("dh_file") is None
            else base_dir / data["dh_file"],
            Pose() if data.get("base_pose") is None
            else _pose(data["base_pose"], "arm.base_pose"),
            None if data.get("tool") is None
            else _pose(data["tool"], "arm.tool"),
            _dataclass_section(ErrorModelConfig,
                               data.get("error_model", {}),
                               "arm.error_model"),
            _dataclass_section(IkParams, data.get("ik", {}), "arm.ik")
        )


@dataclass
class SweepConfig:
    """Scanner sweep over the hole: ray tilt against the hole axis and
    swept distance.
    """
    view_tilt: float = np.pi / 4
    length: float = 2e-3

    def __post_init__(self):
        if not 0 <= self.view_tilt < np.pi / 2 or self.length < 0:
            raise ConfigError("Sweep needs a tilt in [0, pi/2) and a "
                              "non-negative length.")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> SweepConfig:
        return cls(**data)


@dataclass
class CalibrationConfig:
    """Magnitudes of the sensor mounting error, drawn per trial along
    random directions.
    """
    translation: float = 0.0
    angle: float = 0.0

    def __post_init__(self):
        if self.translation < 0 or self.angle < 0:
            raise ConfigError("Calibration error must not be negative.")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> CalibrationConfig:
        return cls(**data)


@dataclass
class MotionConfig:
    """Approach and corrective trajectory settings.

    Args:
        approach_standoff (float): distance of the commanded tip before the
            hole entry, along the insertion axis
        steps (int): waypoints of a corrective trajectory
        duration (float): duration of a corrective trajectory, seconds
    """
    approach_standoff: float = 1e-3
    steps: int = 50
    duration: float = 2.0

    def __post_init__(self):
        if self.approach_standoff < 0 or self.steps < 2 \
                or not self.duration > 0:
            raise ConfigError("Invalid motion settings.")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> MotionConfig:
        return cls(**data)


@dataclass
class TargetSetting:
    """One pose of the target, taught with its own insertion
    configuration before its trials run.

    Args:
        name (str): setting name used in reports
        insertion_config (np.ndarray): IC1 of this setting
        initial_configs (List[np.ndarray]): start configurations of this
            setting
        recorded_insertion_pose (Optional[Pose]): p_ins of this setting
        target_pose (Optional[Pose]): fixed plate pose, the taught tool
            pose if omitted
    """
    name: str
    insertion_config: np.ndarray
    initial_configs: List[np.ndarray]
    recorded_insertion_pose: Optional[Pose] = None
    target_pose: Optional[Pose] = None


def _target_setting(data: Any, index: int, scenario: Dict[str, Any],
                    arm: ArmConfig, recorded: Optional[Pose],
                    target_pose: Optional[Pose]) -> TargetSetting:
    """Setting entry of a scenario file. Entries inherit what they do not
    name, the recorded insertion pose and the plate pose only while they
    keep the scenario's insertion configuration.
    """
    where = f"settings[{index}]"
    data = _check_keys(data, ["name", "insertion_config",
                              "recorded_insertion_pose", "target_pose",
                              "initial_configs"], where, ["name"])
    if "insertion_config" in data:
        arm = replace(arm, insertion_config=np.array(
            data["insertion_config"], dtype=float
        ))
        recorded = target_pose = None
    if data.get("recorded_insertion_pose") is not None:
        recorded = _pose(data["recorded_insertion_pose"],
                         f"{where}.recorded_insertion_pose")
    if data.get("target_pose") is not None:
        target_pose = _pose(data["target_pose"], f"{where}.target_pose")
    return TargetSetting(
        str(data["name"]), arm.insertion_config,
        _initial_configs(data.get("initial_configs",
                                  scenario["initial_configs"]),
                         arm, recorded),
        recorded, target_pose
    )


@dataclass
class ScenarioConfig:
    """One insertion experiment.

    Args:
        name (str): scenario name
        arm (ArmConfig): arm and its taught configurations
        target (TargetConfig): plate with the hole
        held_object (ObjectConfig): inserted object
        initial_configs (List[np.ndarray]): start configurations ordered by
            strictly increasing tip distance from the insertion pose
        strategies (Tuple[str, ...]): strategies to run
        trials (int): trials per strategy and initial configuration
        master_seed (int): seed every trial seed derives from
        rescan_retries (int): extra scan and correction rounds of a failed
            laser-corrected trial
        workers (int): trials run in parallel
        extra_parts (List[ExtraPart]): further static parts in the scene
        scanner (ScannerConfig): laser line scanner
        calibration (CalibrationConfig): sensor mounting error
        sweep (SweepConfig): sweep geometry
        target_registration (RegistrationParams): plate registration
        object_registration (RegistrationParams): object registration
        motion (MotionConfig): approach and trajectory settings
        recorded_insertion_pose (Optional[Pose]): p_ins, the reported tool
            pose at IC1 if omitted
        config_hash (str): sha256 of the canonical scenario JSON
        settings (List[TargetSetting]): target settings the experiment
            runs on, the scenario alone if empty
        setting (int): index of the setting this configuration describes
    """
    name: str
    arm: ArmConfig
    target: TargetConfig
    held_object: ObjectConfig
    initial_configs: List[np.ndarray]
    strategies: Tuple[str, ...] = STRATEGIES
    trials: int = 10
    master_seed: int = 0
    rescan_retries: int = 1
    workers: int = 1
    extra_parts: List[ExtraPart] = field(default_factory=list)
    scanner: ScannerConfig = field(default_factory=ScannerConfig)
    calibration: CalibrationConfig = field(
        default_factory=CalibrationConfig
    )
    sweep: SweepConfig = field(default_factory=SweepConfig)
    target_registration: RegistrationParams = field(
        default_factory=RegistrationParams
    )
    object_registration: RegistrationParams = field(
        default_factory=RegistrationParams
    )
    motion: MotionConfig = field(default_factory=MotionConfig)
    recorded_insertion_pose: Optional[Pose] = None
    config_hash: str = ""
    settings: List[TargetSetting] = field(default_factory=list)
    setting: int = 0

    def __post_init__(self):
        names = [setting.name for setting in self.settings]
        if len(set(names)) != len(names):
            raise ConfigError(f"Setting names must be unique: {names}.")
        self.strategies = tuple(self.strategies)
        unknown = sorted(set(self.strategies) - set(STRATEGIES))
        if unknown or not self.strategies:
            raise ConfigError(f"Unknown or no strategies: {unknown}.")
        if self.trials < 1 or self.workers < 1 or self.rescan_retries < 0:
            raise ConfigError("Need trials >= 1, workers >= 1 and "
                              "rescan_retries >= 0.")
        if self.master_seed < 0:
            raise ConfigError("Master seed must not be negative.")
        model = self.arm.model
        if self.recorded_insertion_pose is None:
            self.recorded_insertion_pose = fk(model, self.arm.ic1_config)
        else:
            try:
                self.arm.insertion_config = ik(
                    model, self.recorded_insertion_pose,
                    self.arm.ic1_config, self.arm.ic1_config, self.arm.ik
                )
            except LaserInsertError as e:
                raise ConfigError(
                    f"Recorded insertion pose not reachable: {e}"
                ) from e
        if not self.initial_configs:
            raise ConfigError("Need at least one initial configuration.")
        configs = []
        for index, q in enumerate(self.initial_configs):
            q = np.asarray(q, dtype=float)
            if q.shape != (model.dof,) or not model.within_limits(q):
                raise ConfigError(
                    f"Initial configuration {index} is invalid."
                )
            configs.append(q)
        self.initial_configs = configs
        distances = self.initial_distances()
        if np.any(np.diff(distances) <= 0):
            raise ConfigError(
                "Initial configurations must lie at strictly increasing tip "
                "distance from the insertion pose: %s"
                % np.array2string(distances, precision=4)
            )
        logger.debug("Loaded scenario '%s' (%s).", self.name,
                     self.config_hash[:12])

    def initial_distances(self) -> np.ndarray:
        """Tip distance of every initial configuration from p_ins.
        """
        return np.array([
            np.linalg.norm(fk(self.arm.model, q).position
                           - self.recorded_insertion_pose.position)
            for q in self.initial_configs
        ])

    def approach_pose(self) -> Pose:
        """p_ins backed off by the approach standoff along the tool axis.
        """
        p_ins = self.recorded_insertion_pose
        return Pose(p_ins.position
                    - self.motion.approach_standoff * p_ins.axis(2),
                    p_ins.orientation)

    @property
    def setting_names(self) -> List[str]:
        return [setting.name for setting in self.settings] or [self.name]

    def for_setting(self, index: int) -> ScenarioConfig:
        """The scenario taught at one target setting.

        Raises:
            IndexError: no such setting
            ConfigError: setting inconsistent with the scenario
        """
        setting = self.settings[index]
        return replace(
            self,
            arm=replace(self.arm, insertion_config=setting.insertion_config),
            target=replace(self.target, pose=setting.target_pose),
            initial_configs=setting.initial_configs,
            recorded_insertion_pose=setting.recorded_insertion_pose,
            settings=[],
            setting=index
        )

    def setting_configs(self) -> List[ScenarioConfig]:
        """One configuration per target setting, the scenario itself if it
        names none.
        """
        return [self.for_setting(index)
                for index in range(len(self.settings))] or [self]

    @classmethod
    def from_dict(cls, data: Any, base_dir: Union[str, Path] = "."
                  ) -> ScenarioConfig:
        keys = ["name", "master_seed", "trials", "strategies",
                "rescan_retries", "workers", "arm", "initial_configs",
                "recorded_insertion_pose", "target", "object",
                "extra_parts", "scanner", "calibration_error", "sweep",
                "registration", "motion", "settings"]
        data = _check_keys(data, keys, "scenario",
                           ["name", "arm", "initial_configs", "target",
                            "object"])
        base_dir = Path(base_dir)
        digest = sha256(jsondumps(data, sort_keys=True,
                                  separators=(",", ":")).encode()).hexdigest()
        try:
            arm = ArmConfig.from_dict(data["arm"], base_dir)
            target = TargetConfig.from_dict(data["target"], base_dir)
            registration = _check_keys(data.get("registration", {}),
                                       ["target", "object"], "registration")
            recorded = None if data.get("recorded_insertion_pose") is None \
                else _pose(data["recorded_insertion_pose"],
                           "recorded_insertion_pose")
            settings = data.get("settings", [])
            if not isinstance(settings, list):
                raise ConfigError("settings: expected a list.")
            cfg = cls(
                name=str(data["name"]),
                arm=arm,
                target=target,
                held_object=ObjectConfig.from_dict(data["object"], base_dir),
                initial_configs=_initial_configs(data["initial_configs"],
                                                 arm, recorded),
                strategies=tuple(data.get("strategies", STRATEGIES)),
                trials=int(data.get("trials", 10)),
                master_seed=int(data.get("master_seed", 0)),
                rescan_retries=int(data.get("rescan_retries", 1)),
                workers=int(data.get("workers", 1)),
                extra_parts=[ExtraPart.from_dict(part, base_dir)
                             for part in data.get("extra_parts", [])],
                scanner=_dataclass_section(ScannerConfig,
                                           data.get("scanner", {}),
                                           "scanner"),
                calibration=_dataclass_section(
                    CalibrationConfig, data.get("calibration_error", {}),
                    "calibration_error"
                ),
                sweep=_dataclass_section(SweepConfig, data.get("sweep", {}),
                                         "sweep"),
                target_registration=_dataclass_section(
                    RegistrationParams, registration.get("target", {}),
                    "registration.target"
                ),
                object_registration=_dataclass_section(
                    RegistrationParams, registration.get("object", {}),
                    "registration.object"
                ),
                motion=_dataclass_section(MotionConfig,
                                          data.get("motion", {}), "motion"),
                recorded_insertion_pose=recorded,
                config_hash=digest,
                settings=[
                    _target_setting(entry, index, data, arm, recorded,
                                    target.pose)
                    for index, entry in enumerate(settings)
                ]
            )
            for index, setting in enumerate(cfg.settings):
                view = cfg.for_setting(index)
                logger.debug("Setting '%s' at %s.", setting.name,
                             view.recorded_insertion_pose)
            return cfg
        except ConfigError:
            raise
        except (LaserInsertError, TypeError, ValueError, KeyError) as e:
            raise ConfigError(f"Invalid scenario: {e}") from e

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> ScenarioConfig:
        """Load a scenario file.

        Raises:
            OSError: file not readable
            ConfigError: not JSON or not a valid scenario
        """
        path = Path(path)
        with open(path) as file_handler:
            try:
                data = jsonload(file_handler)
            except JSONDecodeError as e:
                raise ConfigError(f"{path}: {e}") from e
        logger.info("Reading scenario %s.", path)
        return cls.from_dict(data, path.parent)


def _initial_configs(data: Any, arm: ArmConfig,
                     recorded: Optional[Pose]) -> List[np.ndarray]:
    """Explicit list of configurations or a generation request
    {"generate": {"seed": ..., "distances": [...]}}.
    """
    if isinstance(data, list):
        return [np.array(q, dtype=float) for q in data]
    data = _check_keys(data, ["generate"], "initial_configs", ["generate"])
    request = _check_keys(data["generate"], ["seed", "distances"],
                          "initial_configs.generate", ["seed"])
    origin = arm.ic1_config if recorded is None else ik(
        arm.model, recorded, arm.ic1_config, arm.ic1_config, arm.ik
    )
    return generate_initial_configs(arm.model, origin, int(request["seed"]),
                                    request.get("distances"))

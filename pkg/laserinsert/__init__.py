from .geom import Pose, PointCloud, SpatialIndex, quat_distance, kabsch
from .scansim import (Box, CalibrationError, CompositeSurface, Cylinder,
                      EyePlate, Scene, ScenePart, ScannerConfig, Sphere,
                      TriangleMesh, sample_mesh, sweep_scan)
from .registration import RegistrationParams, RegistrationResult, \
    estimate_pose
from .arm import ArmModel, ProprioceptionError, fk, ik
from .insertion import (InsertedObject, InsertionTarget, check_insertion,
                        execute_insertion, plan_relative_trajectory)
from .scenario import ScenarioConfig
from .reports import ExperimentReport, TrialRecord
from .bench import make_reference_cloud, run_experiment, run_trial

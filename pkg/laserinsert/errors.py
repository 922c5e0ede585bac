#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Mon Oct 12 2026

exceptions raised by the insertion pipeline
"""
from typing import Any, Optional


class LaserInsertError(Exception):
    """Base class of all pipeline errors.
    """


class InvalidArgumentError(LaserInsertError, ValueError):
    """Argument violates a documented precondition.
    """


class DegenerateMeshError(InvalidArgumentError):
    """Mesh has no usable (non-degenerate) triangle.
    """


class PreprocessingDegenerateError(LaserInsertError):
    """Filtering removed every point of a cloud.
    """


class DegenerateFeatureError(LaserInsertError):
    """Feature radius too small for the local point spacing.
    """


class InsufficientCorrespondencesError(LaserInsertError):
    """Fewer than three keypoints to hypothesise a rigid transform from.
    """


class DivergenceError(LaserInsertError):
    """ICP lost every correspondence.
    """


class RegistrationFailedError(LaserInsertError):
    """Outer registration loop exhausted without reaching the fitness
    threshold.

    Args:
        message (str): error message
        best (Optional[Any]): best RegistrationResult found so far, None if
            every hypothesis was gated out
    """

    def __init__(self, message: str, best: Optional[Any] = None) -> None:
        super().__init__(message)
        self.best = best


class UnreachableTargetError(LaserInsertError):
    """Inverse kinematics did not converge.

    Args:
        message (str): error message
        waypoint (Optional[int]): index of the trajectory waypoint, if raised
            while tracking a trajectory
    """

    def __init__(self, message: str, waypoint: Optional[int] = None) -> None:
        super().__init__(message)
        self.waypoint = waypoint


class LimitViolationError(UnreachableTargetError):
    """Inverse kinematics could only converge outside the joint limits.
    """


class DegenerateApproachError(LaserInsertError):
    """Tip ray runs parallel to the hole plane.
    """


class ConfigError(LaserInsertError):
    """Scenario or parameter file is invalid.
    """

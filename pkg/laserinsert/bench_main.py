#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Sat Oct 17 2026

command line entry point of the insertion bench

    python -m laserinsert.bench_main run data/scenarios/needle.json
"""
from argparse import ArgumentParser, ArgumentTypeError
from json import dump as jsondump, load as jsonload
from logging import DEBUG, INFO, Formatter, getLogger, StreamHandler
from pathlib import Path
import sys
from sys import exit as sysexit
from typing import List, Optional

from .bench import (REGISTRATION_ERRORS, build_scene, derive_trial_seed,
                    make_reference_cloud, run_experiment, run_trial,
                    sweep_poses)
from .errors import ConfigError, InvalidArgumentError, LaserInsertError
from .meshio import read_ply, write_ply
from .registration import RegistrationParams, estimate_pose
from .scansim import CalibrationError, sweep_scan, sweep_scan_parts
from .scenario import STRATEGIES, ScenarioConfig
from .seeds import derive_seed

logger = getLogger(__file__)


def existing_path(value: str) -> Path:
    path = Path(value)
    if not path.exists():
        raise ArgumentTypeError(f"File {value} does not exist.")
    return path


def setup_logging(debug: bool) -> None:
    logger = getLogger()
    handler = StreamHandler()
    handler.setFormatter(
        Formatter(
            "[%(asctime)s] %(levelname)s "
            "[%(name)s.%(funcName)s:%(lineno)d] %(message)s",
            datefmt="%d/%b/%Y %H:%M:%S",
        )
    )
    logger.addHandler(handler)
    logger.setLevel(DEBUG if debug else INFO)


def _setting(args) -> ScenarioConfig:
    """Scenario of the command at the requested target setting.
    """
    cfg = ScenarioConfig.from_file(args.scenario)
    if not cfg.settings and args.setting == 0:
        return cfg
    if not 0 <= args.setting < len(cfg.settings):
        raise InvalidArgumentError(
            f"No setting {args.setting}, the scenario has "
            f"{len(cfg.settings)}."
        )
    return cfg.for_setting(args.setting)


def scan(args) -> None:
    """Sweep the scenario scene with plate and object at their nominal
    poses.
    """
    cfg = _setting(args)
    calibration = CalibrationError.from_magnitudes(
        cfg.calibration.translation, cfg.calibration.angle,
        derive_seed(args.seed, 1)
    )
    scene = build_scene(cfg, cfg.recorded_insertion_pose, cfg.approach_pose())
    if args.part is None:
        cloud = sweep_scan(scene, sweep_poses(cfg), cfg.scanner, calibration,
                           args.seed)
    else:
        cloud = sweep_scan_parts(scene.only(args.part), sweep_poses(cfg),
                                 cfg.scanner, calibration,
                                 args.seed)[args.part]
    write_ply(cloud, args.output, text=args.ascii)
    logger.info("Wrote %i scan points to %s.", len(cloud), args.output)


def register(args) -> None:
    """Pose of the reference in the scan. A failed registration is a
    result too: it is written with success false and its best pose, if
    any.
    """
    params = RegistrationParams()
    if args.params is not None:
        with open(args.params) as file_handler:
            try:
                params = RegistrationParams.from_dict(jsonload(file_handler))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{args.params}: {e}") from e
    if args.q0 is not None:
        params = params.with_q0(args.q0)
    try:
        result = estimate_pose(read_ply(args.scan), read_ply(args.reference),
                               params, args.seed)
        output = dict(success=True, **result.to_dict())
    except REGISTRATION_ERRORS as e:
        logger.warning("Registration failed: %s", e)
        best = getattr(e, "best", None)
        output = dict(success=False, error=str(e),
                      **({} if best is None else best.to_dict()))
    if args.output is None:
        jsondump(output, sys.stdout, indent=2)
        print()
        return
    with open(args.output, "w") as file_handler:
        jsondump(output, file_handler, indent=2)


def sample_mesh(args) -> None:
    crop = None if args.crop is None else (args.crop[:3], args.crop[3:])
    cloud = make_reference_cloud(args.mesh, args.count, args.seed, crop=crop)
    write_ply(cloud, args.output, text=args.ascii)
    logger.info("Wrote %i points to %s.", len(cloud), args.output)


def run(args) -> None:
    cfg = ScenarioConfig.from_file(args.scenario)
    if args.trials is not None:
        cfg.trials = args.trials
    report = run_experiment(cfg, args.workers)
    print(report.get_summary())
    if args.output is not None:
        with open(args.output, "w") as file_handler:
            report.dump_json(file_handler)
    if args.csv is not None:
        with open(args.csv, "w", newline="") as file_handler:
            report.write_csv(file_handler)


def replay(args) -> None:
    """Rerun one trial with the debug trace enabled.
    """
    getLogger().setLevel(DEBUG)
    cfg = _setting(args)
    strategy = args.strategy or cfg.strategies[0]
    seed = args.seed if args.seed is not None \
        else derive_trial_seed(cfg, cfg.setting, args.initial, args.trial)
    record = run_trial(cfg, args.initial, seed, strategy, args.trial)
    jsondump(record.to_dict(), sys.stdout, indent=2)
    print()


def get_parser() -> ArgumentParser:
    parser = ArgumentParser(description=__doc__)
    parser.add_argument("-d", "--debug", action="store_true",
                        help="activate debug log")
    commands = parser.add_subparsers(dest="command", required=True)

    command = commands.add_parser("scan", help="PLY of a scenario sweep")
    command.add_argument("scenario", type=existing_path)
    command.add_argument("output", type=Path)
    command.add_argument("--part", help="only scan this part id")
    command.add_argument("--setting", type=int, default=0,
                         help="index of the target setting")
    command.add_argument("--seed", type=int, default=0,
                         help="noise and calibration seed")
    command.add_argument("--ascii", action="store_true",
                         help="write an ASCII PLY")
    command.set_defaults(handler=scan)

    command = commands.add_parser("register",
                                  help="pose of a reference in a scan")
    command.add_argument("scan", type=existing_path, help="scan PLY")
    command.add_argument("reference", type=existing_path,
                         help="reference PLY")
    command.add_argument("--params", type=existing_path,
                         help="JSON file of registration parameters")
    command.add_argument("--q0", type=float, nargs=4,
                         metavar=("W", "X", "Y", "Z"),
                         help="expected orientation of the reference")
    command.add_argument("--seed", type=int, default=0)
    command.add_argument("-o", "--output", type=Path,
                         help="pose JSON, stdout if omitted")
    command.set_defaults(handler=register)

    command = commands.add_parser("sample-mesh",
                                  help="reference cloud of an STL/OBJ mesh")
    command.add_argument("mesh", type=existing_path)
    command.add_argument("output", type=Path)
    command.add_argument("-n", "--count", type=int, default=20000)
    command.add_argument("--seed", type=int, default=0)
    command.add_argument(
        "--crop", type=float, nargs=6,
        metavar=("X0", "Y0", "Z0", "X1", "Y1", "Z1"),
        help="keep the points inside this box, mesh coordinates"
    )
    command.add_argument("--ascii", action="store_true",
                         help="write an ASCII PLY")
    command.set_defaults(handler=sample_mesh)

    command = commands.add_parser("run", help="run a scenario")
    command.add_argument("scenario", type=existing_path)
    command.add_argument("-o", "--output", type=Path, help="report JSON")
    command.add_argument("--csv", type=Path, help="CSV of trial records")
    command.add_argument("-w", "--workers", type=int,
                         help="parallel trials, scenario setting if omitted")
    command.add_argument("-t", "--trials", type=int,
                         help="trials per condition, overrides the scenario")
    command.set_defaults(handler=run)

    command = commands.add_parser("replay", help="verbose rerun of a trial")
    command.add_argument("scenario", type=existing_path)
    command.add_argument("--strategy", choices=STRATEGIES)
    command.add_argument("--setting", type=int, default=0,
                         help="index of the target setting")
    command.add_argument("--initial", type=int, default=0,
                         help="index of the initial configuration")
    command.add_argument("--trial", type=int, default=0)
    command.add_argument("--seed", type=int,
                         help="trial seed of a report record, derived "
                         "from the master seed if omitted")
    command.set_defaults(handler=replay)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = get_parser().parse_args(argv)
    setup_logging(args.debug)
    try:
        args.handler(args)
    except (ConfigError, InvalidArgumentError, OSError) as e:
        logger.error("%s", e)
        return 2
    except LaserInsertError as e:
        logger.error("Failed: %s", e)
        return 1
    return 0


if __name__ == "__main__":
    sysexit(main())

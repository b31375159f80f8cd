"""Command line entry points: run, calibrate, simulate, ctl."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .calibration import ViewCalibration, estimate_homography
from .configio import (
    CalibrationSet,
    calibration_set_to_dict,
    camera_from_dict,
    load_correspondences_file,
    load_scenario_file,
    view_from_dict,
)
from .errors import BirdsEyeError, ConfigError
from .service import RuntimeConfig, run_engine, send_command


def _add_run_parser(sub):
    p = sub.add_parser("run", help="run the interaction engine")
    p.add_argument("--calib", required=True, type=Path)
    p.add_argument("--sensors", required=True, type=Path)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--poses", type=Path, help="replay NDJSON pose stream")
    source.add_argument("--listen", type=int, metavar="PORT",
                        help="ingest live poses over TCP")
    p.add_argument("--speed", type=float, default=1.0,
                   help="replay speed multiplier; 0 = as fast as possible")
    p.add_argument("--out", type=Path, help="event NDJSON output file")
    p.add_argument("--serve", type=int, metavar="PORT",
                   help="publish snapshots/events and accept commands")
    p.add_argument("--commands", type=Path,
                   help="scheduled command file [{at_frame, cmd}, ...]")
    p.add_argument("--strict", action="store_true",
                   help="abort on malformed stream input instead of skipping")
    p.add_argument("--linger", action="store_true",
                   help="keep serving after the replay ends")
    p.add_argument("--host", default="127.0.0.1")


def _cmd_run(args) -> int:
    config = RuntimeConfig(
        calib_path=args.calib,
        sensors_path=args.sensors,
        replay_path=args.poses,
        listen_port=args.listen,
        speed=args.speed,
        out_path=args.out,
        serve_port=args.serve,
        commands_path=args.commands,
        strict=args.strict,
        linger=args.linger,
        host=args.host,
    )
    return run_engine(config)


def _cmd_calibrate(args) -> int:
    with open(args.rig) as f:
        rig = json.load(f)
    camera = camera_from_dict(rig["camera"])
    views = {}
    for vd in rig.get("views", []):
        view = view_from_dict(vd)
        views[view.id] = view
    points_by_view = {}
    for path in args.points:
        view_id, corrs = load_correspondences_file(path)
        if view_id not in views:
            raise ConfigError(f"{path}: view {view_id!r} not present in rig")
        points_by_view[view_id] = corrs
    missing = sorted(set(views) - set(points_by_view))
    if missing:
        raise ConfigError(f"no correspondence files for views: {missing}")
    calibrations = {}
    for view_id, corrs in points_by_view.items():
        h, rms = estimate_homography(corrs)
        calibrations[view_id] = ViewCalibration(
            view_id, h, camera.position_m, rms)
        print(f"view {view_id}: {len(corrs)} points, rms {rms:.4f} px")
    from .configio import body_model_from_dict, robot_profile_from_dict
    cs = CalibrationSet(
        camera=camera,
        body_model=body_model_from_dict(rig.get("body_model", {})),
        robot_profiles=[robot_profile_from_dict(r)
                        for r in rig.get("robot_profiles", [])],
        views=views,
        calibrations=calibrations,
    )
    with open(args.out, "w") as f:
        json.dump(calibration_set_to_dict(cs), f, indent=2)
        f.write("\n")
    print(f"wrote {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    from .simulator import run as run_scenario

    scenario = load_scenario_file(args.scenario)
    frames = run_scenario(scenario, args.out, args.truth, seed=args.seed)
    print(f"wrote {frames} frames x {len(scenario.views)} views to {args.out}")
    return 0


def _cmd_ctl(args) -> int:
    cmd = {
        "arm": lambda: {"cmd": "arm", "sensor_id": args.sensor_id},
        "disarm": lambda: {"cmd": "disarm", "sensor_id": args.sensor_id},
        "remove-sensor": lambda: {"cmd": "remove_sensor",
                                  "sensor_id": args.sensor_id},
        "add-sensor": lambda: {"cmd": "add_sensor",
                               "sensor": json.loads(Path(args.file).read_text())},
        "save": lambda: {"cmd": "save_sensors"},
        "teach-start": lambda: {"cmd": "teach_start", "entity_id": args.entity},
        "teach-stop": lambda: {"cmd": "teach_stop", "sensor_id": args.sensor_id},
    }[args.ctl_cmd]()
    ack = send_command(args.host, args.port, cmd, timeout=args.timeout)
    print(json.dumps(ack, indent=2))
    return 0 if ack.get("ok") else 1


def _add_ctl_parser(sub):
    p = sub.add_parser("ctl", help="send a command to a running engine")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--timeout", type=float, default=10.0)
    ctl_sub = p.add_subparsers(dest="ctl_cmd", required=True)
    for name in ("arm", "disarm", "remove-sensor"):
        cp = ctl_sub.add_parser(name)
        cp.add_argument("sensor_id")
    cp = ctl_sub.add_parser("add-sensor")
    cp.add_argument("--file", required=True, help="sensor JSON definition")
    ctl_sub.add_parser("save")
    teach = ctl_sub.add_parser("teach")
    teach_sub = teach.add_subparsers(dest="teach_cmd", required=True)
    ts = teach_sub.add_parser("start")
    ts.add_argument("--entity", type=int, required=True)
    tp = teach_sub.add_parser("stop")
    tp.add_argument("--sensor-id", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="birdseye",
        description="Bird's-eye human-machine interaction engine")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_parser(sub)

    p = sub.add_parser("calibrate", help="fit ground homographies from markers")
    p.add_argument("--rig", required=True, type=Path,
                   help="camera/body/views description (no homographies)")
    p.add_argument("--points", required=True, type=Path, action="append",
                   help="correspondence file (repeat per view)")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("simulate", help="render a scenario to a pose stream")
    p.add_argument("--scenario", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--truth", type=Path)

    _add_ctl_parser(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if args.command == "ctl" and args.ctl_cmd == "teach":
        args.ctl_cmd = f"teach-{args.teach_cmd}"
    try:
        return {
            "run": _cmd_run,
            "calibrate": _cmd_calibrate,
            "simulate": _cmd_simulate,
            "ctl": _cmd_ctl,
        }[args.command](args)
    except BirdsEyeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

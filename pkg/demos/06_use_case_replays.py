"""
The three bundled demonstrations, end to end
============================================

Each use case is simulated to a pose stream, then replayed through the
engine: UC1 (start mat enables the robot, worker proximity drives its
speed), UC2 (mats react to people only), UC3 (teach a region by walking it,
then trigger it on re-entry). Equivalent CLI commands are printed alongside.
"""

import json
import shutil
import tempfile
from importlib import resources
from pathlib import Path

from birdseye.cli import main as birdseye

SCENARIOS = Path(str(resources.files("birdseye") / "scenarios"))
work = Path(tempfile.mkdtemp(prefix="birdseye-demo-"))
print(f"working in {work}\n")

for uc, extra in (("uc1", []), ("uc2", []),
                  ("uc3", ["--commands", str(SCENARIOS / "uc3_commands.json")])):
    poses = work / f"{uc}_poses.ndjson"
    events = work / f"{uc}_events.ndjson"
    sensors = work / f"{uc}_sensors.json"
    shutil.copy(SCENARIOS / f"{uc}_sensors.json", sensors)

    cmd = ["simulate", "--scenario", str(SCENARIOS / f"{uc}.json"),
           "--seed", "7", "--out", str(poses),
           "--truth", str(work / f"{uc}_truth.ndjson")]
    print(f"$ birdseye {' '.join(cmd)}")
    assert birdseye(["--log-level", "WARNING"] + cmd) == 0

    cmd = ["run", "--calib", str(SCENARIOS / "desk_calib.json"),
           "--sensors", str(sensors), "--poses", str(poses),
           "--speed", "0", "--out", str(events)] + extra
    print(f"$ birdseye {' '.join(cmd)}")
    assert birdseye(["--log-level", "WARNING"] + cmd) == 0

    print(f"--- {uc} events ---")
    for line in events.read_text().splitlines():
        e = json.loads(line)
        detail = {k: v for k, v in e.items()
                  if k not in ("t", "sensor_id", "entity_id", "type")}
        print(f"  t={e['t']:6.3f}  {e['sensor_id']:12s} entity {e['entity_id']} "
              f"{e['type']:16s} {detail if detail else ''}")
    if uc == "uc3":
        saved = json.loads(sensors.read_text())
        taught = [s for s in saved["sensors"] if s["id"] == "taught1"]
        print(f"  taught sensor persisted: {len(taught) == 1}, "
              f"{len(taught[0]['polygon_m'])} vertices")
    print()

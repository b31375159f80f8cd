"""
Virtual sensors and debounced events
====================================

A mat, a light barrier, and a robot-anchored proximity sensor watch a
scripted pair of tracks. Debounce suppresses boundary flicker; the proximity
automaton applies hysteresis so levels do not chatter near thresholds.
"""

import math
from dataclasses import dataclass
from typing import Optional

from birdseye import (
    BarrierGeometry,
    MatGeometry,
    ProximityGeometry,
    SensorEngine,
    VirtualSensor,
)


@dataclass
class Entity:
    entity_id: int
    class_name: str
    position_m: tuple
    orientation: Optional[tuple] = None


engine = SensorEngine([
    VirtualSensor("mat", MatGeometry(((0.0, 0.0), (1.2, 0.0),
                                      (1.2, 1.2), (0.0, 1.2))),
                  classes={"human"}),
    VirtualSensor("gate", BarrierGeometry((2.0, -0.5), (2.0, 1.5)),
                  classes={"human"}),
    VirtualSensor("near_robot", ProximityGeometry("robot",
                                                  levels_m=(2.0, 1.0, 0.5),
                                                  hysteresis_m=0.1),
                  classes={"human"}),
])

robot = Entity(2, "robot", (3.5, 0.5))
fps = 30.0
print(" t     sensor      event")
for k in range(0, 150):
    t = k / fps
    # walk east through the mat and across the gate, toward the robot
    x = -0.5 + 1.4 * t
    human = Entity(1, "human", (x, 0.5), (1.0, 0.0))
    for event in engine.evaluate_frame(t, [human, robot]):
        extra = {k: v for k, v in event.payload.items()}
        print(f"{event.t_s:5.2f}  {event.sensor_id:10s} {event.type} {extra}")

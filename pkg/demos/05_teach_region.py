"""
Teach-by-demonstration
======================

Walking a loop defines a new mat sensor: the recorded track is decimated,
closed, and simplified with Douglas-Peucker. A noisy rectangle collapses to
its four corners; a self-crossing figure-eight falls back to the convex hull.
"""

import math
from dataclasses import dataclass

import numpy as np

from birdseye import TeachSession, finalize, record


@dataclass
class Tracked:
    entity_id: int
    position_m: tuple
    last_seen_s: float


def walk(session, points, fps=30.0):
    for i, p in enumerate(points):
        record(session, Tracked(1, tuple(p), i / fps))


rng = np.random.default_rng(3)

# a noisy rectangle walk: 2.4 m x 1.6 m with ~1 cm of gait wobble
corners = [(0, 0), (2.4, 0), (2.4, 1.6), (0, 1.6), (0, 0)]
path = []
for a, b in zip(corners, corners[1:]):
    for u in np.linspace(0, 1, 60, endpoint=False):
        x = a[0] + u * (b[0] - a[0]) + rng.normal(0, 0.01)
        y = a[1] + u * (b[1] - a[1]) + rng.normal(0, 0.01)
        path.append((x, y))

session = TeachSession("demo", entity_id=1)
walk(session, path)
result = finalize(session, epsilon_m=0.05)
print(f"recorded {len(session.samples)} samples "
      f"-> {len(result.geometry.polygon_m)}-vertex region "
      f"(hull fallback: {result.hull_fallback})")
for v in result.geometry.polygon_m:
    print(f"  vertex ({v[0]:6.3f}, {v[1]:6.3f})")

# a figure-eight cannot be a simple polygon: hull fallback kicks in
t = np.linspace(0, 2 * math.pi, 300, endpoint=False)
eight = list(zip(np.sin(2 * t), np.sin(t)))
session = TeachSession("demo-eight", entity_id=1)
walk(session, eight)
result = finalize(session)
print(f"figure-eight -> {len(result.geometry.polygon_m)}-vertex hull "
      f"(hull fallback: {result.hull_fallback})")

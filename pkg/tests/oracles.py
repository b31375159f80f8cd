"""Independent reference implementations used only to derive test expectations.

Nothing in here may import from the code paths it checks; each oracle takes
the long way round (enumeration, winding numbers, explicit ray intersection)
so that agreement is meaningful.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment


def ray_plane_ground_point(camera_pos, through_point, plane_z: float) -> np.ndarray:
    """(x, y) where the ray from the camera through a point pierces z = plane_z."""
    c = np.asarray(camera_pos, dtype=float)
    p = np.asarray(through_point, dtype=float)
    d = p - c
    if abs(d[2]) < 1e-15:
        raise ValueError("ray parallel to the plane")
    t = (plane_z - c[2]) / d[2]
    hit = c + t * d
    return hit[:2]


def winding_number_inside(point, polygon) -> bool:
    """Point-in-polygon by summing signed angles around the boundary."""
    p = np.asarray(point, dtype=float)
    poly = np.asarray(polygon, dtype=float)
    total = 0.0
    for i in range(len(poly)):
        a = poly[i] - p
        b = poly[(i + 1) % len(poly)] - p
        total += math.atan2(a[0] * b[1] - a[1] * b[0], a @ b)
    return abs(total) > math.pi  # ~2*pi inside, ~0 outside


def distance_point_segment(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    denom = ab @ ab
    if denom < 1e-18:
        return float(np.linalg.norm(p - a))
    t = np.clip((p - a) @ ab / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def distance_point_closed_polyline(p, vertices) -> float:
    vs = np.asarray(vertices, dtype=float)
    return min(
        distance_point_segment(p, vs[i], vs[(i + 1) % len(vs)])
        for i in range(len(vs))
    )


def hand_hysteresis_levels(distances, levels, hysteresis):
    """Replay a distance trace through a from-scratch level automaton.

    Thresholds engage the moment the distance drops below them and only let
    go once it has climbed past threshold + hysteresis.
    """
    engaged = [False] * len(levels)
    out = []
    for d in distances:
        for i, th in enumerate(levels):
            if d < th:
                engaged[i] = True
            elif engaged[i] and d > th + hysteresis:
                engaged[i] = False
        # ordering of thresholds makes engagement contiguous from the top
        out.append(sum(engaged))
    return out


def brute_force_assignment(cost: np.ndarray, gate: float):
    """Optimal gated assignment by enumerating permutations (small n only)."""
    n_tracks, n_obs = cost.shape
    best = None
    best_cost = math.inf
    k = min(n_tracks, n_obs)
    for tracks in itertools.permutations(range(n_tracks), k):
        for obs in itertools.permutations(range(n_obs), k):
            pairs = [(t, o) for t, o in zip(tracks, obs) if cost[t, o] <= gate]
            total = sum(cost[t, o] for t, o in pairs)
            # prefer more matches, then lower cost
            key = (-len(pairs), total)
            if best is None or key < (-len(best), best_cost):
                best, best_cost = pairs, total
    return sorted(best or [])


def hungarian_assignment(cost: np.ndarray, gate: float):
    """Gated optimal assignment via scipy's Hungarian solver."""
    big = 1e9
    padded = np.where(cost <= gate, cost, big)
    rows, cols = linear_sum_assignment(padded)
    return sorted((r, c) for r, c in zip(rows, cols) if cost[r, c] <= gate)


def exponential_smoothing(positions, alpha=0.6):
    """Replay the tracker's position smoothing from scratch."""
    out = []
    prev = None
    for p in positions:
        if prev is None:
            prev = (float(p[0]), float(p[1]))
        else:
            prev = (alpha * p[0] + (1 - alpha) * prev[0],
                    alpha * p[1] + (1 - alpha) * prev[1])
        out.append(prev)
    return out


def hand_debounce(times, raw_flags, on_s, off_s):
    """Dwell-time debounce automaton: [(t, 'enter' | 'leave'), ...]."""
    events = []
    emitted = False
    last_raw = None
    raw_since = None
    for t, raw in zip(times, raw_flags):
        if last_raw is None or raw != last_raw:
            raw_since = t
            last_raw = raw
        held = t - raw_since
        if raw and not emitted and held >= on_s:
            emitted = True
            events.append((t, "enter"))
        elif not raw and emitted and held >= off_s:
            emitted = False
            events.append((t, "leave"))
    return events


def hand_barrier_crossings(times, positions, a, b):
    """Directed crossings of the segment a-b; on-line points count as the
    positive side (so touching triggers once, resting does not retrigger)."""
    events = []
    ex, ey = b[0] - a[0], b[1] - a[1]

    def side(p):
        return ex * (p[1] - a[1]) - ey * (p[0] - a[0])

    for i in range(1, len(positions)):
        prev, cur = positions[i - 1], positions[i]
        s0, s1 = side(prev), side(cur)
        if (s0 >= 0) == (s1 >= 0):
            continue
        t_frac = s0 / (s0 - s1)
        hx = prev[0] + t_frac * (cur[0] - prev[0])
        hy = prev[1] + t_frac * (cur[1] - prev[1])
        u = ((hx - a[0]) * ex + (hy - a[1]) * ey) / (ex * ex + ey * ey)
        if 0.0 <= u <= 1.0:
            rx, ry = cur[0] - prev[0], cur[1] - prev[1]
            direction = 1 if ex * ry - ey * rx > 0 else -1
            events.append((times[i], direction))
    return events

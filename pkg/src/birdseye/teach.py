"""Teach-by-demonstration: turn a walked trajectory into a mat sensor region.

A session records the tracked position of one chosen entity (decimated to
suppress standing noise), and finalizing simplifies the closed path with
Douglas-Peucker. Self-intersecting traces fall back to the convex hull of
all samples so the result is always a valid mat polygon.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import TeachError
from .sensors import MatGeometry, polygon_is_simple, polygon_signed_area

logger = logging.getLogger(__name__)

MIN_SAMPLE_SPACING_M = 0.02
DEFAULT_EPSILON_M = 0.05
MIN_TRACE_AREA_M2 = 0.05


@dataclass
class TeachSession:
    session_id: str
    entity_id: int
    samples: list[tuple[float, tuple[float, float]]] = field(default_factory=list)
    state: str = "recording"  # recording | finished


def record(session: TeachSession, entity_state) -> TeachSession:
    """Append the entity's current position, decimated by minimum spacing."""
    if session.state != "recording":
        raise TeachError(f"session {session.session_id!r} is already finished")
    if entity_state.entity_id != session.entity_id:
        logger.debug("teach %s: ignoring entity %d (recording %d)",
                     session.session_id, entity_state.entity_id, session.entity_id)
        return session
    pos = (float(entity_state.position_m[0]), float(entity_state.position_m[1]))
    if session.samples:
        if math.dist(session.samples[-1][1], pos) < MIN_SAMPLE_SPACING_M:
            return session
    session.samples.append((float(entity_state.last_seen_s), pos))
    return session


def _perpendicular_distance(p, a, b) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    denom = math.hypot(dx, dy)
    if denom < 1e-12:
        return math.dist(p, a)
    return abs(dx * (p[1] - ay) - dy * (p[0] - ax)) / denom


def douglas_peucker(points: list[tuple[float, float]],
                    epsilon: float) -> list[tuple[float, float]]:
    """Classic stack-based Douglas-Peucker polyline simplification."""
    n = len(points)
    if n < 3:
        return list(points)
    keep = [False] * n
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        d_max, idx = -1.0, lo + 1
        for i in range(lo + 1, hi):
            d = _perpendicular_distance(points[i], points[lo], points[hi])
            if d > d_max:
                d_max, idx = d, i
        if d_max > epsilon:
            keep[idx] = True
            stack.append((lo, idx))
            stack.append((idx, hi))
    return [p for p, k in zip(points, keep) if k]


def convex_hull(points) -> list[tuple[float, float]]:
    """Andrew's monotone chain; returns CCW hull without repeated endpoint."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class TeachResult:
    geometry: MatGeometry
    hull_fallback: bool


def finalize(session: TeachSession, epsilon_m: float = DEFAULT_EPSILON_M) -> TeachResult:
    """Close, simplify, and validate the recorded trace as a mat polygon."""
    session.state = "finished"
    positions = [p for _, p in session.samples]
    if len(positions) < 3:
        raise TeachError(f"only {len(positions)} samples recorded; need >= 3")
    # hull area measures the spanned region even for self-crossing traces
    hull = convex_hull(positions)
    area = polygon_signed_area(hull) if len(hull) >= 3 else 0.0
    if area <= MIN_TRACE_AREA_M2:
        raise TeachError(f"trace spans {area:.4f} m^2; too small for a region")

    closed = positions + [positions[0]]
    simplified = douglas_peucker(closed, epsilon_m)[:-1]  # drop closing duplicate
    hull_fallback = False
    if len(simplified) < 3 or not polygon_is_simple(simplified):
        simplified = convex_hull(positions)
        hull_fallback = True
        logger.warning("teach %s: trace self-intersects, using convex hull",
                       session.session_id)
    if polygon_signed_area(simplified) < 0:
        simplified = list(reversed(simplified))
    try:
        geometry = MatGeometry(tuple(simplified))
    except Exception as exc:
        raise TeachError(f"simplified trace is not a valid region: {exc}") from exc
    return TeachResult(geometry=geometry, hull_fallback=hull_fallback)

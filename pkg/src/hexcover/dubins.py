"""Constant-speed arc/line paths between hex circles.

Observing a hex is one full circle of radius ``r_t`` about its center.
Moving to a neighbor is an arc along the current circle up to a common
tangent point, then the tangent line to the next circle.  An outer tangent
keeps the rotation sense, an inner tangent reverses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Sequence, Union

import numpy as np

from .errors import AnchorOffCircle, ChordTooLong, CirclesTooClose, DegenerateCenters
from .hexgrid import WorldPoint

TWO_PI = 2.0 * math.pi
TOL = 1e-9


class Sense(IntEnum):
    CCW = 1
    CW = -1

    def flipped(self) -> Sense:
        return Sense(-self.value)


class TangentKind(str, Enum):
    INNER = "inner"
    OUTER = "outer"


@dataclass(frozen=True)
class PathParams:
    r_t: float  # circular path radius
    l_r: float  # observation footprint radius
    r_min: float  # minimum turning radius
    v: float  # constant speed

    def __post_init__(self):
        if min(self.r_t, self.l_r, self.r_min, self.v) <= 0:
            raise ValueError("path parameters must be positive")
        if not (self.r_min <= self.r_t <= self.l_r):
            raise ValueError(f"need r_min <= r_t <= l_r, got {self.r_min}, {self.r_t}, {self.l_r}")

    @property
    def hex_radius(self) -> float:
        return self.l_r + self.r_t


@dataclass(frozen=True)
class ArcSegment:
    center: WorldPoint
    radius: float
    start_angle: float
    sweep: float  # signed, positive is counter-clockwise

    @property
    def length(self) -> float:
        return abs(self.sweep) * self.radius

    @property
    def turn(self) -> int:
        return 1 if self.sweep >= 0 else -1

    def point(self, angle: float) -> WorldPoint:
        cx, cy = self.center
        return WorldPoint(cx + self.radius * math.cos(angle), cy + self.radius * math.sin(angle))

    @property
    def start(self) -> WorldPoint:
        return self.point(self.start_angle)

    @property
    def end(self) -> WorldPoint:
        return self.point(self.start_angle + self.sweep)

    @property
    def start_heading(self) -> float:
        return self.start_angle + self.turn * math.pi / 2

    @property
    def end_heading(self) -> float:
        return self.start_angle + self.sweep + self.turn * math.pi / 2


@dataclass(frozen=True)
class LineSegment:
    start: WorldPoint
    end: WorldPoint

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def start_heading(self) -> float:
        return math.atan2(self.end[1] - self.start[1], self.end[0] - self.start[0])

    end_heading = start_heading


Segment = Union[ArcSegment, LineSegment]


@dataclass
class DubinsPath:
    segments: list[Segment]
    anchor: WorldPoint
    sense: Sense = Sense.CCW
    modes: list[str] = field(default_factory=list)

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def end(self) -> WorldPoint:
        return self.segments[-1].end if self.segments else self.anchor


@dataclass(frozen=True)
class TangentSolution:
    phi: WorldPoint  # tangent point on the source circle
    mu_next: WorldPoint  # tangent point on the target circle
    kind: TangentKind


def _separation(c1, c2) -> tuple[float, float, float]:
    da = c2[0] - c1[0]
    db = c2[1] - c1[1]
    return da, db, da * da + db * db


def outer_tangents(c1, c2, r_t: float) -> list[TangentSolution]:
    a1, b1 = c1
    a2, b2 = c2
    _, _, w = _separation(c1, c2)
    if math.sqrt(w) < TOL:
        raise DegenerateCenters(f"circle centers coincide: {c1}, {c2}")
    sw = math.sqrt(w)
    ox = r_t * (b1 - b2) / sw
    oy = r_t * (a2 - a1) / sw
    return [
        TangentSolution(WorldPoint(a1 + s * ox, b1 + s * oy), WorldPoint(a2 + s * ox, b2 + s * oy), TangentKind.OUTER)
        for s in (1.0, -1.0)
    ]


def inner_tangents(c1, c2, r_t: float) -> list[TangentSolution]:
    a1, b1 = c1
    a2, b2 = c2
    da, db, w = _separation(c1, c2)
    gap = w - (2.0 * r_t) ** 2
    if gap < 0:
        raise CirclesTooClose(f"centers {math.sqrt(w):.6g} apart, need at least {2 * r_t:.6g}")
    root = math.sqrt(gap)
    k = 2.0 * r_t * r_t
    out = []
    for s in (1.0, -1.0):
        phi = WorldPoint(
            (k * da + s * r_t * db * root) / w + a1,
            (k * db + s * r_t * (a1 - a2) * root) / w + b1,
        )
        mu = WorldPoint(
            (k * (a1 - a2) + s * r_t * (b1 - b2) * root) / w + a2,
            (k * (b1 - b2) + s * r_t * (a2 - a1) * root) / w + b2,
        )
        out.append(TangentSolution(phi, mu, TangentKind.INNER))
    return out


def directed_angle(start, end, center, sense: Sense) -> float:
    """Arc angle in [0, 2*pi) travelled from ``start`` to ``end`` along ``sense``."""
    if math.dist(start, end) < TOL:
        return 0.0
    a0 = math.atan2(start[1] - center[1], start[0] - center[0])
    a1 = math.atan2(end[1] - center[1], end[0] - center[0])
    return ((a1 - a0) * int(sense)) % TWO_PI


def select_tangent(mu_i, c1, sense: Sense, candidates: Sequence[TangentSolution]) -> TangentSolution:
    """Candidate reached first when moving from ``mu_i`` along ``sense``."""
    if not candidates:
        raise ValueError("no tangent candidates")
    return min(candidates, key=lambda sol: directed_angle(mu_i, sol.phi, c1, sense))


def transition_arc_params(mu_i, phi_i, r_t: float, mu_j=None) -> tuple[float, float]:
    """Chord angle ``alpha`` in [0, pi] between ``mu_i`` and ``phi_i``, and line length.

    ``alpha`` solves cos(alpha) = 1 - |mu_i - phi_i|^2 / (2 r_t^2); it is
    evaluated in half-angle form, which stays well conditioned at both ends.
    The line length is the tangent segment ``|phi_i - mu_j|`` (zero when
    ``mu_j`` is not given).
    """
    chord = math.dist(mu_i, phi_i)
    if chord > 2.0 * r_t + TOL:
        raise ChordTooLong(f"chord {chord} exceeds diameter {2 * r_t}")
    half = min(0.5 * chord, r_t)
    alpha = 2.0 * math.atan2(half, math.sqrt(max((r_t - half) * (r_t + half), 0.0)))
    length = math.dist(phi_i, mu_j) if mu_j is not None else 0.0
    return alpha, length


def _check_on_circle(p, center, r_t: float) -> None:
    residual = abs(math.dist(p, center) - r_t)
    if residual > TOL:
        raise AnchorOffCircle(f"{p} is {residual:.3g} m off the circle of radius {r_t} about {center}")


def build_observe_circle(hex_center, mu, params: PathParams, sense: Sense = Sense.CCW) -> DubinsPath:
    _check_on_circle(mu, hex_center, params.r_t)
    start = math.atan2(mu[1] - hex_center[1], mu[0] - hex_center[0])
    arc = ArcSegment(WorldPoint(*hex_center), params.r_t, start, int(sense) * TWO_PI)
    return DubinsPath([arc], WorldPoint(*mu), sense, ["observe"])


def _heading_consistent(sol: TangentSolution, center, sense: Sense) -> bool:
    # Motion along the circle at phi must point toward mu_next.
    rx, ry = sol.phi[0] - center[0], sol.phi[1] - center[1]
    tx, ty = -int(sense) * ry, int(sense) * rx
    dx, dy = sol.mu_next[0] - sol.phi[0], sol.mu_next[1] - sol.phi[1]
    return tx * dx + ty * dy > 0


def tangent_candidates(c_i, c_j, r_t: float) -> list[TangentSolution]:
    cands = outer_tangents(c_i, c_j, r_t)
    try:
        cands += inner_tangents(c_i, c_j, r_t)
    except CirclesTooClose:
        pass
    return cands


def build_transition(
    c_i, c_j, mu_i, params: PathParams, sense: Sense = Sense.CCW
) -> tuple[DubinsPath, WorldPoint, Sense]:
    """Arc from ``mu_i`` to the chosen tangent point, then the tangent line.

    Only tangents that can be entered without reversing are considered; of
    those the one reached first along ``sense`` wins.  Returns the path, the
    anchor on the target circle and the rotation sense there.
    """
    r_t = params.r_t
    _check_on_circle(mu_i, c_i, r_t)
    usable = [s for s in tangent_candidates(c_i, c_j, r_t) if _heading_consistent(s, c_i, sense)]
    sol = select_tangent(mu_i, c_i, sense, usable)

    swept = directed_angle(mu_i, sol.phi, c_i, sense)
    alpha, _ = transition_arc_params(mu_i, sol.phi, r_t, sol.mu_next)
    # The executed sweep is the directed angle; the chord angle is its
    # reflex complement when the directed arc passes pi.
    assert abs(min(swept, TWO_PI - swept) - alpha) < 1e-6, (swept, alpha)

    segments: list[Segment] = []
    modes = []
    if swept > 0.0:
        start = math.atan2(mu_i[1] - c_i[1], mu_i[0] - c_i[0])
        segments.append(ArcSegment(WorldPoint(*c_i), r_t, start, int(sense) * swept))
        modes.append("transition")
    segments.append(LineSegment(sol.phi, sol.mu_next))
    modes.append("transition")

    next_sense = sense if sol.kind is TangentKind.OUTER else sense.flipped()
    return DubinsPath(segments, WorldPoint(*mu_i), sense, modes), sol.mu_next, next_sense


def junction_errors(segments: Sequence[Segment]) -> list[tuple[float, float]]:
    """(position gap, heading gap) at every junction between consecutive segments."""
    out = []
    for a, b in zip(segments, segments[1:]):
        gap = math.dist(a.end, b.start)
        dh = (b.start_heading - a.end_heading + math.pi) % TWO_PI - math.pi
        out.append((gap, abs(dh)))
    return out


@dataclass
class Trace:
    """Poses sampled at constant arc-length spacing."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    s: np.ndarray
    segment: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def sample_segments(segments: Sequence[Segment], v: float, dt: float, start=None) -> Trace:
    """Sample ``segments`` every ``v * dt`` of arc length, plus the exact end.

    Headings are unwrapped along the whole sequence so a full circle winds
    by exactly 2*pi.
    """
    if dt <= 0 or v <= 0:
        raise ValueError("v and dt must be positive")
    if not segments or sum(seg.length for seg in segments) == 0.0:
        x0, y0 = start if start is not None else (0.0, 0.0)
        return Trace(*(np.array([val]) for val in (0.0, x0, y0, 0.0, 0.0)), np.array([-1]))

    lengths = np.array([seg.length for seg in segments])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]
    step = v * dt
    n = int(math.floor(total / step + 1e-9))
    s = np.arange(n + 1) * step
    if total - s[-1] > 1e-9:
        s = np.append(s, total)
    else:
        s[-1] = min(s[-1], total)

    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(segments) - 1)
    local = s - cum[idx]
    x = np.empty_like(s)
    y = np.empty_like(s)
    theta = np.empty_like(s)

    heading = segments[0].start_heading
    for k, seg in enumerate(segments):
        if seg.length == 0.0:
            continue
        if k > 0:
            # Continue from the previous end heading so theta never jumps by 2*pi.
            prev_end = heading
            dh = (seg.start_heading - prev_end + math.pi) % TWO_PI - math.pi
            heading = prev_end + dh
        mask = idx == k
        u = local[mask]
        if isinstance(seg, ArcSegment):
            ang = seg.start_angle + seg.turn * u / seg.radius
            x[mask] = seg.center[0] + seg.radius * np.cos(ang)
            y[mask] = seg.center[1] + seg.radius * np.sin(ang)
            theta[mask] = heading + seg.turn * u / seg.radius
            heading = heading + seg.sweep
        else:
            ux = (seg.end[0] - seg.start[0]) / seg.length
            uy = (seg.end[1] - seg.start[1]) / seg.length
            x[mask] = seg.start[0] + u * ux
            y[mask] = seg.start[1] + u * uy
            theta[mask] = heading
    return Trace(s / v, x, y, theta, s, idx)


def sample_path(path: DubinsPath, v: float, dt: float) -> Trace:
    return sample_segments(path.segments, v, dt, start=path.anchor)

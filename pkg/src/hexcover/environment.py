"""Ground-truth worlds: bounded rectangles with disc obstacles.

The planner never reads these directly.  The simulator queries hex status
through :class:`GroundTruth` and reports it as idealized sensor output.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import PlacementFailure
from .hexgrid import ORIGIN, CubeCoord, GridParams, hex_disk, hex_distance, hex_polygon, neighbors, world_to_cube
from .planner import Occupancy

MAX_REJECTIONS = 10_000
BOUNDS_TOL = 1e-9


class EnvKind(str, Enum):
    RANDOM = "random"
    UNIFORM = "uniform"
    IN_ROW = "in_row"
    EMPTY = "empty"

    @classmethod
    def parse(cls, text: str) -> EnvKind:
        return cls(text.strip().lower().replace("-", "_"))


@dataclass(frozen=True)
class Disc:
    x: float
    y: float
    radius: float

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2


@dataclass
class Environment:
    bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax
    obstacles: list[Disc] = field(default_factory=list)
    seed: int = 0
    kind: EnvKind = EnvKind.EMPTY

    def __post_init__(self):
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise ValueError(f"degenerate bounds {self.bounds}")
        for d in self.obstacles:
            if d.radius <= 0:
                raise ValueError(f"obstacle radius must be positive: {d}")
            if not (xmin <= d.x <= xmax and ymin <= d.y <= ymax):
                raise ValueError(f"obstacle center outside bounds: {d}")

    @property
    def width(self) -> float:
        return self.bounds[2] - self.bounds[0]

    @property
    def height(self) -> float:
        return self.bounds[3] - self.bounds[1]

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def free_area(self) -> float:
        return self.area - sum(d.area for d in self.obstacles)

    @property
    def center(self) -> tuple[float, float]:
        xmin, ymin, xmax, ymax = self.bounds
        return (0.5 * (xmin + xmax), 0.5 * (ymin + ymax))

    def disc_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.obstacles:
            empty = np.zeros(0)
            return empty, empty, empty
        arr = np.array([(d.x, d.y, d.radius) for d in self.obstacles], dtype=float)
        return arr[:, 0], arr[:, 1], arr[:, 2]

    def inside_obstacle(self, x, y) -> np.ndarray:
        """Boolean mask of points strictly inside any obstacle disc."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        hit = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for d in self.obstacles:
            hit |= (x - d.x) ** 2 + (y - d.y) ** 2 < d.radius ** 2
        return hit

    def to_dict(self) -> dict:
        return {
            "bounds": list(self.bounds),
            "obstacles": [[d.x, d.y, d.radius] for d in self.obstacles],
            "seed": self.seed,
            "kind": self.kind.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Environment:
        return cls(
            tuple(data["bounds"]),
            [Disc(*o) for o in data["obstacles"]],
            int(data.get("seed", 0)),
            EnvKind.parse(data.get("kind", "empty")),
        )


def departure_point(env: Environment, where, r: float) -> tuple[float, float]:
    """Resolve ``"center"``, ``"lower_left"`` or an explicit (x, y) start."""
    if isinstance(where, str):
        key = where.strip().lower().replace("-", "_")
        if key == "center":
            return env.center
        if key == "lower_left":
            # One and a quarter cell radii in from each wall keeps the start hex inside.
            return (env.bounds[0] + 1.25 * r, env.bounds[1] + 1.25 * r)
        raise ValueError(f"unknown start position {where!r}")
    x, y = where
    return (float(x), float(y))


def departure_clearance(bounds, r: float) -> list[tuple[float, float, float]]:
    """Keep-clear zones around both standard departure points."""
    env = Environment(tuple(bounds))
    return [(*departure_point(env, w, r), r) for w in ("center", "lower_left")]


def _lattice_shape(n: int) -> tuple[int, int]:
    rows = max(d for d in range(1, int(math.isqrt(n)) + 1) if n % d == 0)
    return n // rows, rows


def _lattice(bounds, n: int) -> tuple[list[tuple[float, float]], float, float]:
    xmin, ymin, xmax, ymax = bounds
    cols, rows = _lattice_shape(n)
    sx = (xmax - xmin) / (cols + 1)
    sy = (ymax - ymin) / (rows + 1)
    pts = [(xmin + sx * (i + 1), ymin + sy * (j + 1)) for j in range(rows) for i in range(cols)]
    return pts, sx, sy


def _fits(x, y, rad, placed: Sequence[Disc], bounds, keep_clear) -> bool:
    xmin, ymin, xmax, ymax = bounds
    if x - rad < xmin or x + rad > xmax or y - rad < ymin or y + rad > ymax:
        return False
    if any(math.hypot(x - d.x, y - d.y) <= rad + d.radius for d in placed):
        return False
    return all(math.hypot(x - kx, y - ky) > rad + kr for kx, ky, kr in keep_clear)


def generate_environment(
    kind,
    bounds=(0.0, 0.0, 20.0, 20.0),
    n_obstacles: int = 20,
    radius_range=(0.1, 0.25),
    seed: int = 0,
    keep_clear: Iterable[tuple[float, float, float]] = (),
) -> Environment:
    """Procedurally place ``n_obstacles`` non-overlapping discs.

    ``keep_clear`` lists (x, y, clearance) zones no disc may reach into,
    typically the departure hexes.  Raises PlacementFailure after
    ``MAX_REJECTIONS`` rejected samples.
    """
    kind = EnvKind.parse(kind) if isinstance(kind, str) else EnvKind(kind)
    bounds = tuple(float(b) for b in bounds)
    keep_clear = list(keep_clear)
    rng = np.random.default_rng(seed)
    lo, hi = radius_range
    if kind is EnvKind.EMPTY or n_obstacles == 0:
        return Environment(bounds, [], seed, kind)

    radii = rng.uniform(lo, hi, size=n_obstacles)
    placed: list[Disc] = []
    rejections = 0

    if kind is EnvKind.RANDOM:
        xmin, ymin, xmax, ymax = bounds
        for rad in radii:
            while True:
                x = rng.uniform(xmin + rad, xmax - rad)
                y = rng.uniform(ymin + rad, ymax - rad)
                if _fits(x, y, rad, placed, bounds, keep_clear):
                    placed.append(Disc(float(x), float(y), float(rad)))
                    break
                rejections += 1
                if rejections > MAX_REJECTIONS:
                    raise PlacementFailure(f"could not place {n_obstacles} discs (seed {seed})")
        return Environment(bounds, placed, seed, kind)

    sites, sx, sy = _lattice(bounds, n_obstacles)
    for (px, py), rad in zip(sites, radii):
        if kind is EnvKind.UNIFORM:
            if not _fits(px, py, rad, placed, bounds, keep_clear):
                raise PlacementFailure(f"lattice site {(px, py)} violates clearance")
            placed.append(Disc(px, py, float(rad)))
            continue
        # In-row: loosely lined up, spacing jittered mostly along the row.
        while True:
            x = px + rng.uniform(-0.25, 0.25) * sx
            y = py + rng.uniform(-0.1, 0.1) * sy
            if _fits(x, y, rad, placed, bounds, keep_clear):
                placed.append(Disc(float(x), float(y), float(rad)))
                break
            rejections += 1
            if rejections > MAX_REJECTIONS:
                raise PlacementFailure(f"could not place {n_obstacles} discs (seed {seed})")
    return Environment(bounds, placed, seed, kind)


def _point_segment_dist(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def hex_occupancy(env: Environment, hex_: CubeCoord, g: GridParams) -> Occupancy:
    """Occupied if the hexagon leaves the bounds or touches any obstacle disc."""
    poly = hex_polygon(hex_, g)
    xmin, ymin, xmax, ymax = env.bounds
    for vx, vy in poly:
        if not (xmin - BOUNDS_TOL <= vx <= xmax + BOUNDS_TOL and ymin - BOUNDS_TOL <= vy <= ymax + BOUNDS_TOL):
            return Occupancy.OCCUPIED
    if not env.obstacles:
        return Occupancy.FREE
    ox, oy, orad = env.disc_arrays()
    inside = np.ones(len(ox), dtype=bool)
    edge_dist = np.full(len(ox), np.inf)
    for k in range(6):
        ax, ay = poly[k]
        bx, by = poly[(k + 1) % 6]
        # Outward normal of a counter-clockwise polygon edge.
        nx, ny = by - ay, -(bx - ax)
        inside &= (ox - ax) * nx + (oy - ay) * ny <= 0
        edge_dist = np.minimum(edge_dist, _point_segment_dist(ox, oy, ax, ay, bx, by))
    hit = inside | (edge_dist <= orad)
    return Occupancy.OCCUPIED if bool(hit.any()) else Occupancy.FREE


class GroundTruth:
    """Memoized hex occupancy for one environment and grid."""

    def __init__(self, env: Environment, g: GridParams):
        self.env = env
        self.g = g
        self._cache: dict[CubeCoord, Occupancy] = {}

    def status(self, hex_: CubeCoord) -> Occupancy:
        s = self._cache.get(hex_)
        if s is None:
            s = self._cache[hex_] = hex_occupancy(self.env, hex_, self.g)
        return s

    def reachable_free(self, start: CubeCoord) -> set[CubeCoord]:
        return flood_fill_reachable(self.status, start)


def flood_fill_reachable(status, start: CubeCoord) -> set[CubeCoord]:
    """Breadth-first flood fill over free hexes; the completeness oracle."""
    if status(start) is not Occupancy.FREE:
        return set()
    seen = {start}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        for n in neighbors(c):
            if n not in seen and status(n) is Occupancy.FREE:
                seen.add(n)
                queue.append(n)
    return seen


def start_hex(g: GridParams, point) -> CubeCoord:
    return world_to_cube(point, g)


def free_hexes(truth: GroundTruth) -> list[CubeCoord]:
    """Every free hex of the environment, reachable or not."""
    env, g = truth.env, truth.g
    xmin, ymin, xmax, ymax = env.bounds
    corners = [world_to_cube(p, g) for p in ((xmin, ymin), (xmax, ymax), (xmin, ymax), (xmax, ymin))]
    span = max(hex_distance(ORIGIN, c) for c in corners) + 1
    return [c for c in hex_disk(ORIGIN, span) if truth.status(c) is Occupancy.FREE]

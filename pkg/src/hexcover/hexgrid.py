"""Cube-coordinate hex grid and conversion to the world (Cartesian) frame.

Hexagons are flat-top: the world x axis scales only with the cube x axis,
and the (0, 1, -1) neighbor sits straight "up" along world y.  Centers of
adjacent cells are sqrt(3) * r apart, where r is the hexagon side length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True, slots=True, order=True)
class CubeCoord:
    x: int
    y: int
    z: int

    def __post_init__(self):
        if self.x + self.y + self.z != 0:
            raise ValueError(f"cube coordinates must sum to zero, got {self.x, self.y, self.z}")

    def __add__(self, other: CubeCoord) -> CubeCoord:
        return CubeCoord(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: CubeCoord) -> CubeCoord:
        return CubeCoord(self.x - other.x, self.y - other.y, self.z - other.z)

    def __iter__(self) -> Iterator[int]:
        yield self.x
        yield self.y
        yield self.z

    def __repr__(self) -> str:
        return f"CubeCoord({self.x}, {self.y}, {self.z})"


ORIGIN = CubeCoord(0, 0, 0)

# Neighbor offsets, in the fixed order used for every tie-break in the package.
NEIGHBOR_OFFSETS: tuple[CubeCoord, ...] = (
    CubeCoord(0, -1, 1),
    CubeCoord(1, -1, 0),
    CubeCoord(1, 0, -1),
    CubeCoord(0, 1, -1),
    CubeCoord(-1, 1, 0),
    CubeCoord(-1, 0, 1),
)


class WorldPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class GridParams:
    """Hex side length ``r`` and the world position of the hex origin.

    The grid is robot-centric: ``origin`` is the departure point, so cube
    (0, 0, 0) is centered there.
    """

    r: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"grid radius must be positive, got {self.r}")

    @classmethod
    def from_footprint(cls, l_r: float, r_t: float, origin=(0.0, 0.0)) -> GridParams:
        """Size cells so a circle of radius r_t sweeps the circumscribed circle."""
        return cls(l_r + r_t, tuple(origin))


def neighbors(c: CubeCoord) -> list[CubeCoord]:
    return [c + d for d in NEIGHBOR_OFFSETS]


def hex_distance(a: CubeCoord, b: CubeCoord) -> int:
    return (abs(a.x - b.x) + abs(a.y - b.y) + abs(a.z - b.z)) // 2


def cube_to_world(c: CubeCoord, g: GridParams) -> WorldPoint:
    ox, oy = g.origin
    return WorldPoint(ox + 1.5 * g.r * c.x, oy + 0.5 * SQRT3 * g.r * (c.y - c.z))


def cube_round(fx: float, fy: float, fz: float) -> CubeCoord:
    """Round fractional cube coordinates to the hex that contains them.

    The axis with the largest rounding error is recomputed from the other two
    so the zero-sum invariant holds.
    """
    rx, ry, rz = round(fx), round(fy), round(fz)
    dx, dy, dz = abs(rx - fx), abs(ry - fy), abs(rz - fz)
    if dx > dy and dx > dz:
        rx = -ry - rz
    elif dy > dz:
        ry = -rx - rz
    else:
        rz = -rx - ry
    return CubeCoord(int(rx), int(ry), int(rz))


def world_to_cube(p, g: GridParams) -> CubeCoord:
    px, py = p
    if not (math.isfinite(px) and math.isfinite(py)):
        raise ValueError(f"point must be finite, got {p}")
    wx = px - g.origin[0]
    wy = py - g.origin[1]
    fx = wx / (1.5 * g.r)
    y_minus_z = 2.0 * wy / (SQRT3 * g.r)
    fy = (-fx + y_minus_z) / 2.0
    fz = (-fx - y_minus_z) / 2.0
    return cube_round(fx, fy, fz)


def hex_polygon(c: CubeCoord, g: GridParams) -> list[WorldPoint]:
    """Corners of the hexagon, counter-clockwise, vertex 0 at angle 0."""
    cx, cy = cube_to_world(c, g)
    return [
        WorldPoint(cx + g.r * math.cos(k * math.pi / 3), cy + g.r * math.sin(k * math.pi / 3))
        for k in range(6)
    ]


def hex_disk(center: CubeCoord, radius: int) -> list[CubeCoord]:
    """All hexes within ``radius`` hops of ``center``, in a fixed order."""
    out = []
    for dx in range(-radius, radius + 1):
        for dy in range(max(-radius, -dx - radius), min(radius, -dx + radius) + 1):
            out.append(CubeCoord(center.x + dx, center.y + dy, center.z - dx - dy))
    return out

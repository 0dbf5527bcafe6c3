"""Closed-loop mission simulation: sense, plan, build path, advance, sweep.

Sensing is idealized.  The navigation sensor reports every hex whose polygon
lies inside its range, and the observation sensor covers a disc of radius
``l_r`` around each sampled pose.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .dubins import (
    PathParams,
    Segment,
    Sense,
    Trace,
    build_observe_circle,
    build_transition,
    junction_errors,
    sample_segments,
)
from .environment import Environment, GroundTruth, departure_point, free_hexes
from .errors import Collision, Stuck
from .hexgrid import SQRT3, CubeCoord, GridParams, WorldPoint, cube_to_world, hex_disk, hex_polygon, world_to_cube
from .planner import Done, Observe, Occupancy, PlannerState, Transition, Variant, planner_step, update_explored

log = logging.getLogger(__name__)

DEFAULT_DT = 0.02
DEFAULT_CELL = 0.05


@dataclass(frozen=True)
class SensorConfig:
    nav_radius: float  # navigation sensor range
    l_r: float  # observation footprint radius

    @classmethod
    def for_grid(cls, g: GridParams, l_r: float) -> SensorConfig:
        """Smallest range that fully senses every neighbor from anywhere on the circle."""
        return cls(2.0 * SQRT3 * g.r, l_r)

    def check(self, g: GridParams) -> None:
        if self.nav_radius < 2.0 * SQRT3 * g.r - 1e-12:
            raise ValueError(f"nav_radius {self.nav_radius} < 2*sqrt(3)*r = {2 * SQRT3 * g.r}")


@dataclass
class CoverageRaster:
    bounds: tuple[float, float, float, float]
    cell_size: float
    covered: np.ndarray  # (ny, nx) bool, row 0 at ymin

    @classmethod
    def empty(cls, bounds, cell_size: float = DEFAULT_CELL) -> CoverageRaster:
        xmin, ymin, xmax, ymax = bounds
        nx = int(math.ceil((xmax - xmin) / cell_size - 1e-9))
        ny = int(math.ceil((ymax - ymin) / cell_size - 1e-9))
        return cls(tuple(bounds), cell_size, np.zeros((ny, nx), dtype=bool))

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        xmin, ymin = self.bounds[0], self.bounds[1]
        ny, nx = self.covered.shape
        xs = xmin + (np.arange(nx) + 0.5) * self.cell_size
        ys = ymin + (np.arange(ny) + 0.5) * self.cell_size
        return np.meshgrid(xs, ys)

    @property
    def cell_area(self) -> float:
        return self.cell_size ** 2

    def covered_area(self, mask: Optional[np.ndarray] = None) -> float:
        cov = self.covered if mask is None else self.covered & mask
        return float(cov.sum()) * self.cell_area

    def to_pgm(self) -> bytes:
        """Binary PGM, covered cells white, north up."""
        img = np.where(self.covered[::-1], 255, 0).astype(np.uint8)
        ny, nx = img.shape
        return f"P5\n{nx} {ny}\n255\n".encode("ascii") + img.tobytes()


@dataclass
class MissionResult:
    trace: Trace
    modes: np.ndarray  # per-sample "observe" / "transition" / "idle"
    raster: CoverageRaster
    state: PlannerState
    segments: list[Segment]
    grid: GridParams
    params: PathParams
    completed: bool
    coverage_pct: float = 0.0
    sim_time: float = 0.0
    avg_speed: float = 0.0
    path_length: float = 0.0
    hexes_visited: int = 0
    covered_area: float = 0.0
    steps: int = 0
    extras: dict = field(default_factory=dict)


def sense_navigation(
    env: Environment, pose, cfg: SensorConfig, g: GridParams, truth: Optional[GroundTruth] = None
) -> list[tuple[CubeCoord, Occupancy]]:
    """Status of every hex whose polygon lies entirely within range of ``pose``."""
    truth = truth or GroundTruth(env, g)
    px, py = pose[0], pose[1]
    here = world_to_cube((px, py), g)
    reach = int(math.ceil(cfg.nav_radius / (SQRT3 * g.r))) + 1
    out = []
    lim = cfg.nav_radius ** 2 + 1e-12
    for c in hex_disk(here, reach):
        if all((vx - px) ** 2 + (vy - py) ** 2 <= lim for vx, vy in hex_polygon(c, g)):
            out.append((c, truth.status(c)))
    return out


def sweep_coverage(raster: CoverageRaster, points, l_r: float) -> CoverageRaster:
    """Mark every cell whose center is within ``l_r`` of any sample point."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return raster
    xmin, ymin = raster.bounds[0], raster.bounds[1]
    cs = raster.cell_size
    ny, nx = raster.covered.shape
    # Only cells in the bounding box of the trace can be touched.
    i0 = max(int(math.floor((pts[:, 0].min() - l_r - xmin) / cs)), 0)
    i1 = min(int(math.ceil((pts[:, 0].max() + l_r - xmin) / cs)) + 1, nx)
    j0 = max(int(math.floor((pts[:, 1].min() - l_r - ymin) / cs)), 0)
    j1 = min(int(math.ceil((pts[:, 1].max() + l_r - ymin) / cs)) + 1, ny)
    if i0 >= i1 or j0 >= j1:
        return raster
    xs = xmin + (np.arange(i0, i1) + 0.5) * cs
    ys = ymin + (np.arange(j0, j1) + 0.5) * cs
    gx, gy = np.meshgrid(xs, ys)
    tree = cKDTree(pts)
    d, _ = tree.query(np.column_stack([gx.ravel(), gy.ravel()]), k=1, distance_upper_bound=l_r * (1 + 1e-12))
    raster.covered[j0:j1, i0:i1] |= np.isfinite(d).reshape(gx.shape)
    return raster


def free_mask(raster: CoverageRaster, env: Environment) -> np.ndarray:
    gx, gy = raster.centers()
    return ~env.inside_obstacle(gx, gy)


def compute_metrics(result: MissionResult, env: Environment) -> MissionResult:
    """Fill in coverage percentage, time, path length and average speed."""
    covered = result.raster.covered_area(free_mask(result.raster, env))
    free = env.free_area
    result.covered_area = covered
    result.coverage_pct = float(min(max(100.0 * covered / free, 0.0), 100.0))
    result.path_length = float(sum(s.length for s in result.segments))
    result.sim_time = result.path_length / result.params.v
    result.avg_speed = covered / result.sim_time if result.sim_time > 0 else 0.0
    result.hexes_visited = len(result.state.visited)
    return result


def _check_collisions(env: Environment, trace: Trace) -> None:
    inside = env.inside_obstacle(trace.x, trace.y)
    if inside.any():
        k = int(np.argmax(inside))
        raise Collision(f"pose ({trace.x[k]:.4f}, {trace.y[k]:.4f}) at t={trace.t[k]:.3f} is inside an obstacle")


def run_mission(
    env: Environment,
    variant=Variant.HDCP,
    params: Optional[PathParams] = None,
    sensor: Optional[SensorConfig] = None,
    dt: float = DEFAULT_DT,
    start="center",
    cell_size: float = DEFAULT_CELL,
    observe_in_transit: bool = True,
    max_steps: Optional[int] = None,
) -> MissionResult:
    """Run one coverage mission to completion and return its metrics.

    The hex grid is robot-centric: cube (0, 0, 0) is centered on the
    departure point, and the robot begins on that hex's circle at angle 0,
    turning counter-clockwise.
    """
    variant = Variant.parse(variant) if isinstance(variant, str) else Variant(variant)
    params = params or PathParams(r_t=0.5, l_r=0.5, r_min=0.5, v=1.0)
    origin = departure_point(env, start, params.hex_radius)
    g = GridParams(params.hex_radius, origin)
    sensor = sensor or SensorConfig.for_grid(g, params.l_r)
    sensor.check(g)
    if cell_size > params.l_r / 5 + 1e-12:
        raise ValueError(f"raster cell {cell_size} coarser than l_r/5")

    truth = GroundTruth(env, g)
    state = PlannerState(variant=variant)
    if truth.status(state.current) is not Occupancy.FREE:
        raise ValueError(f"departure hex at {origin} is not free")
    if max_steps is None:
        max_steps = 4 * len(free_hexes(truth)) + 10

    center = cube_to_world(state.current, g)
    mu = WorldPoint(center.x + params.r_t, center.y)
    sense = Sense.CCW
    segments: list[Segment] = []
    modes: list[str] = []
    update_explored(state, sense_navigation(env, mu, sensor, g, truth))

    steps = 0
    completed = False
    while steps < max_steps:
        cmd = planner_step(state)
        if isinstance(cmd, Done):
            completed = True
            break
        if isinstance(cmd, Observe):
            path = build_observe_circle(cube_to_world(cmd.hex, g), mu, params, sense)
            segments += path.segments
            modes += path.modes
            update_explored(state, sense_navigation(env, mu, sensor, g, truth))
            continue
        assert isinstance(cmd, Transition)
        steps += 1
        if truth.status(cmd.to_hex) is not Occupancy.FREE:
            raise Stuck(f"transition into occupied hex {cmd.to_hex}")
        c_i = cube_to_world(cmd.from_hex, g)
        c_j = cube_to_world(cmd.to_hex, g)
        w = (c_j.x - c_i.x) ** 2 + (c_j.y - c_i.y) ** 2
        # One-hop moves always admit inner tangents (w - 4 r_t^2 >= 8 r_t^2).
        assert w - 4 * params.r_t ** 2 >= 8 * params.r_t ** 2 - 1e-9
        path, mu, sense = build_transition(c_i, c_j, mu, params, sense)
        segments += path.segments
        modes += path.modes
        update_explored(state, sense_navigation(env, mu, sensor, g, truth))

    if not completed:
        log.warning("mission stopped after %d steps without completing", steps)

    trace = sample_segments(segments, params.v, dt, start=mu)
    seg_modes = np.array(modes + ["idle"])
    sample_modes = seg_modes[trace.segment] if segments else np.array(["idle"])
    _check_collisions(env, trace)

    raster = CoverageRaster.empty(env.bounds, cell_size)
    if variant is Variant.HDCP and not observe_in_transit and segments:
        sweep_coverage(raster, trace.xy[sample_modes == "observe"], params.l_r)
    else:
        sweep_coverage(raster, trace.xy, params.l_r)

    result = MissionResult(
        trace=trace,
        modes=sample_modes,
        raster=raster,
        state=state,
        segments=segments,
        grid=g,
        params=params,
        completed=completed,
        steps=steps,
    )
    return compute_metrics(result, env)


def path_continuity(segments: Sequence[Segment]) -> tuple[float, float]:
    """Worst position and heading gaps over all junctions."""
    errs = junction_errors(segments)
    if not errs:
        return 0.0, 0.0
    return max(e[0] for e in errs), max(e[1] for e in errs)


def write_trace_csv(result: MissionResult, path) -> None:
    tr = result.trace
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "theta", "mode"])
        for k in range(len(tr)):
            w.writerow([f"{tr.t[k]:.4f}", f"{tr.x[k]:.6f}", f"{tr.y[k]:.6f}", f"{tr.theta[k]:.6f}", result.modes[k]])


def read_trace_csv(path) -> tuple[np.ndarray, list[str]]:
    """Return an (N, 4) array of t, x, y, theta and the per-row modes."""
    rows, modes = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((float(row["t"]), float(row["x"]), float(row["y"]), float(row["theta"])))
            modes.append(row["mode"])
    return np.array(rows, dtype=float).reshape(-1, 4), modes

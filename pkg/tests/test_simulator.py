import math
from collections import deque

import numpy as np
import pytest

from hexcover.dubins import LineSegment, PathParams, sample_segments
from hexcover.environment import Disc, Environment, generate_environment
from hexcover.hexgrid import ORIGIN, GridParams, cube_to_world, hex_polygon, neighbors
from hexcover.planner import Occupancy, Variant
from hexcover.simulator import (
    CoverageRaster,
    SensorConfig,
    compute_metrics,
    free_mask,
    path_continuity,
    read_trace_csv,
    run_mission,
    sense_navigation,
    sweep_coverage,
    write_trace_csv,
)

P = PathParams(r_t=0.5, l_r=0.5, r_min=0.5, v=1.0)


def inside_bounds_oracle(env, c, g):
    xmin, ymin, xmax, ymax = env.bounds
    return all(xmin - 1e-9 <= x <= xmax + 1e-9 and ymin - 1e-9 <= y <= ymax + 1e-9 for x, y in hex_polygon(c, g))


def reachable_in_empty(env, g):
    seen = {ORIGIN}
    queue = deque([ORIGIN])
    while queue:
        c = queue.popleft()
        for n in neighbors(c):
            if n not in seen and inside_bounds_oracle(env, n, g):
                seen.add(n)
                queue.append(n)
    return seen


def enclosure(r=1.0, center=(10.0, 10.0)):
    g = GridParams(r, center)
    discs = [Disc(*cube_to_world(n, g), 0.1) for n in neighbors(ORIGIN)]
    return Environment((0.0, 0.0, 20.0, 20.0), discs)


# sensing


def test_sensor_range_check():
    g = GridParams(1.0)
    with pytest.raises(ValueError):
        SensorConfig(3.0, 0.5).check(g)
    SensorConfig.for_grid(g, 0.5).check(g)


@pytest.mark.parametrize("angle", np.linspace(0, 2 * math.pi, 13))
def test_sensing_covers_the_neighborhood_from_anywhere_on_the_circle(angle):
    env = Environment((0.0, 0.0, 20.0, 20.0))
    g = GridParams(1.0, (10.0, 10.0))
    pose = (10.0 + 0.5 * math.cos(angle), 10.0 + 0.5 * math.sin(angle))
    seen = dict(sense_navigation(env, pose, SensorConfig.for_grid(g, 0.5), g))
    assert len(seen) >= 7
    assert {ORIGIN, *neighbors(ORIGIN)} <= set(seen)


def test_sensing_is_deterministic():
    env = generate_environment("random", (0, 0, 20, 20), seed=2)
    g = GridParams(1.0, (10.0, 10.0))
    cfg = SensorConfig.for_grid(g, 0.5)
    a = sense_navigation(env, (10.5, 10.0), cfg, g)
    b = sense_navigation(env, (10.5, 10.0), cfg, g)
    assert a == b


def test_far_obstacle_is_not_reported():
    g = GridParams(1.0, (10.0, 10.0))
    env = Environment((0.0, 0.0, 20.0, 20.0), [Disc(17.0, 10.0, 0.2)])
    obs = sense_navigation(env, (10.5, 10.0), SensorConfig.for_grid(g, 0.5), g)
    assert all(s is Occupancy.FREE for _, s in obs)


# coverage raster


def test_stationary_footprint_area():
    raster = CoverageRaster.empty((0, 0, 4, 4), 0.01)
    sweep_coverage(raster, [(2.0, 2.0)], 0.5)
    assert raster.covered_area() == pytest.approx(math.pi * 0.25, rel=0.01)


def test_full_circle_covers_double_radius_disc():
    raster = CoverageRaster.empty((0, 0, 4, 4), 0.02)
    t = np.linspace(0, 2 * math.pi, 2000)
    sweep_coverage(raster, np.column_stack([2 + 0.5 * np.cos(t), 2 + 0.5 * np.sin(t)]), 0.5)
    assert raster.covered_area() == pytest.approx(math.pi * 1.0**2, rel=0.02)


def test_straight_sweep_is_a_stadium():
    raster = CoverageRaster.empty((0, 0, 6, 2), 0.02)
    tr = sample_segments([LineSegment((1.0, 1.0), (5.0, 1.0))], v=1.0, dt=0.02)
    sweep_coverage(raster, tr.xy, 0.5)
    assert raster.covered_area() == pytest.approx(2 * 0.5 * 4.0 + math.pi * 0.25, rel=0.02)


def test_sweep_ignores_points_outside_and_empty_input():
    raster = CoverageRaster.empty((0, 0, 1, 1), 0.1)
    sweep_coverage(raster, np.zeros((0, 2)), 0.5)
    sweep_coverage(raster, [(10.0, 10.0)], 0.5)
    assert not raster.covered.any()


def test_raster_shape_and_pgm():
    raster = CoverageRaster.empty((0, 0, 2, 1), 0.5)
    assert raster.covered.shape == (2, 4)
    raster.covered[0, 0] = True  # lower-left cell
    pgm = raster.to_pgm()
    header, body = pgm[:11], pgm[11:]
    assert header == b"P5\n4 2\n255\n"
    # North up: the lower-left cell is in the last image row.
    assert list(body) == [0, 0, 0, 0, 255, 0, 0, 0]


def test_obstacle_cells_are_excluded_from_coverage():
    env = Environment((0, 0, 2, 2), [Disc(1.0, 1.0, 0.5)])
    raster = CoverageRaster.empty(env.bounds, 0.02)
    raster.covered[:] = True
    mask = free_mask(raster, env)
    assert raster.covered_area(mask) == pytest.approx(4 - math.pi * 0.25, rel=0.01)


# missions


def test_empty_mission_visits_every_reachable_hex():
    env = Environment((0.0, 0.0, 6.0, 6.0))
    res = run_mission(env, Variant.HDCP, P)
    assert res.completed
    assert res.state.visited == reachable_in_empty(env, res.grid)


def test_hdcp_and_hdcp_e_visit_the_same_hexes():
    env = generate_environment("random", (0, 0, 10, 10), 6, seed=3, keep_clear=[(5.0, 5.0, 1.0)])
    a = run_mission(env, Variant.HDCP, P)
    b = run_mission(env, Variant.HDCP_E, P)
    assert a.state.visited == b.state.visited
    assert a.path_length > b.path_length


def test_enclosed_start_hdcp_e_is_a_zero_length_mission():
    env = enclosure()
    res = run_mission(env, Variant.HDCP_E, P, cell_size=0.01)
    assert res.completed
    assert res.state.visited == {ORIGIN}
    assert res.path_length == 0.0 and res.sim_time == 0.0 and res.avg_speed == 0.0
    assert len(res.trace) == 1
    expected = 100 * math.pi * P.l_r**2 / env.free_area
    assert res.coverage_pct == pytest.approx(expected, rel=0.01)


def test_enclosed_start_hdcp_observes_once():
    env = enclosure()
    res = run_mission(env, Variant.HDCP, P)
    assert res.completed
    assert res.path_length == pytest.approx(2 * math.pi * P.r_t)
    assert set(res.modes) == {"observe"}


def test_mission_is_deterministic():
    env = generate_environment("in_row", (0, 0, 12, 12), 8, seed=5, keep_clear=[(6.0, 6.0, 1.0)])
    a = run_mission(env, Variant.HDCP_E, P)
    b = run_mission(env, Variant.HDCP_E, P)
    assert np.array_equal(a.trace.xy, b.trace.xy)
    assert a.coverage_pct == b.coverage_pct
    assert [h for _, h in a.state.path_history] == [h for _, h in b.state.path_history]


@pytest.mark.parametrize("variant", list(Variant))
def test_mission_path_is_smooth_and_collision_free(variant):
    env = generate_environment("random", (0, 0, 12, 12), 10, seed=8, keep_clear=[(6.0, 6.0, 1.0)])
    res = run_mission(env, variant, P)
    gap, dh = path_continuity(res.segments)
    assert gap < 1e-9 and dh < 1e-9
    assert not env.inside_obstacle(res.trace.x, res.trace.y).any()
    assert res.steps <= 4 * len(res.state.visited)
    rate = np.abs(np.diff(res.trace.theta)) / np.maximum(np.diff(res.trace.s), 1e-15)
    assert rate.max() <= 1 / P.r_min + 1e-6


def test_time_and_speed_metrics():
    env = Environment((0.0, 0.0, 6.0, 6.0))
    res = run_mission(env, Variant.HDCP_E, P)
    assert res.sim_time == pytest.approx(res.path_length / P.v)
    assert res.trace.t[-1] == pytest.approx(res.sim_time)
    assert res.avg_speed == pytest.approx(res.covered_area / res.sim_time)
    assert 0 < res.coverage_pct <= 100


def test_compute_metrics_excludes_obstacles():
    env = Environment((0.0, 0.0, 6.0, 6.0))
    res = run_mission(env, Variant.HDCP, P)
    blocked = Environment(env.bounds, [Disc(3.0, 3.0, 0.3)])
    again = compute_metrics(res, blocked)
    assert again.covered_area < 36.0
    assert again.coverage_pct <= 100.0


def test_hdcp_observation_only_coverage_is_smaller():
    env = Environment((0.0, 0.0, 8.0, 8.0))
    full = run_mission(env, Variant.HDCP, P)
    strict = run_mission(env, Variant.HDCP, P, observe_in_transit=False)
    assert strict.coverage_pct <= full.coverage_pct


def test_coarse_raster_rejected():
    with pytest.raises(ValueError):
        run_mission(Environment((0, 0, 6, 6)), Variant.HDCP, P, cell_size=0.2)


def test_blocked_start_rejected():
    env = Environment((0, 0, 6, 6), [Disc(3.0, 3.0, 0.2)])
    with pytest.raises(ValueError):
        run_mission(env, Variant.HDCP, P)


def test_step_budget_stops_early():
    res = run_mission(Environment((0, 0, 10, 10)), Variant.HDCP_E, P, max_steps=3)
    assert not res.completed and res.steps == 3


def test_trace_csv_round_trip(tmp_path):
    res = run_mission(Environment((0.0, 0.0, 6.0, 6.0)), Variant.HDCP, P)
    out = tmp_path / "trace.csv"
    write_trace_csv(res, out)
    assert out.read_text().splitlines()[0] == "t,x,y,theta,mode"
    poses, modes = read_trace_csv(out)
    assert poses.shape == (len(res.trace), 4)
    assert np.allclose(poses[:, 1], res.trace.x, atol=1e-6)
    assert np.allclose(poses[:, 2], res.trace.y, atol=1e-6)
    assert modes == list(res.modes)
    assert set(modes) == {"observe", "transition"}

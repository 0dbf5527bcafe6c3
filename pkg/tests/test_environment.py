import math
import random

import numpy as np
import pytest

from hexcover.environment import (
    Disc,
    EnvKind,
    Environment,
    GroundTruth,
    departure_clearance,
    departure_point,
    flood_fill_reachable,
    generate_environment,
    hex_occupancy,
)
from hexcover.errors import PlacementFailure
from hexcover.hexgrid import ORIGIN, CubeCoord, GridParams, cube_to_world, hex_disk, hex_polygon, neighbors
from hexcover.planner import Occupancy

BOUNDS = (0.0, 0.0, 20.0, 20.0)


def overlaps(a, b):
    return math.hypot(a.x - b.x, a.y - b.y) <= a.radius + b.radius


def touches_polygon_sampled(disc, poly, n=400):
    """Dense sampling oracle: min distance from disc center to the filled hexagon."""
    cx, cy = disc.x, disc.y
    # Same-side test against every edge of the convex CCW polygon.
    signs = []
    for (ax, ay), (bx, by) in zip(poly, poly[1:] + poly[:1]):
        signs.append((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))
    if all(s >= 0 for s in signs):
        return 0.0
    t = np.linspace(0, 1, n)[:, None]
    a = np.array(poly)
    b = np.roll(a, -1, axis=0)
    pts = a[None] + t[..., None] * (b - a)[None]
    return float(np.hypot(pts[..., 0] - cx, pts[..., 1] - cy).min())


def test_empty_environment():
    env = generate_environment("empty", BOUNDS, seed=3)
    assert env.obstacles == []
    assert env.free_area == 400.0


@pytest.mark.parametrize("seed", range(5))
def test_random_environment_is_valid_and_reproducible(seed):
    env = generate_environment(EnvKind.RANDOM, BOUNDS, 20, (0.1, 0.25), seed=seed)
    assert len(env.obstacles) == 20
    for k, a in enumerate(env.obstacles):
        assert 0.1 <= a.radius <= 0.25
        assert a.x - a.radius >= 0 and a.x + a.radius <= 20
        assert a.y - a.radius >= 0 and a.y + a.radius <= 20
        for b in env.obstacles[k + 1 :]:
            assert not overlaps(a, b)
    again = generate_environment(EnvKind.RANDOM, BOUNDS, 20, (0.1, 0.25), seed=seed)
    assert again.obstacles == env.obstacles


def test_different_seeds_differ():
    a = generate_environment("random", BOUNDS, seed=0)
    b = generate_environment("random", BOUNDS, seed=1)
    assert a.obstacles != b.obstacles


def test_uniform_lattice_is_translation_symmetric():
    env = generate_environment("uniform", BOUNDS, 20, seed=0)
    xs = sorted({round(d.x, 9) for d in env.obstacles})
    ys = sorted({round(d.y, 9) for d in env.obstacles})
    assert len(xs) * len(ys) == 20
    assert np.allclose(np.diff(xs), xs[1] - xs[0])
    assert np.allclose(np.diff(ys), ys[1] - ys[0])
    # Lattice margins equal the spacing, so it is centered.
    assert xs[0] == pytest.approx(20 - xs[-1])
    assert ys[0] == pytest.approx(20 - ys[-1])


def test_in_row_stays_near_rows():
    env = generate_environment("in_row", BOUNDS, 20, seed=4)
    uni = generate_environment("uniform", BOUNDS, 20, seed=4)
    for d, u in zip(env.obstacles, uni.obstacles):
        assert abs(d.y - u.y) <= 0.1 * 4.0 + 1e-9
        assert abs(d.x - u.x) <= 0.25 * 20 / 6 + 1e-9


def test_keep_clear_is_respected():
    zones = departure_clearance(BOUNDS, 1.0)
    for kind in ("random", "in_row"):
        for seed in range(3):
            env = generate_environment(kind, BOUNDS, seed=seed, keep_clear=zones)
            for d in env.obstacles:
                for x, y, r in zones:
                    assert math.hypot(d.x - x, d.y - y) > r + d.radius


def test_placement_failure_when_overcrowded():
    with pytest.raises(PlacementFailure):
        generate_environment("random", (0, 0, 2, 2), n_obstacles=50, radius_range=(0.3, 0.4), seed=0)


def test_uniform_placement_failure_on_blocked_site():
    with pytest.raises(PlacementFailure):
        generate_environment("uniform", (0, 0, 4, 4), n_obstacles=1, keep_clear=[(2.0, 2.0, 1.0)])


def test_environment_validation_and_round_trip():
    with pytest.raises(ValueError):
        Environment((0, 0, 0, 1))
    with pytest.raises(ValueError):
        Environment((0, 0, 1, 1), [Disc(2, 2, 0.1)])
    env = generate_environment("random", BOUNDS, seed=7)
    assert Environment.from_dict(env.to_dict()) == env


def test_departure_points():
    env = Environment(BOUNDS)
    assert departure_point(env, "center", 1.0) == (10.0, 10.0)
    assert departure_point(env, "lower-left", 1.0) == (1.25, 1.25)
    assert departure_point(env, (3, 4), 1.0) == (3.0, 4.0)
    with pytest.raises(ValueError):
        departure_point(env, "nowhere", 1.0)


def test_lower_left_start_hex_is_inside():
    env = Environment(BOUNDS)
    g = GridParams(1.0, departure_point(env, "lower_left", 1.0))
    assert hex_occupancy(env, ORIGIN, g) is Occupancy.FREE


# occupancy


G = GridParams(1.0, (10.0, 10.0))


def test_occupancy_examples():
    env = Environment(BOUNDS, [Disc(10.0, 10.0, 0.05)])
    assert hex_occupancy(env, ORIGIN, G) is Occupancy.OCCUPIED
    for n in neighbors(ORIGIN):
        assert hex_occupancy(env, n, G) is Occupancy.FREE


def test_occupancy_disc_touching_from_outside():
    # Flat-top hex: the edge midpoint on +y is at sqrt(3)/2.
    h = math.sqrt(3) / 2
    near = Environment(BOUNDS, [Disc(10.0, 10.0 + h + 0.09, 0.1)])
    far = Environment(BOUNDS, [Disc(10.0, 10.0 + h + 0.11, 0.1)])
    assert hex_occupancy(near, ORIGIN, G) is Occupancy.OCCUPIED
    assert hex_occupancy(far, ORIGIN, G) is Occupancy.FREE


def test_occupancy_out_of_bounds():
    env = Environment((0, 0, 3, 3))
    g = GridParams(1.0, (1.5, 1.5))
    assert hex_occupancy(env, ORIGIN, g) is Occupancy.FREE
    assert hex_occupancy(env, CubeCoord(1, -1, 0), g) is Occupancy.OCCUPIED


@pytest.mark.parametrize("seed", range(4))
def test_occupancy_matches_sampling_oracle(seed):
    rng = random.Random(seed)
    for _ in range(150):
        d = Disc(rng.uniform(7, 13), rng.uniform(7, 13), rng.uniform(0.05, 0.4))
        env = Environment(BOUNDS, [d])
        for c in hex_disk(ORIGIN, 2):
            dist = touches_polygon_sampled(d, hex_polygon(c, G))
            if abs(dist - d.radius) < 1e-3:
                continue
            expected = Occupancy.OCCUPIED if dist < d.radius else Occupancy.FREE
            assert hex_occupancy(env, c, G) is expected


def test_flood_fill_stops_at_occupied_ring():
    ring = set(neighbors(ORIGIN))

    def status(c):
        return Occupancy.OCCUPIED if c in ring else Occupancy.FREE

    assert flood_fill_reachable(status, ORIGIN) == {ORIGIN}
    assert flood_fill_reachable(lambda c: Occupancy.OCCUPIED, ORIGIN) == set()


def test_ground_truth_memoizes():
    env = generate_environment("random", BOUNDS, seed=1)
    truth = GroundTruth(env, G)
    assert truth.status(ORIGIN) is hex_occupancy(env, ORIGIN, G)
    assert ORIGIN in truth._cache
    assert cube_to_world(ORIGIN, G) == (10.0, 10.0)

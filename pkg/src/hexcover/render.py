"""SVG rendering of missions: hex grid, obstacles, coverage and path."""

from __future__ import annotations

from typing import Iterable, Optional
from xml.sax.saxutils import quoteattr

import numpy as np

from .environment import Environment
from .hexgrid import CubeCoord, GridParams, hex_polygon, world_to_cube
from .planner import Occupancy


def _grid_hexes(env: Environment, g: GridParams) -> list[CubeCoord]:
    """Hexes whose polygon overlaps the environment rectangle."""
    xmin, ymin, xmax, ymax = env.bounds
    corners = [world_to_cube(p, g) for p in ((xmin, ymin), (xmax, ymax), (xmin, ymax), (xmax, ymin))]
    lo = [min(getattr(c, a) for c in corners) - 1 for a in "xyz"]
    hi = [max(getattr(c, a) for c in corners) + 1 for a in "xyz"]
    out = []
    for x in range(lo[0], hi[0] + 1):
        for y in range(lo[1], hi[1] + 1):
            z = -x - y
            if not lo[2] <= z <= hi[2]:
                continue
            c = CubeCoord(x, y, z)
            poly = hex_polygon(c, g)
            if (
                max(p.x for p in poly) > xmin
                and min(p.x for p in poly) < xmax
                and max(p.y for p in poly) > ymin
                and min(p.y for p in poly) < ymax
            ):
                out.append(c)
    return out


def _points(poly) -> str:
    return " ".join(f"{x:.4f},{y:.4f}" for x, y in poly)


def _raster_runs(covered: np.ndarray, bounds, cell: float) -> Iterable[str]:
    xmin, ymin = bounds[0], bounds[1]
    for j, row in enumerate(covered):
        if not row.any():
            continue
        padded = np.concatenate([[False], row, [False]]).astype(np.int8)
        edges = np.flatnonzero(np.diff(padded))
        for i0, i1 in zip(edges[::2], edges[1::2]):
            yield (
                f'<rect x="{xmin + i0 * cell:.4f}" y="{ymin + j * cell:.4f}" '
                f'width="{(i1 - i0) * cell:.4f}" height="{cell:.4f}"/>'
            )


def svg_document(
    env: Environment,
    g: GridParams,
    path_xy: Optional[np.ndarray] = None,
    covered: Optional[np.ndarray] = None,
    cell_size: float = 0.05,
    explored: Optional[dict[CubeCoord, Occupancy]] = None,
    title: str = "",
) -> str:
    xmin, ymin, xmax, ymax = env.bounds
    w, h = xmax - xmin, ymax - ymin
    stroke = 0.02 * g.r
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{xmin:g} {ymin:g} {w:g} {h:g}" '
        f'width="{800 * w / max(w, h):.0f}" height="{800 * h / max(w, h):.0f}">',
    ]
    if title:
        lines.append(f"<title>{title}</title>")
    # World y points up; SVG y points down.
    lines.append(f'<g transform="matrix(1 0 0 -1 0 {ymin + ymax:g})">')
    lines.append(f'<rect class="bounds" x="{xmin:g}" y="{ymin:g}" width="{w:g}" height="{h:g}" fill="white" stroke="black" stroke-width="{2 * stroke:g}"/>')

    if covered is not None and covered.any():
        lines.append('<g class="coverage" fill="#9ecae1" fill-opacity="0.5" stroke="none">')
        lines.extend(_raster_runs(covered, env.bounds, cell_size))
        lines.append("</g>")

    explored = explored or {}
    lines.append(f'<g class="grid" fill="none" stroke="#bbbbbb" stroke-width="{stroke:g}">')
    for c in _grid_hexes(env, g):
        if explored.get(c) is Occupancy.OCCUPIED:
            continue
        lines.append(f'<polygon points="{_points(hex_polygon(c, g))}"/>')
    lines.append("</g>")

    occupied = sorted(c for c, s in explored.items() if s is Occupancy.OCCUPIED)
    lines.append(f'<g fill="#e34a33" fill-opacity="0.35" stroke="#b30000" stroke-width="{stroke:g}">')
    for c in occupied:
        lines.append(f'<polygon class="occupied" data-hex="{c.x},{c.y},{c.z}" points="{_points(hex_polygon(c, g))}"/>')
    lines.append("</g>")

    lines.append('<g fill="#2ca25f" stroke="none">')
    for d in env.obstacles:
        lines.append(f'<circle class="obstacle" cx="{d.x:.4f}" cy="{d.y:.4f}" r="{d.radius:.4f}"/>')
    lines.append("</g>")

    if path_xy is not None and len(path_xy):
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in path_xy)
        lines.append(f'<polyline class="path" fill="none" stroke="#0000cc" stroke-width="{2 * stroke:g}" points={quoteattr(pts)}/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_svg(result, env: Environment, g: Optional[GridParams] = None) -> str:
    """SVG for a finished mission (``result`` is a simulator MissionResult)."""
    g = g or result.grid
    return svg_document(
        env,
        g,
        path_xy=result.trace.xy,
        covered=result.raster.covered,
        cell_size=result.raster.cell_size,
        explored=result.state.explored,
        title=f"{result.state.variant.value} coverage {result.coverage_pct:.1f}%",
    )


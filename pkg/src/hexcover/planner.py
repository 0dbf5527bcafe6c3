"""High-level hex decomposition coverage planning (HDCP and HDCP-E).

The planner only ever sees the explored map: hexes the navigation sensor
has classified as free or occupied.  Unknown hexes are never candidates and
never traversed.  Each decision moves the robot exactly one hop.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Optional, Union

from .errors import ConflictingObservation, NoPath
from .hexgrid import ORIGIN, CubeCoord, hex_distance, neighbors


class Occupancy(IntEnum):
    FREE = 0
    OCCUPIED = 1


class Variant(str, Enum):
    HDCP = "HDCP"
    HDCP_E = "HDCP_E"

    @classmethod
    def parse(cls, text: str) -> Variant:
        key = text.strip().upper().replace("-", "_")
        return cls(key)


@dataclass(frozen=True)
class Observe:
    hex: CubeCoord


@dataclass(frozen=True)
class Transition:
    from_hex: CubeCoord
    to_hex: CubeCoord


@dataclass(frozen=True)
class Done:
    pass


PlannerCommand = Union[Observe, Transition, Done]


@dataclass
class PlannerState:
    """Mission memory for one robot.

    ``path_history`` holds (step, hex) pairs, ``visited`` the unique hexes in
    it, ``explored`` the sensed status of every known hex and ``cached_path``
    the remainder of the current shortest path toward a revisit target.
    """

    variant: Variant = Variant.HDCP
    current: CubeCoord = ORIGIN
    step: int = 1
    path_history: list[tuple[int, CubeCoord]] = field(default_factory=list)
    visited: set[CubeCoord] = field(default_factory=set)
    explored: dict[CubeCoord, Occupancy] = field(default_factory=dict)
    cached_path: list[CubeCoord] = field(default_factory=list)
    explored_changed: bool = False
    awaiting_decision: bool = False
    done: bool = False
    log: list[str] = field(default_factory=list)

    def is_free(self, c: CubeCoord) -> bool:
        return self.explored.get(c) is Occupancy.FREE

    def is_undesired(self, c: CubeCoord) -> bool:
        """Visited or known to be occupied."""
        return c in self.visited or self.explored.get(c) is Occupancy.OCCUPIED

    def has_open_neighbor(self, c: CubeCoord) -> bool:
        return any(self.is_free(n) and n not in self.visited for n in neighbors(c))


def update_explored(
    state: PlannerState, observations: Iterable[tuple[CubeCoord, Occupancy]]
) -> PlannerState:
    """Merge sensor results into the explored map.

    Sets ``state.explored_changed`` when at least one new hex was added; the
    flag is consumed by the next call to :func:`next_hex`.
    """
    for c, status in observations:
        status = Occupancy(status)
        known = state.explored.get(c)
        if known is None:
            state.explored[c] = status
            state.explored_changed = True
        elif known is not status:
            raise ConflictingObservation(f"{c} was {known.name}, now reported {status.name}")
    return state


def neighbor_score(state: PlannerState, candidate: CubeCoord) -> int:
    return sum(1 for n in neighbors(candidate) if state.is_undesired(n))


def adjacent_candidates(state: PlannerState) -> list[CubeCoord]:
    return [n for n in neighbors(state.current) if state.is_free(n) and n not in state.visited]


def select_next_adjacent(state: PlannerState) -> Optional[CubeCoord]:
    """Unvisited free neighbor with the most visited/occupied neighbors.

    Ties keep the first candidate in neighbor order.
    """
    best, best_score = None, -1
    for cand in adjacent_candidates(state):
        score = neighbor_score(state, cand)
        if score > best_score:
            best, best_score = cand, score
    return best


def select_revisit_target(state: PlannerState) -> Optional[CubeCoord]:
    """Most recently visited hex that still has an unvisited free neighbor."""
    seen = set()
    for _, hex_ in reversed(state.path_history):
        if hex_ in seen:
            continue
        seen.add(hex_)
        if state.has_open_neighbor(hex_):
            return hex_
    return None


def astar_hex(
    start: CubeCoord, goal: CubeCoord, explored: dict[CubeCoord, Occupancy]
) -> list[CubeCoord]:
    """Shortest path through explored free hexes, excluding ``start``.

    Heuristic is the hex distance; open-set ties go to the earliest pushed
    node so the result is deterministic.
    """
    if start == goal:
        raise ValueError("start and goal must differ")
    if explored.get(goal) is not Occupancy.FREE:
        raise NoPath(f"goal {goal} is not explored free")

    counter = itertools.count()
    open_heap = [(hex_distance(start, goal), next(counter), start)]
    g_score = {start: 0}
    parent: dict[CubeCoord, CubeCoord] = {}
    closed = set()

    while open_heap:
        _, _, node = heapq.heappop(open_heap)
        if node == goal:
            path = [node]
            while path[-1] in parent and parent[path[-1]] != start:
                path.append(parent[path[-1]])
            return path[::-1]
        if node in closed:
            continue
        closed.add(node)
        g_next = g_score[node] + 1
        for n in neighbors(node):
            if n in closed or explored.get(n) is not Occupancy.FREE:
                continue
            if g_next < g_score.get(n, g_next + 1):
                g_score[n] = g_next
                parent[n] = node
                heapq.heappush(open_heap, (g_next + hex_distance(n, goal), next(counter), n))
    raise NoPath(f"no explored-free route from {start} to {goal}")


def next_hex(state: PlannerState) -> tuple[Optional[CubeCoord], list[CubeCoord]]:
    """Pick the next hex one hop away and update the cached shortest path."""
    changed = state.explored_changed
    state.explored_changed = False

    nxt = select_next_adjacent(state)
    if nxt is not None:
        state.cached_path = []
        return nxt, state.cached_path

    if changed or not state.cached_path:
        target = select_revisit_target(state)
        if target is None:
            state.cached_path = []
            return None, state.cached_path
        route = astar_hex(state.current, target, state.explored)
        state.cached_path = route[1:]
        return route[0], state.cached_path

    nxt = state.cached_path[0]
    state.cached_path = state.cached_path[1:]
    return nxt, state.cached_path


def planner_step(state: PlannerState) -> PlannerCommand:
    """Advance the mission by one command.

    On arrival at a hex the step is recorded and, for HDCP, an ``Observe`` is
    returned if the hex is new.  The following call makes the transition
    decision.  HDCP-E never observes.
    """
    if state.done:
        return Done()

    if not state.awaiting_decision:
        if not state.is_free(state.current):
            raise ValueError(f"current hex {state.current} must be sensed free before planning")
        state.path_history.append((state.step, state.current))
        first_visit = state.current not in state.visited
        state.visited.add(state.current)
        state.awaiting_decision = True
        if first_visit and state.variant is Variant.HDCP:
            state.log.append(_log_line(state, "observe"))
            return Observe(state.current)

    nxt, _ = next_hex(state)
    state.awaiting_decision = False
    state.log.append(_log_line(state, "transit" if nxt is not None else "done"))
    state.step += 1
    if nxt is None:
        state.done = True
        return Done()
    prev = state.current
    state.current = nxt
    return Transition(prev, nxt)


def is_mission_complete(state: PlannerState) -> bool:
    return not adjacent_candidates(state) and select_revisit_target(state) is None


def _log_line(state: PlannerState, mode: str) -> str:
    c = state.current
    return f"{state.step}\t{c.x},{c.y},{c.z}\t{mode}\t{len(state.visited)}\t{len(state.explored)}"


def format_trace_log(state: PlannerState) -> str:
    header = "step\thex\tmode\tvisited\texplored"
    return "\n".join([header, *state.log]) + "\n"

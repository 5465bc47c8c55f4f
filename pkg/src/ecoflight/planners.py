"""Path planners over voxel worlds.

* ``ecoflight``        -- A* with energy edge costs and an admissible,
                          consistent lower-bound heuristic; returns
                          energy-optimal routes.
* ``dijkstra_energy``  -- independently written uniform-cost search used
                          as an optimality oracle.
* ``direct_path``      -- obstacle-agnostic straight flight between the
                          endpoints (energy lower bound).
* ``direct_distance_astar`` -- follows the straight line and patches
                          blockages with localized shortest-distance
                          detours.
* ``rise_and_traverse`` -- climbs/descends to the goal altitude first,
                          then traverses horizontally, detouring without
                          dropping below the goal altitude.

All planners price edges with the same energy model, are deterministic
(ties broken toward larger cost-from-start, then lexicographic cell
order), and report expanded-node counts and wall time.
"""
from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .energy import (DroneParams, FlightPath, Segment, level_cost_per_meter,
                     path_energy, segment_energy)
from .world import Cell, GridWorld, as_cell, is_free, neighbors, raster_line

PathOrIO = Path | str


class OccupiedEndpointError(ValueError):
    """Start or goal cell is occupied (or out of bounds)."""


@dataclass
class PlanResult:
    algorithm: str
    status: str                       # "found" | "no_path"
    path: Optional[FlightPath]        # None when no path exists
    total_energy: float               # J (0.0 when no_path)
    expanded: int                     # nodes expanded across all searches
    elapsed: float                    # wall-clock seconds
    collision_free: Optional[bool]    # None when no_path

    @property
    def found(self) -> bool:
        return self.status == "found"


# 26-connected neighborhood, lexicographic offset order
_OFFSETS = tuple(
    (dx, dy, dz)
    for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)
    if (dx, dy, dz) != (0, 0, 0)
)
_STEP_LEN = tuple(math.sqrt(dx * dx + dy * dy + dz * dz) for dx, dy, dz in _OFFSETS)


def _energy_costs(p: DroneParams) -> list[float]:
    """Energy of each unit grid step at cruise speed, indexed like _OFFSETS."""
    origin = (0.0, 0.0, 0.0)
    return [segment_energy(p, Segment.cruise(origin, off, p.v_c))
            for off in _OFFSETS]


class _SearchSpace:
    """World flattened to plain lists with a blocked one-cell border.

    The border removes per-neighbor bounds checks: moving off the grid
    lands in a padded cell that is simply not free.  Flat indices order
    cells lexicographically by (x, y, z), which the planners exploit for
    deterministic tie-breaking.
    """

    __slots__ = ("world", "size", "free", "xs", "ys", "zs", "deltas", "_sx", "_sy")

    def __init__(self, world: GridWorld):
        nx, ny, nz = world.shape
        px, py, pz = nx + 2, ny + 2, nz + 2
        self.world = world
        self.size = px * py * pz
        self._sx = py * pz
        self._sy = pz
        padded = np.zeros((px, py, pz), dtype=bool)
        padded[1:nx + 1, 1:ny + 1, 1:nz + 1] = world.free_mask
        self.free = padded.ravel().tolist()
        idx = np.arange(self.size)
        self.xs = (idx // (py * pz) - 1).tolist()
        self.ys = (idx % (py * pz) // pz - 1).tolist()
        self.zs = (idx % pz - 1).tolist()
        self.deltas = tuple(dx * self._sx + dy * self._sy + dz
                            for dx, dy, dz in _OFFSETS)

    def encode(self, c: Cell) -> int:
        return (c[0] + 1) * self._sx + (c[1] + 1) * self._sy + (c[2] + 1)

    def decode(self, idx: int) -> Cell:
        return Cell(self.xs[idx], self.ys[idx], self.zs[idx])

    def backtrack(self, parent: list[int], idx: int) -> list[Cell]:
        cells = []
        while idx != -1:
            cells.append(self.decode(idx))
            idx = parent[idx]
        cells.reverse()
        return cells


def heuristic_lb(p: DroneParams, n: Cell, goal: Cell) -> float:
    """Admissible remaining-cost estimate.

    Every route covers at least the Euclidean distance at the level
    per-meter cost and must pay for the unavoidable net climb; both bounds
    hold for any 26-connected free path, and the estimate satisfies the
    edge triangle inequality, so A* never reopens closed nodes.
    """
    n = as_cell(n)
    goal = as_cell(goal)
    climb = goal.z - n.z
    est = level_cost_per_meter(p) * math.dist(n, goal)
    if climb > 0:
        est += p.m * p.g * climb
    return est


def _require_free(world: GridWorld, start: Cell, goal: Cell) -> None:
    for name, c in (("start", start), ("goal", goal)):
        if not is_free(world, c):
            raise OccupiedEndpointError(
                f"{name} cell {tuple(c)} is occupied or out of bounds")


# ---------------------------------------------------------------------------
# EcoFlight: energy-cost A*
# ---------------------------------------------------------------------------

def _energy_astar(world: GridWorld, p: DroneParams, start: Cell,
                  goal: Cell) -> tuple[Optional[list[Cell]], int]:
    sp = _SearchSpace(world)
    s, t = sp.encode(start), sp.encode(goal)
    free, xs, ys, zs, deltas = sp.free, sp.xs, sp.ys, sp.zs, sp.deltas
    costs = _energy_costs(p)
    k_m = level_cost_per_meter(p)
    mg = p.m * p.g
    gx, gy, gz = goal
    sqrt = math.sqrt

    def h(n: int) -> float:
        dx = xs[n] - gx
        dy = ys[n] - gy
        dz = zs[n] - gz
        est = k_m * sqrt(dx * dx + dy * dy + dz * dz)
        if dz < 0:
            est += mg * -dz
        return est

    g = [math.inf] * sp.size
    parent = [-1] * sp.size
    closed = bytearray(sp.size)
    g[s] = 0.0
    heap = [(h(s), 0.0, s)]
    push, pop = heapq.heappush, heapq.heappop
    expanded = 0
    while heap:
        _, neg_g, cur = pop(heap)
        if cur == t:
            return sp.backtrack(parent, t), expanded
        if closed[cur]:
            continue
        closed[cur] = 1
        expanded += 1
        gc = g[cur]
        for k in range(26):
            n = cur + deltas[k]
            if not free[n] or closed[n]:
                continue
            tg = gc + costs[k]
            if tg < g[n]:
                g[n] = tg
                parent[n] = cur
                # ties: prefer larger g, then lexicographic cell order
                push(heap, (tg + h(n), -tg, n))
    return None, expanded


def ecoflight(world: GridWorld, p: DroneParams, start: Cell, goal: Cell) -> PlanResult:
    """Plan the minimum-energy route from start to goal."""
    start, goal = as_cell(start), as_cell(goal)
    _require_free(world, start, goal)
    t0 = time.perf_counter()
    cells, expanded = _energy_astar(world, p, start, goal)
    return _grid_result("ecoflight", world, p, cells, expanded,
                        time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Dijkstra oracle
# ---------------------------------------------------------------------------

def dijkstra_energy(world: GridWorld, p: DroneParams, start: Cell,
                    goal: Cell) -> PlanResult:
    """Uniform-cost search with the same energy edge costs.

    Kept structurally independent of the A* implementation (dict-based
    textbook loop over the public neighbor relation) so the two can verify
    each other: on every instance both must report the same total energy.
    """
    start, goal = as_cell(start), as_cell(goal)
    _require_free(world, start, goal)
    t0 = time.perf_counter()

    step_cost = dict(zip(_OFFSETS, _energy_costs(p)))
    mask = world.free_mask.tolist()
    nx, ny, nz = world.shape
    dist: dict[Cell, float] = {start: 0.0}
    prev: dict[Cell, Cell] = {}
    settled: set[Cell] = set()
    heap: list[tuple[float, Cell]] = [(0.0, start)]
    expanded = 0
    found = False
    while heap:
        d, cur = heapq.heappop(heap)
        if cur in settled:
            continue
        if cur == goal:
            found = True
            break
        settled.add(cur)
        expanded += 1
        cx, cy, cz = cur
        for off in _OFFSETS:
            x, y, z = cx + off[0], cy + off[1], cz + off[2]
            if not (0 <= x < nx and 0 <= y < ny and 0 <= z < nz):
                continue
            if not mask[x][y][z]:
                continue
            nb = Cell(x, y, z)
            if nb in settled:
                continue
            nd = d + step_cost[off]
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                prev[nb] = cur
                heapq.heappush(heap, (nd, nb))

    if not found:
        return PlanResult("dijkstra", "no_path", None, 0.0, expanded,
                          time.perf_counter() - t0, None)
    cells = [goal]
    while cells[-1] != start:
        cells.append(prev[cells[-1]])
    cells.reverse()
    return _grid_result("dijkstra", world, p, cells, expanded,
                        time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Direct path
# ---------------------------------------------------------------------------

def direct_path(world: GridWorld, p: DroneParams, start: Cell, goal: Cell) -> PlanResult:
    """Fly the straight line from start to goal, ignoring obstacles.

    The flight is the continuous segment between the endpoints (one
    segment, Euclidean length); the cells it crosses are only checked to
    report whether the line happens to be collision-free.
    """
    start, goal = as_cell(start), as_cell(goal)
    t0 = time.perf_counter()
    clear = all(is_free(world, c) for c in raster_line(start, goal))
    if start == goal:
        path = FlightPath.from_positions([start])
    else:
        path = FlightPath.from_positions([start, goal])
    total = path_energy(p, path)
    return PlanResult("direct_path", "found", path, total, 0,
                      time.perf_counter() - t0, clear)


# ---------------------------------------------------------------------------
# Localized distance A* and the line-following baselines
# ---------------------------------------------------------------------------

def _distance_astar(sp: _SearchSpace, s: int, t: int, z_floor: Optional[int],
                    prefer_high_z: bool) -> tuple[Optional[list[Cell]], int]:
    """Plain shortest-distance A* (meters), optionally confined to z >= z_floor."""
    free, xs, ys, zs, deltas = sp.free, sp.xs, sp.ys, sp.zs, sp.deltas
    gx, gy, gz = xs[t], ys[t], zs[t]
    sqrt = math.sqrt

    def h(n: int) -> float:
        dx = xs[n] - gx
        dy = ys[n] - gy
        dz = zs[n] - gz
        return sqrt(dx * dx + dy * dy + dz * dz)

    g = [math.inf] * sp.size
    parent = [-1] * sp.size
    closed = bytearray(sp.size)
    g[s] = 0.0
    # tie order: (optionally) higher cells first, then larger g, then cell order
    heap = [(h(s), -zs[s], 0.0, s)] if prefer_high_z else [(h(s), 0.0, s)]
    push, pop = heapq.heappush, heapq.heappop
    expanded = 0
    while heap:
        entry = pop(heap)
        cur = entry[-1]
        if cur == t:
            return sp.backtrack(parent, t), expanded
        if closed[cur]:
            continue
        closed[cur] = 1
        expanded += 1
        gc = g[cur]
        for k in range(26):
            n = cur + deltas[k]
            if not free[n] or closed[n]:
                continue
            if z_floor is not None and zs[n] < z_floor:
                continue
            tg = gc + _STEP_LEN[k]
            if tg < g[n]:
                g[n] = tg
                parent[n] = cur
                f = tg + h(n)
                if prefer_high_z:
                    push(heap, (f, -zs[n], -tg, n))
                else:
                    push(heap, (f, -tg, n))
    return None, expanded


def _follow_with_detours(
    world: GridWorld,
    line: list[Cell],
    detour: Callable[[Cell, Cell], tuple[Optional[list[Cell]], int]],
) -> tuple[Optional[list[Cell]], int]:
    """Walk a waypoint line, replacing blocked stretches with detours.

    On hitting a blocked cell the detour runs from the last free line cell
    to the earliest later free cell on the line, then line-following
    resumes there.  The final line cell must be free, which guarantees a
    rejoin target always exists.
    """
    path = [line[0]]
    expanded = 0
    i = 0
    last = len(line) - 1
    while i < last:
        if is_free(world, line[i + 1]):
            path.append(line[i + 1])
            i += 1
            continue
        k = i + 2
        while not is_free(world, line[k]):
            k += 1
        seg, exp = detour(line[i], line[k])
        expanded += exp
        if seg is None:
            return None, expanded
        path.extend(seg[1:])
        i = k
    return path, expanded


def direct_distance_astar(world: GridWorld, p: DroneParams, start: Cell,
                          goal: Cell) -> PlanResult:
    """Follow the straight line, patching blockages with shortest detours.

    Detours minimize travel distance (not energy); the stitched route is
    then priced with the full energy model.
    """
    start, goal = as_cell(start), as_cell(goal)
    _require_free(world, start, goal)
    t0 = time.perf_counter()
    sp = _SearchSpace(world)

    def detour(a: Cell, b: Cell) -> tuple[Optional[list[Cell]], int]:
        return _distance_astar(sp, sp.encode(a), sp.encode(b), None, False)

    cells, expanded = _follow_with_detours(world, raster_line(start, goal), detour)
    return _grid_result("direct_distance_astar", world, p, cells, expanded,
                        time.perf_counter() - t0)


def rise_and_traverse(world: GridWorld, p: DroneParams, start: Cell,
                      goal: Cell) -> PlanResult:
    """Match the goal altitude vertically, then traverse horizontally.

    Blockages in either phase trigger shortest-distance detours that never
    drop below the goal altitude and prefer higher cells on ties.  Because
    free space is upward-closed above obstacle columns, the climbing phase
    itself can never be blocked; only descents and the traverse detour.
    """
    start, goal = as_cell(start), as_cell(goal)
    _require_free(world, start, goal)
    t0 = time.perf_counter()
    sp = _SearchSpace(world)

    line = [start]
    zstep = 1 if goal.z > start.z else -1
    for z in range(start.z + zstep, goal.z + zstep, zstep):
        line.append(Cell(start.x, start.y, z))
    line.extend(raster_line(Cell(start.x, start.y, goal.z), goal)[1:])

    def detour(a: Cell, b: Cell) -> tuple[Optional[list[Cell]], int]:
        return _distance_astar(sp, sp.encode(a), sp.encode(b), goal.z, True)

    cells, expanded = _follow_with_detours(world, line, detour)
    return _grid_result("rise_and_traverse", world, p, cells, expanded,
                        time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Result assembly and documents
# ---------------------------------------------------------------------------

def _grid_result(algorithm: str, world: GridWorld, p: DroneParams,
                 cells: Optional[list[Cell]], expanded: int,
                 elapsed: float) -> PlanResult:
    if cells is None:
        return PlanResult(algorithm, "no_path", None, 0.0, expanded, elapsed, None)
    path = FlightPath.from_cells(cells)
    total = path_energy(p, path)
    clear = all(is_free(world, c) for c in cells)
    return PlanResult(algorithm, "found", path, total, expanded, elapsed, clear)


ALGORITHMS: dict[str, Callable[[GridWorld, DroneParams, Cell, Cell], PlanResult]] = {
    "ecoflight": ecoflight,
    "dijkstra": dijkstra_energy,
    "direct_path": direct_path,
    "direct_distance_astar": direct_distance_astar,
    "rise_and_traverse": rise_and_traverse,
}


def plan_document(result: PlanResult) -> dict:
    """Plan result as a plain JSON-ready mapping."""
    waypoints: list[list] = []
    if result.path is not None:
        for row in result.path.waypoints:
            waypoints.append([int(v) if float(v).is_integer() else float(v)
                              for v in row])
    return {
        "algorithm": result.algorithm,
        "status": result.status,
        "waypoints": waypoints,
        "total_energy_j": result.total_energy,
        "expanded": result.expanded,
        "elapsed_s": result.elapsed,
        "collision_free": result.collision_free,
    }


def save_plan(result: PlanResult, sink: PathOrIO) -> None:
    text = json.dumps(plan_document(result), indent=2) + "\n"
    Path(sink).write_text(text, encoding="utf-8")


def load_plan(source: PathOrIO) -> dict:
    doc = json.loads(Path(source).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or "status" not in doc:
        raise ValueError("not a plan result document")
    return doc

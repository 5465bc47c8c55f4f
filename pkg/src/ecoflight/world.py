"""3D voxel flight regions with column obstacles.

The world is an ``nx x ny x nz`` grid of 1 m cells.  Obstacles are
full-height columns: ``heights[x][y] = h`` blocks cells ``z < h`` and a
vertical clearance margin keeps flight at least ``clearance`` cells above
every obstacle top.  Columns without an obstacle are free at all
altitudes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import IO, NamedTuple, Union

import numpy as np

PathOrIO = Union[str, Path, IO[str]]


class WorldGenerationError(Exception):
    """Requested obstacle density cannot be reached."""


class WorldFormatError(Exception):
    """World document is malformed or violates an invariant."""


class EndpointSamplingError(Exception):
    """World has too few free cells to sample endpoints."""


class Cell(NamedTuple):
    x: int
    y: int
    z: int


def as_cell(value) -> Cell:
    x, y, z = value
    return Cell(int(x), int(y), int(z))


@dataclass(frozen=True)
class GridWorld:
    """Immutable voxel world described by a per-column obstacle heightmap."""

    nx: int
    ny: int
    nz: int
    heights: np.ndarray
    clearance: int = 1

    def __post_init__(self) -> None:
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.clearance < 0:
            raise ValueError("clearance must be >= 0")
        h = np.asarray(self.heights, dtype=np.int64)
        if h.shape != (self.nx, self.ny):
            raise ValueError(f"heights must have shape ({self.nx}, {self.ny}), "
                             f"got {h.shape}")
        if h.min(initial=0) < 0 or h.max(initial=0) > self.nz:
            raise ValueError("column heights must lie in [0, nz]")
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridWorld):
            return NotImplemented
        return ((self.nx, self.ny, self.nz, self.clearance)
                == (other.nx, other.ny, other.nz, other.clearance)
                and np.array_equal(self.heights, other.heights))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def volume(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def occupied_fraction(self) -> float:
        return float(self.heights.sum()) / self.volume

    def in_bounds(self, c: Cell) -> bool:
        return 0 <= c[0] < self.nx and 0 <= c[1] < self.ny and 0 <= c[2] < self.nz

    @cached_property
    def free_mask(self) -> np.ndarray:
        """Boolean (nx, ny, nz) array of traversable cells."""
        zs = np.arange(self.nz)
        floor = np.where(self.heights > 0, self.heights + self.clearance, 0)
        mask = zs[None, None, :] >= floor[:, :, None]
        mask.setflags(write=False)
        return mask

    @cached_property
    def free_cell_count(self) -> int:
        return int(self.free_mask.sum())


def is_free(world: GridWorld, c: Cell) -> bool:
    """True when the cell is in bounds, above any obstacle plus clearance.

    Total over all inputs: out-of-bounds cells are simply not free.
    """
    x, y, z = c
    if not (0 <= x < world.nx and 0 <= y < world.ny and 0 <= z < world.nz):
        return False
    h = world.heights[x, y]
    if h == 0:
        return True
    return z >= h + world.clearance


_NEIGHBOR_OFFSETS = tuple(
    (dx, dy, dz)
    for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)
    if (dx, dy, dz) != (0, 0, 0)
)


def neighbors(world: GridWorld, c: Cell) -> list[tuple[Cell, tuple[float, float, float]]]:
    """Free 26-connected neighbors with their step vectors in meters."""
    x, y, z = c
    out = []
    for dx, dy, dz in _NEIGHBOR_OFFSETS:
        n = Cell(x + dx, y + dy, z + dz)
        if is_free(world, n):
            out.append((n, (float(dx), float(dy), float(dz))))
    return out


def raster_line(a: Cell, b: Cell) -> list[Cell]:
    """Cells crossed by the straight line from a to b, endpoints included.

    Linear interpolation with round-half-up on the dominant-axis step
    count; successive cells differ by at most one per axis.  The traversal
    is symmetric: ``raster_line(b, a)`` is the exact reverse.
    """
    a = as_cell(a)
    b = as_cell(b)
    if (b.x, b.y, b.z) < (a.x, a.y, a.z):
        return list(reversed(raster_line(b, a)))
    dx, dy, dz = b.x - a.x, b.y - a.y, b.z - a.z
    n = max(abs(dx), abs(dy), abs(dz))
    if n == 0:
        return [a]
    # floor(i*d/n + 1/2) in exact integer arithmetic
    return [Cell(a.x + (2 * i * dx + n) // (2 * n),
                 a.y + (2 * i * dy + n) // (2 * n),
                 a.z + (2 * i * dz + n) // (2 * n))
            for i in range(n + 1)]


def line_of_sight(world: GridWorld, a: Cell, b: Cell) -> bool:
    """True when every cell on the raster line from a to b is free."""
    return all(is_free(world, c) for c in raster_line(a, b))


def generate_world(nx: int, ny: int, nz: int, density: float, max_height: int,
                   seed: int, clearance: int = 1) -> GridWorld:
    """Fill random empty columns with random heights until the occupied
    voxel fraction first reaches ``density``.

    Columns are drawn uniformly from the still-empty ones and get a height
    uniform in [1, max_height], so the final fraction overshoots the target
    by less than ``max_height / (nx*ny*nz)``.  Deterministic per seed.

    Planners assume every column stays overflyable, which needs
    ``max_height <= nz - clearance - 1``; larger values (up to nz) are
    allowed so fully saturated worlds can be built.
    """
    if min(nx, ny, nz) < 1:
        raise ValueError("grid dimensions must be >= 1")
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must be in [0, 1], got {density}")
    if density > 0 and not 1 <= max_height <= nz:
        raise ValueError(f"max_height must be in [1, nz], got {max_height}")

    heights = np.zeros((nx, ny), dtype=np.int64)
    target = density * nx * ny * nz
    occupied = 0
    if occupied >= target:
        return GridWorld(nx, ny, nz, heights, clearance)

    rng = np.random.default_rng(seed)
    empty = list(range(nx * ny))
    while occupied < target:
        if not empty:
            achieved = occupied / (nx * ny * nz)
            raise WorldGenerationError(
                f"all columns full at occupied fraction {achieved:.6g}, "
                f"target density {density} unreachable")
        i = int(rng.integers(len(empty)))
        col = empty[i]
        empty[i] = empty[-1]
        empty.pop()
        h = int(rng.integers(1, max_height + 1))
        heights[col // ny, col % ny] = h
        occupied += h
    return GridWorld(nx, ny, nz, heights, clearance)


def sample_endpoints(world: GridWorld, seed: int) -> tuple[Cell, Cell]:
    """Draw two distinct free cells uniformly at random."""
    free = np.argwhere(world.free_mask)
    if len(free) < 2:
        raise EndpointSamplingError(
            f"need at least 2 free cells, world has {len(free)}")
    rng = np.random.default_rng(seed)
    i, j = rng.choice(len(free), size=2, replace=False)
    return as_cell(free[i]), as_cell(free[j])


# ---------------------------------------------------------------------------
# World files
# ---------------------------------------------------------------------------

def save_world(world: GridWorld, sink: PathOrIO, *,
               seed: int | None = None, density: float | None = None) -> None:
    """Write the world as JSON; seed/density are optional provenance."""
    doc = {
        "nx": world.nx,
        "ny": world.ny,
        "nz": world.nz,
        "clearance": world.clearance,
        "heights": world.heights.tolist(),
    }
    if seed is not None:
        doc["seed"] = seed
    if density is not None:
        doc["density"] = density
    text = json.dumps(doc, indent=2) + "\n"
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


def load_world(source: PathOrIO) -> GridWorld:
    """Parse and validate a world document; raises WorldFormatError."""
    try:
        if isinstance(source, (str, Path)):
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        else:
            doc = json.load(source)
    except json.JSONDecodeError as exc:
        raise WorldFormatError(f"not valid JSON: {exc}") from None

    if not isinstance(doc, dict):
        raise WorldFormatError("world document must be a JSON object")
    for name in ("nx", "ny", "nz", "heights"):
        if name not in doc:
            raise WorldFormatError(f"missing field '{name}'")
    dims = {}
    for name in ("nx", "ny", "nz"):
        v = doc[name]
        if not isinstance(v, int) or v < 1:
            raise WorldFormatError(f"'{name}' must be a positive integer, got {v!r}")
        dims[name] = v
    clearance = doc.get("clearance", 1)
    if not isinstance(clearance, int) or clearance < 0:
        raise WorldFormatError(f"'clearance' must be a non-negative integer, "
                               f"got {clearance!r}")

    rows = doc["heights"]
    if not isinstance(rows, list) or len(rows) != dims["nx"]:
        raise WorldFormatError(f"'heights' must be a list of {dims['nx']} rows")
    heights = np.zeros((dims["nx"], dims["ny"]), dtype=np.int64)
    for x, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dims["ny"]:
            raise WorldFormatError(
                f"heights[{x}] must be a list of {dims['ny']} integers")
        for y, h in enumerate(row):
            if not isinstance(h, int):
                raise WorldFormatError(f"heights[{x}][{y}] = {h!r} is not an integer")
            if not 0 <= h <= dims["nz"]:
                raise WorldFormatError(
                    f"heights[{x}][{y}] = {h} outside [0, nz={dims['nz']}]")
            heights[x, y] = h
    return GridWorld(dims["nx"], dims["ny"], dims["nz"], heights, clearance)

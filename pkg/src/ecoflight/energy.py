"""Flight-dynamics energy model for multirotor drones.

Forces (gravity, thrust, drag) and the per-segment energy terms (hover,
drag, acceleration, climb) are computed from a small set of physical
parameters.  A path is priced as the sum of its segment energies at a
constant cruise speed.

Note on the hover term: it is charged as weight force times segment
duration, ``m * g * (length / v_c)``.  Dimensionally that is N*s rather
than joules; it is nevertheless used as-is as the model's cost currency,
so all "energy" figures should be read as model cost units.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterator, Sequence, Union

import numpy as np

Vec3 = Union[Sequence[float], np.ndarray]
PathOrIO = Union[str, Path, IO[str]]

PARAM_FIELDS = ("m", "g", "rho", "cd", "area", "v_c",
                "clamp_regen", "include_initial_accel")


@dataclass(frozen=True)
class DroneParams:
    """Physical parameters and model options of one drone.

    m : mass (kg)
    g : gravitational acceleration (m/s^2)
    rho : air density (kg/m^3)
    cd : drag coefficient (dimensionless)
    area : cross-sectional area (m^2)
    v_c : cruise speed (m/s)
    clamp_regen : clamp negative acceleration/descent energy to zero
        (multirotors do not recover energy)
    include_initial_accel : charge one 0 -> v_c kinetic-energy term per path
    """

    m: float = 1.5
    g: float = 9.81
    rho: float = 1.225
    cd: float = 1.0
    area: float = 0.01
    v_c: float = 3.0
    clamp_regen: bool = True
    include_initial_accel: bool = False

    def __post_init__(self) -> None:
        for name in ("m", "g", "rho", "area", "v_c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.cd < 0:
            raise ValueError(f"cd must be >= 0, got {self.cd}")

    def with_speed(self, v_c: float) -> "DroneParams":
        return replace(self, v_c=v_c)


@dataclass(frozen=True)
class Segment:
    """One leg of a flight: positions (m), endpoint velocities (m/s), duration (s)."""

    p_old: np.ndarray
    p_new: np.ndarray
    v_old: np.ndarray
    v_new: np.ndarray
    dt: float

    def __post_init__(self) -> None:
        for name in ("p_old", "p_new", "v_old", "v_new"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (3,) or not np.all(np.isfinite(vec)):
                raise ValueError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, vec)
        if self.dt < 0 or not math.isfinite(self.dt):
            raise ValueError(f"dt must be finite and >= 0, got {self.dt}")
        if self.length > 0 and self.dt == 0:
            raise ValueError("segment with nonzero displacement needs dt > 0")

    @property
    def displacement(self) -> np.ndarray:
        return self.p_new - self.p_old

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.p_new - self.p_old))

    @classmethod
    def cruise(cls, p_old: Vec3, p_new: Vec3, v_c: float) -> "Segment":
        """Segment flown at constant speed v_c along its own direction."""
        a = np.asarray(p_old, dtype=float)
        b = np.asarray(p_new, dtype=float)
        d = b - a
        dist = float(np.linalg.norm(d))
        if dist == 0:
            v = np.zeros(3)
            return cls(a, b, v, v, 0.0)
        v = v_c * d / dist
        return cls(a, b, v, v, dist / v_c)

    @classmethod
    def hover(cls, position: Vec3, duration: float) -> "Segment":
        p = np.asarray(position, dtype=float)
        v = np.zeros(3)
        return cls(p, p, v, v, duration)


# ---------------------------------------------------------------------------
# Forces
# ---------------------------------------------------------------------------

def gravity_force(p: DroneParams) -> np.ndarray:
    """Weight vector (0, 0, -m*g) in newtons."""
    return np.array([0.0, 0.0, -p.m * p.g])


def thrust_force(p: DroneParams, v_old: Vec3, v_new: Vec3, dt: float) -> np.ndarray:
    """Thrust m*(v_new - v_old)/dt; a hovering drone thrusts m*g straight up."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    v0 = np.asarray(v_old, dtype=float)
    v1 = np.asarray(v_new, dtype=float)
    if not v0.any() and not v1.any():
        return np.array([0.0, 0.0, p.m * p.g])
    return p.m * (v1 - v0) / dt


def drag_force(p: DroneParams, v: Vec3) -> np.ndarray:
    """Aerodynamic drag 0.5*cd*area*rho*|v|^2, directed against the velocity."""
    vel = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(vel))
    if speed == 0:
        return np.zeros(3)
    return -0.5 * p.cd * p.area * p.rho * speed * vel


def net_force(p: DroneParams, segment: Segment) -> np.ndarray:
    """Sum of gravity, drag (at the segment's entry velocity), and thrust."""
    return (gravity_force(p)
            + drag_force(p, segment.v_old)
            + thrust_force(p, segment.v_old, segment.v_new, segment.dt))


def work_net(p: DroneParams, segment: Segment) -> float:
    """Work done by the net force over the segment displacement (diagnostic)."""
    return float(np.dot(net_force(p, segment), segment.displacement))


# ---------------------------------------------------------------------------
# Energy terms
# ---------------------------------------------------------------------------

def hover_energy(p: DroneParams, d_t: float) -> float:
    """Cost of holding altitude for d_t seconds: m*g*d_t."""
    if d_t < 0:
        raise ValueError(f"hover time must be >= 0, got {d_t}")
    return p.m * p.g * d_t


def drag_energy(p: DroneParams, speed: float, d: float) -> float:
    """Work against drag over distance d at the given speed."""
    return 0.5 * p.cd * p.area * p.rho * speed * speed * d


def accel_energy(p: DroneParams, v_old: float, v_new: float) -> float:
    """Kinetic-energy change 0.5*m*(v_new^2 - v_old^2), clamped if configured."""
    e = 0.5 * p.m * (v_new * v_new - v_old * v_old)
    if p.clamp_regen and e < 0:
        return 0.0
    return e


def climb_energy(p: DroneParams, dz: float) -> float:
    """Potential-energy cost of a net climb; descending costs nothing."""
    return p.m * p.g * dz if dz > 0 else 0.0


def segment_energy(p: DroneParams, segment: Segment) -> float:
    """Total cost of one segment: hover + drag + acceleration + climb terms.

    Hover time is length/v_c and drag is evaluated at cruise speed,
    matching the constant-speed flight profile.  Zero-length segments
    cost nothing by convention.
    """
    dist = segment.length
    if dist == 0:
        return 0.0
    v0 = float(np.linalg.norm(segment.v_old))
    v1 = float(np.linalg.norm(segment.v_new))
    dz = float(segment.p_new[2] - segment.p_old[2])
    return (hover_energy(p, dist / p.v_c)
            + drag_energy(p, p.v_c, dist)
            + accel_energy(p, v0, v1)
            + climb_energy(p, dz))


def level_cost_per_meter(p: DroneParams) -> float:
    """Cost of one meter of level constant-speed flight: m*g/v_c + 0.5*cd*area*rho*v_c^2."""
    return p.m * p.g / p.v_c + 0.5 * p.cd * p.area * p.rho * p.v_c * p.v_c


# ---------------------------------------------------------------------------
# Flight paths
# ---------------------------------------------------------------------------

_GRID_STEPS = {-1, 0, 1}


class FlightPath:
    """Ordered waypoint list; consecutive waypoints must be distinct.

    Grid paths (``from_cells``) additionally require every step to move at
    most one cell per axis.  Waypoints are stored as an (N, 3) float array
    in meters (grid spacing is 1 m).
    """

    __slots__ = ("waypoints", "grid")

    def __init__(self, waypoints: np.ndarray, grid: bool):
        pts = np.asarray(waypoints, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise ValueError("waypoints must be a non-empty (N, 3) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("waypoints must be finite")
        steps = np.diff(pts, axis=0)
        if len(steps) and np.any(np.all(steps == 0, axis=1)):
            raise ValueError("consecutive waypoints must be distinct")
        if grid:
            if not np.all(pts == np.round(pts)):
                raise ValueError("grid waypoints must have integer coordinates")
            if len(steps) and np.any(np.abs(steps) > 1):
                bad = int(np.argmax(np.any(np.abs(steps) > 1, axis=1)))
                raise ValueError(
                    f"waypoints {bad} and {bad + 1} are not 26-adjacent")
        pts.setflags(write=False)
        self.waypoints = pts
        self.grid = grid

    @classmethod
    def from_cells(cls, cells: Sequence[Sequence[int]]) -> "FlightPath":
        return cls(np.asarray(list(cells), dtype=float), grid=True)

    @classmethod
    def from_positions(cls, positions: Sequence[Vec3]) -> "FlightPath":
        return cls(np.asarray(list(positions), dtype=float), grid=False)

    def __len__(self) -> int:
        return len(self.waypoints)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FlightPath):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.waypoints, other.waypoints)

    def cells(self) -> list[tuple[int, int, int]]:
        if not self.grid:
            raise ValueError("not a grid path")
        return [tuple(int(v) for v in row) for row in self.waypoints]

    @property
    def length_m(self) -> float:
        steps = np.diff(self.waypoints, axis=0)
        return float(np.sqrt((steps * steps).sum(axis=1)).sum())

    def segments(self, p: DroneParams) -> Iterator[Segment]:
        """Cruise-speed segments between consecutive waypoints."""
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            yield Segment.cruise(a, b, p.v_c)


def path_energy(p: DroneParams, path: FlightPath) -> float:
    """Total cost of a path at constant cruise speed.

    Sums the segment energies, plus one 0 -> v_c acceleration charge when
    ``include_initial_accel`` is set.  At constant speed the per-segment
    acceleration term vanishes, so the sum reduces to hover + drag + climb.
    """
    steps = np.diff(path.waypoints, axis=0)
    total = 0.0
    if len(steps):
        lengths = np.sqrt((steps * steps).sum(axis=1))
        climbs = np.clip(steps[:, 2], 0.0, None)
        total += float(np.sum(p.m * p.g * (lengths / p.v_c)
                              + 0.5 * p.cd * p.area * p.rho * p.v_c * p.v_c * lengths
                              + p.m * p.g * climbs))
    if p.include_initial_accel:
        total += accel_energy(p, 0.0, p.v_c)
    return total


# ---------------------------------------------------------------------------
# Parameter files
# ---------------------------------------------------------------------------

def save_params(p: DroneParams, sink: PathOrIO) -> None:
    doc = {name: getattr(p, name) for name in PARAM_FIELDS}
    _dump_json(doc, sink)

def load_params(source: PathOrIO) -> DroneParams:
    doc = _load_json(source)
    if not isinstance(doc, dict):
        raise ValueError("parameter document must be a JSON object")
    unknown = set(doc) - set(PARAM_FIELDS)
    if unknown:
        raise ValueError(f"unknown parameter fields: {sorted(unknown)}")
    try:
        return DroneParams(**doc)
    except TypeError as exc:
        raise ValueError(f"bad parameter document: {exc}") from None


def _dump_json(doc: object, sink: PathOrIO) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    else:
        json.dump(doc, sink, indent=2)
        sink.write("\n")


def _load_json(source: PathOrIO) -> object:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return json.load(fh)
    return json.load(source)

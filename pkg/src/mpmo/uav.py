"""Biparty multiobjective UAV path planning.

An efficiency party (path length, height change, flight energy, hover-point
distance) and a safety party (fatality risk, property risk, noise) share one
trajectory over a synthetic urban world.

Units: track-point x and y are grid units (``cell_size`` meters each), z is
meters above ground. Every objective is evaluated on a batch of paths at once;
the single-path functions are thin wrappers.

Interpretations where the model leaves values open (all configurable through
:class:`WorldConfig`):

* genome of 88 genes decodes column by column: 44 (y, z) pairs at x = 2..45,
  plus the start (1, 1) and goal (45, 45) columns;
* atmospheric scale height 10.7 km;
* fatality kernels are logistic in impact energy, ``E / (E + E0)`` with
  ``E = W * G * z``;
* crash probability is a per-flight-hour rate times the dwell time at each
  track point;
* vehicle density is the population density restricted to two road ridges;
* received noise level is ``L_h - 20 log10(range)``; points heard below the
  threshold contribute nothing. ``range`` combines altitude and the horizontal
  distance to the nearest population center.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from pathlib import Path as FilePath

import numpy as np

from mpmo.core import Bounds, ContractViolation, MPProblem

GENOME_LENGTH = 88
N_COLUMNS = GENOME_LENGTH // 2
CASES = ("C1", "C2", "C3", "C4", "C5", "C6")
WORLD_FORMAT_VERSION = 1


@dataclass(frozen=True)
class WorldConfig:
    extent: float = 50.0
    cell_size: float = 100.0
    # population density: radial basis centers
    n_centers: int = 5
    peak_density: float = 0.01  # persons / m^2
    center_range: tuple[float, float] = (10.0, 40.0)
    spread_range: tuple[float, float] = (5.0, 15.0)
    # vehicles: density along two road ridges
    vehicle_scale: float = 0.5
    road_range: tuple[float, float] = (15.0, 35.0)
    road_width: float = 1.5
    # building heights (lognormal)
    building_mu: float = 3.04670
    building_sigma: float = 0.76023
    # third-party risk
    p_crash_per_hour: float = 1e-4
    impact_area: float = 0.5  # m^2
    fatality_kernel: str = "logistic-energy"
    e0_pedestrian: float = 100.0  # J
    e0_vehicle: float = 1e5  # J
    noise_k: float = 1.0
    noise_source_db: float = 80.0
    noise_threshold_db: float = 40.0
    # UAV
    weight: float = 1.38  # kg
    gravity: float = 9.81
    rho0: float = 1.225
    rotor_area: float = 0.1  # m^2
    rotors: int = 4
    speed: float = 10.0  # m/s
    scale_height_km: float = 10.7
    # limits
    h_min: float = 10.0
    h_max: float = 120.0
    alpha_max: float = math.pi / 3
    beta_max: float = math.pi / 4
    # mission
    start: tuple[float, float] = (1.0, 1.0)
    goal: tuple[float, float] = (45.0, 45.0)
    uhps: tuple[tuple[float, float], ...] = ((25.0, 30.0), (34.0, 20.0), (40.0, 35.0))

    def __post_init__(self):
        positive = ("extent", "cell_size", "building_sigma", "impact_area", "weight", "gravity",
                    "rho0", "rotor_area", "rotors", "speed", "scale_height_km", "h_min", "h_max",
                    "alpha_max", "beta_max", "e0_pedestrian", "e0_vehicle")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ContractViolation(f"world parameter {name} must be positive")
        for name in ("peak_density", "p_crash_per_hour", "vehicle_scale", "noise_k"):
            if getattr(self, name) < 0:
                raise ContractViolation(f"world parameter {name} must be non-negative")
        if not self.h_min < self.h_max:
            raise ContractViolation("h_min must be below h_max")

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        d = dict(d)
        for key in ("center_range", "spread_range", "road_range", "start", "goal"):
            if key in d:
                d[key] = tuple(d[key])
        if "uhps" in d:
            d["uhps"] = tuple(tuple(u) for u in d["uhps"])
        return cls(**d)


# fatality kernel registry: name -> f(z, e0, world_config) -> probability in [0, 1)
FatalityKernel = Callable[[np.ndarray, float, WorldConfig], np.ndarray]


def _logistic_energy(z, e0, cfg):
    energy = cfg.weight * cfg.gravity * np.maximum(z, 0.0)
    return energy / (energy + e0)


FATALITY_KERNELS: dict[str, FatalityKernel] = {"logistic-energy": _logistic_energy}


def register_fatality_kernel(name: str, kernel: FatalityKernel) -> None:
    FATALITY_KERNELS[name] = kernel


@dataclass
class World:
    config: WorldConfig
    seed: int
    pop_centers: np.ndarray  # (k, 4): cx, cy, weight, spread  (grid units)
    roads: np.ndarray  # (2,): x of the north-south road, y of the east-west road

    def density_p(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for cx, cy, w, s in self.pop_centers:
            out = out + w * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * s * s))
        return out

    def density_v(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = self.config.road_width
        ridge = np.maximum(np.exp(-((x - self.roads[0]) ** 2) / (2 * w * w)),
                           np.exp(-((y - self.roads[1]) ** 2) / (2 * w * w)))
        return self.config.vehicle_scale * self.density_p(x, y) * ridge

    def center_distance(self, x, y):
        """Horizontal distance in meters to the nearest population center."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.pop_centers.shape[0] == 0:
            return np.full(np.broadcast(x, y).shape, np.inf)
        dx = x[..., None] - self.pop_centers[:, 0]
        dy = y[..., None] - self.pop_centers[:, 1]
        return np.sqrt(dx * dx + dy * dy).min(axis=-1) * self.config.cell_size

    def r_pedestrian(self, z):
        return FATALITY_KERNELS[self.config.fatality_kernel](np.asarray(z, dtype=float),
                                                            self.config.e0_pedestrian, self.config)

    def r_vehicle(self, z):
        return FATALITY_KERNELS[self.config.fatality_kernel](np.asarray(z, dtype=float),
                                                            self.config.e0_vehicle, self.config)

    def to_dict(self) -> dict:
        return {
            "format_version": WORLD_FORMAT_VERSION,
            "seed": self.seed,
            "config": asdict(self.config),
            "pop_centers": self.pop_centers.tolist(),
            "roads": self.roads.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "World":
        if d.get("format_version") != WORLD_FORMAT_VERSION:
            raise ContractViolation(f"unsupported world format {d.get('format_version')!r}")
        return cls(WorldConfig.from_dict(d["config"]), int(d["seed"]),
                   np.asarray(d["pop_centers"], dtype=float).reshape(-1, 4),
                   np.asarray(d["roads"], dtype=float))

    @property
    def version_id(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return f"world-s{self.seed}-v{WORLD_FORMAT_VERSION}-{hashlib.sha256(blob).hexdigest()[:12]}"


def generate_world(seed: int = 1, config: WorldConfig | None = None) -> World:
    """Deterministic synthetic world from ``seed``.

    Population centers, weights, spreads and road positions come from one
    seeded generator; weights are rescaled so the density peak over the map
    equals ``config.peak_density``.
    """
    cfg = config or WorldConfig()
    rng = np.random.default_rng(seed)
    k = cfg.n_centers
    centers = rng.uniform(*cfg.center_range, size=(k, 2))
    weights = rng.uniform(0.5, 1.0, size=k)
    spreads = rng.uniform(*cfg.spread_range, size=k)
    roads = rng.uniform(*cfg.road_range, size=2)
    world = World(cfg, int(seed), np.column_stack([centers, weights, spreads]), roads)
    if k:
        grid = np.linspace(0.0, cfg.extent, 201)
        gx, gy = np.meshgrid(grid, grid)
        peak = max(world.density_p(gx, gy).max(), world.density_p(centers[:, 0], centers[:, 1]).max())
        world.pop_centers[:, 2] *= cfg.peak_density / peak
    return world


def save_world(world: World, path) -> FilePath:
    path = FilePath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(world.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_world(path) -> World:
    return World.from_dict(json.loads(FilePath(path).read_text(encoding="utf-8")))


@dataclass
class Path:
    """Track points ``(x, y, z)``: x, y in grid units, z in meters."""

    points: np.ndarray
    cell_size: float = 100.0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 3 or self.points.shape[0] < 3:
            raise ContractViolation("a path needs at least 3 track points of (x, y, z)")

    @property
    def n(self) -> int:
        return self.points.shape[0] - 1

    def meters(self) -> np.ndarray:
        return self.points * np.array([self.cell_size, self.cell_size, 1.0])


def decode_batch(G, cfg: WorldConfig) -> np.ndarray:
    """Decode an ``(N, 88)`` genome batch into ``(N, 46, 3)`` track points."""
    G = np.clip(np.atleast_2d(np.asarray(G, dtype=float)), 0.0, 1.0)
    N = G.shape[0]
    P = np.empty((N, N_COLUMNS + 2, 3))
    P[:, 1:-1, 0] = cfg.start[0] + np.arange(1, N_COLUMNS + 1)
    P[:, 1:-1, 1] = cfg.start[1] + (cfg.goal[1] - cfg.start[1]) * G[:, 0::2]
    P[:, 1:-1, 2] = cfg.h_min + (cfg.h_max - cfg.h_min) * G[:, 1::2]
    P[:, 0] = (cfg.start[0], cfg.start[1], 0.0)
    P[:, 0, 2] = P[:, 1, 2]
    P[:, -1, 0], P[:, -1, 1] = cfg.goal
    P[:, -1, 2] = P[:, -2, 2]
    return P


def decode_path(genome, world: World) -> Path:
    g = np.asarray(genome, dtype=float)
    if g.shape != (GENOME_LENGTH,):
        raise ContractViolation(f"genome must have exactly {GENOME_LENGTH} genes, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ContractViolation("genome contains NaN or Inf")
    clamped = bool(np.any((g < 0.0) | (g > 1.0)))
    P = decode_batch(g, world.config)[0]
    return Path(P, world.config.cell_size, {"clamped_genes": clamped})


# batch objectives; P has shape (N, K, 3) in path units


def _to_meters(P, cell):
    return P * np.array([cell, cell, 1.0])


def _segments(P, cell):
    return np.diff(_to_meters(P, cell), axis=1)


def length_batch(P, cfg):
    return np.linalg.norm(_segments(P, cfg.cell_size), axis=2).sum(axis=1)


def fuel_batch(P, cfg):
    seg = _segments(P, cfg.cell_size)
    seg_len = np.linalg.norm(seg, axis=2)
    z = P[:, :, 2]
    rho = cfg.rho0 * np.exp(-((z[:, 1:] + z[:, :-1]) / 1000.0) / (2.0 * cfg.scale_height_km))
    hover = cfg.weight ** 1.5 * np.sqrt(cfg.gravity ** 3 / (2.0 * rho * cfg.rotor_area * cfg.rotors))
    climb = np.maximum(0.0, seg[:, :, 2])
    return (hover * seg_len / cfg.speed + climb * cfg.weight * cfg.gravity).sum(axis=1)


def height_batch(P):
    return np.abs(np.diff(P[:, :, 2], axis=1)).sum(axis=1)


def distance_batch(P, cfg):
    total = np.zeros(P.shape[0])
    for ux, uy in cfg.uhps:
        d = np.hypot(P[:, :, 0] - ux, P[:, :, 1] - uy)
        total += d.min(axis=1)
    return total * cfg.cell_size


def _dwell_hours(P, cfg):
    seg_len = np.linalg.norm(_segments(P, cfg.cell_size), axis=2)
    padded = np.pad(seg_len, ((0, 0), (1, 1)))
    return (padded[:, :-1] + padded[:, 1:]) / (2.0 * cfg.speed) / 3600.0


def fatal_batch(P, world: World):
    cfg = world.config
    x, y, z = P[:, :, 0], P[:, :, 1], P[:, :, 2]
    p_crash = cfg.p_crash_per_hour * _dwell_hours(P, cfg)
    risk = world.density_p(x, y) * world.r_pedestrian(z) + world.density_v(x, y) * world.r_vehicle(z)
    return (p_crash * cfg.impact_area * risk).sum(axis=1)


def lognormal_pdf(z, mu: float, sigma: float):
    z = np.asarray(z, dtype=float)
    return np.exp(-((np.log(z) - mu) ** 2) / (2.0 * sigma * sigma)) / (z * sigma * math.sqrt(2.0 * math.pi))


def property_risk(z, cfg: WorldConfig):
    """Per-point property risk index: lognormal density, flat below its median height."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ContractViolation("property risk is defined for altitudes above 0 only")
    median = math.exp(cfg.building_mu)
    return lognormal_pdf(np.maximum(z, median), cfg.building_mu, cfg.building_sigma)


def eco_batch(P, cfg):
    return property_risk(P[:, :, 2], cfg).sum(axis=1)


def noise_batch(P, world: World):
    cfg = world.config
    x, y, z = P[:, :, 0], P[:, :, 1], P[:, :, 2]
    d = world.center_distance(x, y)
    r2 = z * z + d * d
    with np.errstate(divide="ignore"):
        level = cfg.noise_source_db - 10.0 * np.log10(r2)
    cost = cfg.noise_k * world.density_p(x, y) * cfg.noise_source_db / r2
    return np.where(level >= cfg.noise_threshold_db, cost, 0.0).sum(axis=1)


def violations_batch(P, cfg):
    """(N, 3) terrain, turning and slope violation sums; plus count of skipped segments."""
    z = P[:, :, 2]
    terrain = (np.maximum(0.0, cfg.h_min - z) + np.maximum(0.0, z - cfg.h_max)).sum(axis=1)
    horiz = np.diff(P[:, :, :2], axis=1) * cfg.cell_size
    hlen = np.linalg.norm(horiz, axis=2)
    ok = hlen > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_turn = (horiz[:, :-1] * horiz[:, 1:]).sum(axis=2) / (hlen[:, :-1] * hlen[:, 1:])
        turn = np.arccos(np.clip(cos_turn, -1.0, 1.0))
        slope = np.arctan(np.diff(z, axis=1) / hlen)
    joint_ok = ok[:, :-1] & ok[:, 1:]
    turning = np.where(joint_ok, np.maximum(0.0, np.abs(turn) - cfg.alpha_max), 0.0).sum(axis=1)
    slope_v = np.where(ok, np.maximum(0.0, np.abs(slope) - cfg.beta_max), 0.0).sum(axis=1)
    skipped = (~ok).sum(axis=1)
    return np.column_stack([terrain, turning, slope_v]), skipped


def _path_batch(path: Path, world: World | None):
    if world is not None and not math.isclose(path.cell_size, world.config.cell_size):
        raise ContractViolation("path and world disagree on cell size")
    return path.points[None, :, :]


def f_length(path: Path, world: World | None = None) -> float:
    cfg = world.config if world is not None else WorldConfig(cell_size=path.cell_size)
    return float(length_batch(_path_batch(path, world), cfg)[0])


def f_fuel(path: Path, world: World) -> float:
    return float(fuel_batch(_path_batch(path, world), world.config)[0])


def f_height(path: Path, world: World | None = None) -> float:
    return float(height_batch(_path_batch(path, world))[0])


def f_distance(path: Path, world: World) -> float:
    return float(distance_batch(_path_batch(path, world), world.config)[0])


def f_fatal(path: Path, world: World) -> float:
    return float(fatal_batch(_path_batch(path, world), world)[0])


def f_eco(path: Path, world: World) -> float:
    return float(eco_batch(_path_batch(path, world), world.config)[0])


def f_noise(path: Path, world: World) -> float:
    return float(noise_batch(_path_batch(path, world), world)[0])


def constraint_violations(path: Path, world: World) -> np.ndarray:
    """Terrain, turning and slope violation magnitudes of one path.

    Segments with zero horizontal length are skipped for the angle terms and
    counted in ``path.diagnostics["skipped_segments"]``.
    """
    v, skipped = violations_batch(_path_batch(path, world), world.config)
    path.diagnostics["skipped_segments"] = int(skipped[0])
    return v[0]


def all_objectives(P, world: World) -> dict[str, np.ndarray]:
    cfg = world.config
    return {
        "length": length_batch(P, cfg),
        "fuel": fuel_batch(P, cfg),
        "height": height_batch(P),
        "distance": distance_batch(P, cfg),
        "fatal": fatal_batch(P, world),
        "eco": eco_batch(P, cfg),
        "noise": noise_batch(P, world),
    }


# case -> ((efficiency objective terms), (safety objective terms)); terms within a tuple are summed
CASE_OBJECTIVES = {
    "C1": ((("length",), ("distance",)), (("fatal",), ("eco",))),
    "C2": ((("length", "height"), ("distance",)), (("fatal",), ("eco",))),
    "C3": ((("fuel",), ("distance",)), (("fatal",), ("eco",))),
    "C4": ((("length",), ("distance",)), (("fatal",), ("noise",))),
    "C5": ((("length", "height"), ("distance",)), (("fatal",), ("noise",))),
    "C6": ((("fuel",), ("distance",)), (("fatal",), ("noise",))),
}


def smooth_genomes(rng, count: int, cfg: WorldConfig | None = None) -> np.ndarray:
    """Random genomes decoding to smooth start-to-goal corridors.

    The horizontal profile is a random power curve from the start row to the
    goal row plus small jitter; altitude is a random level with jitter.
    """
    cfg = cfg or WorldConfig()
    u = np.arange(1, N_COLUMNS + 1) / N_COLUMNS
    gamma = np.exp(rng.uniform(np.log(0.6), np.log(1.7), size=(count, 1)))
    y = u[None, :] ** gamma + rng.normal(0.0, 0.004, size=(count, N_COLUMNS))
    y[:, -1] = 1.0
    level = rng.uniform(0.0, 1.0, size=(count, 1))
    z = level + rng.normal(0.0, 0.02, size=(count, N_COLUMNS))
    G = np.empty((count, GENOME_LENGTH))
    G[:, 0::2] = y
    G[:, 1::2] = z
    return np.clip(G, 0.0, 1.0)


def make_uav_case(case_id: str, world: World) -> MPProblem:
    cid = str(case_id).upper()
    if cid not in CASE_OBJECTIVES:
        raise ContractViolation(f"unknown UAV case {case_id!r}")
    parties = CASE_OBJECTIVES[cid]
    needed = {term for party in parties for obj in party for term in obj}
    cfg = world.config

    def evaluate(X):
        P = decode_batch(X, cfg)
        objs = {k: v for k, v in all_objectives(P, world).items() if k in needed}
        cols = [sum(objs[t] for t in obj) for party in parties for obj in party]
        return np.column_stack(cols)

    def constraints(X):
        return violations_batch(decode_batch(X, cfg), cfg)[0]

    return MPProblem(
        id=cid,
        n=GENOME_LENGTH,
        arities=(2, 2),
        bounds=Bounds(np.zeros(GENOME_LENGTH), np.ones(GENOME_LENGTH)),
        batch_evaluator=evaluate,
        constraint_evaluator=constraints,
        initializer=lambda rng, count: smooth_genomes(rng, count, cfg),
        metadata={"suite": "UAV", "world": world.version_id,
                  "objectives": [["+".join(o) for o in party] for party in parties]},
    )


def write_path(path: Path, dest) -> FilePath:
    """Export track points as whitespace-separated ``i x y z`` rows."""
    dest = FilePath(dest)
    rows = np.column_stack([np.arange(path.points.shape[0]), path.points])
    np.savetxt(dest, rows, fmt=["%d", "%.17g", "%.17g", "%.17g"], header="i x y z", comments="# ")
    return dest

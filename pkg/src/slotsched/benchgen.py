"""Deterministic benchmark instance generator and the instance file format.

Instances mimic an urban grocery-delivery region: a square grid, most
customers clumped into Gaussian clusters, consecutive one-hour delivery
windows, a homogeneous fleet from a single depot, and travel times
proportional to Euclidean distance.  Everything is a pure function of the
seed, so instance files regenerate byte-identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .model import Customer, EuclideanTravel, Instance, TimeWindow, VehicleSpec, validate_windows

FORMAT_VERSION = 1

KMH_20 = 20_000.0 / 3600.0  # 20 km/h in m/s

DEPOT_CENTER = "center"
DEPOT_TOP_LEFT = "top_left_quadrant"

# Vehicles may leave this long before the first window opens and must return
# this long after the last window closes; the post-roll exceeds the longest
# possible leg on the 20 km grid (diagonal ~5091 s at 20 km/h).
PRE_ROLL_S = 1800.0
POST_ROLL_S = 5400.0

CLUSTER_SPREAD_LO_M = 500.0
CLUSTER_SPREAD_HI_M = 2000.0


class InstanceFormatError(ValueError):
    """Malformed, out-of-range or wrong-version instance file."""


@dataclass(frozen=True, slots=True)
class GenerationParams:
    grid_side_m: float = 20_000.0
    customer_count: int = 500
    cluster_count: int = 10
    uniform_fraction: float = 0.20
    depot_mode: str = DEPOT_CENTER
    window_count: int = 5
    window_length_s: float = 3600.0
    first_window_start_s: float = 8 * 3600.0
    tour_count: int = 30
    tour_capacity: float = 100.0
    speed_m_per_s: float = KMH_20
    service_s: float = 300.0
    weight_mean: float = 7.0
    weight_sd: float = 2.0
    weight_lo: float = 1.0
    weight_hi: float = 15.0
    seed: int = 0

    def validate(self) -> None:
        if self.grid_side_m <= 0:
            raise ValueError("grid side must be positive")
        if self.customer_count < 0:
            raise ValueError("customer count must be non-negative")
        if self.cluster_count <= 0 or self.window_count <= 0 or self.tour_count <= 0:
            raise ValueError("counts must be positive")
        if not 0.0 <= self.uniform_fraction <= 1.0:
            raise ValueError("uniform fraction must lie in [0, 1]")
        if self.depot_mode not in (DEPOT_CENTER, DEPOT_TOP_LEFT):
            raise ValueError(f"unknown depot mode {self.depot_mode!r}")
        if self.window_length_s <= 0 or self.tour_capacity <= 0 or self.speed_m_per_s <= 0:
            raise ValueError("window length, capacity and speed must be positive")
        if self.service_s <= 0:
            raise ValueError("service time must be positive")
        if not self.weight_lo < self.weight_hi:
            raise ValueError("weight bounds must satisfy lo < hi")


def sample_truncated_normal(mean: float, sd: float, lo: float, hi: float,
                            rng: np.random.Generator) -> float:
    """Normal draw redrawn until it lands in [lo, hi]."""
    if lo >= hi:
        raise ValueError("lo must be < hi")
    if sd == 0:
        return mean
    while True:
        x = rng.normal(mean, sd)
        if lo <= x <= hi:
            return float(x)


def euclidean_travel_seconds(a: tuple[float, float], b: tuple[float, float],
                             speed_m_per_s: float) -> float:
    if speed_m_per_s <= 0:
        raise ValueError("speed must be positive")
    return math.hypot(a[0] - b[0], a[1] - b[1]) / speed_m_per_s


def depot_location(params: GenerationParams) -> tuple[float, float]:
    s = params.grid_side_m
    if params.depot_mode == DEPOT_CENTER:
        return (s / 2.0, s / 2.0)
    return (s / 4.0, 3.0 * s / 4.0)


def make_windows(params: GenerationParams) -> list[TimeWindow]:
    return [TimeWindow(id=i,
                       start=params.first_window_start_s + i * params.window_length_s,
                       end=params.first_window_start_s + (i + 1) * params.window_length_s)
            for i in range(params.window_count)]


def make_fleet(params: GenerationParams) -> list[VehicleSpec]:
    start = params.first_window_start_s - PRE_ROLL_S
    end = (params.first_window_start_s
           + params.window_count * params.window_length_s + POST_ROLL_S)
    depot = depot_location(params)
    return [VehicleSpec(id=i, capacity=params.tour_capacity,
                        start_time=start, end_time=end, depot=depot)
            for i in range(params.tour_count)]


def generate_instance(params: GenerationParams) -> Instance:
    """Sample a full instance; identical params and seed give identical output."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    side = params.grid_side_m
    p = params.customer_count

    n_uniform = math.ceil(params.uniform_fraction * p)
    n_clustered = p - n_uniform

    centers = rng.uniform(0.0, side, size=(params.cluster_count, 2))
    spreads = rng.uniform(CLUSTER_SPREAD_LO_M, CLUSTER_SPREAD_HI_M,
                          size=(params.cluster_count, 2))

    locations: list[tuple[float, float]] = []
    for _ in range(n_uniform):
        locations.append((float(rng.uniform(0.0, side)), float(rng.uniform(0.0, side))))
    assignments = rng.integers(0, params.cluster_count, size=n_clustered)
    for k in assignments:
        cx, cy = centers[k]
        sx, sy = spreads[k]
        while True:
            x = rng.normal(cx, sx)
            y = rng.normal(cy, sy)
            if 0.0 <= x <= side and 0.0 <= y <= side:
                locations.append((float(x), float(y)))
                break

    weights = [sample_truncated_normal(params.weight_mean, params.weight_sd,
                                       params.weight_lo, params.weight_hi, rng)
               for _ in range(p)]
    desired = rng.integers(0, params.window_count, size=p)

    order = rng.permutation(p)
    customers = [Customer(id=i, location=locations[j], weight=weights[j],
                          service_seconds=params.service_s,
                          desired_window=int(desired[j]))
                 for i, j in enumerate(order)]

    return Instance(customers=customers,
                    windows=make_windows(params),
                    fleet=make_fleet(params),
                    travel=EuclideanTravel(params.speed_m_per_s),
                    metadata={"params": asdict(params), "seed": params.seed,
                              "uniform_count": n_uniform, "clustered_count": n_clustered})


def instance_to_doc(instance: Instance) -> dict:
    """JSON-ready document; travel times are never stored, only coordinates."""
    params = instance.metadata.get("params", {})
    depot = instance.fleet[0].depot if instance.fleet else (0.0, 0.0)
    return {
        "version": FORMAT_VERSION,
        "params": params,
        "depot": {"x_m": depot[0], "y_m": depot[1]},
        "windows": [{"id": w.id, "start_s": w.start, "end_s": w.end}
                    for w in instance.windows],
        "fleet": [{"id": v.id, "capacity": v.capacity,
                   "start_s": v.start_time, "end_s": v.end_time}
                  for v in instance.fleet],
        "customers": [{"id": c.id, "x_m": c.location[0], "y_m": c.location[1],
                       "weight": c.weight, "service_s": c.service_seconds,
                       "desired_window": c.desired_window}
                      for c in instance.customers],
    }


def instance_from_doc(doc: dict) -> Instance:
    try:
        version = doc["version"]
    except (TypeError, KeyError) as exc:
        raise InstanceFormatError("missing format version") from exc
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported instance format version {version!r}")
    try:
        params = GenerationParams(**doc["params"])
        depot = (float(doc["depot"]["x_m"]), float(doc["depot"]["y_m"]))
        windows = [TimeWindow(id=int(w["id"]), start=float(w["start_s"]),
                              end=float(w["end_s"]))
                   for w in doc["windows"]]
        fleet = [VehicleSpec(id=int(v["id"]), capacity=float(v["capacity"]),
                             start_time=float(v["start_s"]), end_time=float(v["end_s"]),
                             depot=depot)
                 for v in doc["fleet"]]
        customers = [Customer(id=int(c["id"]),
                              location=(float(c["x_m"]), float(c["y_m"])),
                              weight=float(c["weight"]),
                              service_seconds=float(c["service_s"]),
                              desired_window=(int(c["desired_window"])
                                              if c.get("desired_window") is not None else None))
                     for c in doc["customers"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed instance document: {exc}") from exc

    try:
        validate_windows(windows)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc
    side = params.grid_side_m
    for c in customers:
        x, y = c.location
        if not (0.0 <= x <= side and 0.0 <= y <= side):
            raise InstanceFormatError(
                f"customer {c.id} lies outside the {side:.0f} m grid: ({x}, {y})")
    window_ids = {w.id for w in windows}
    for c in customers:
        if c.desired_window is not None and c.desired_window not in window_ids:
            raise InstanceFormatError(f"customer {c.id} desires unknown window {c.desired_window}")

    return Instance(customers=customers, windows=windows, fleet=fleet,
                    travel=EuclideanTravel(params.speed_m_per_s),
                    metadata={"params": asdict(params), "seed": params.seed})


def write_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_doc(instance), indent=2) + "\n")


def read_instance(path: str | Path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not valid JSON: {exc}") from exc
    return instance_from_doc(doc)


def params_with_seed(params: GenerationParams, seed: int) -> GenerationParams:
    return replace(params, seed=seed)

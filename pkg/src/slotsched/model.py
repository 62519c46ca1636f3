"""Core domain types and the arrival-time kernel.

A schedule is a set of depot-bounded tours over customers that each booked
one delivery window.  Every tour caches its earliest/latest feasible arrival
times, which makes single-insertion feasibility an O(1) check and keeps all
higher layers (booking engine, local search, exact reoptimization) cheap.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

# Absolute tolerance (seconds) for all time-feasibility comparisons.
# Euclidean travel times are irrational, so exact compares are meaningless.
EPS = 1e-6

# Tolerance for capacity sums (order weights are real-valued).
WEIGHT_EPS = 1e-9

Location = tuple[float, float]


class InfeasibleInsertionError(ValueError):
    """Raised when insert_customer is called on an infeasible (tour, gap)."""


@dataclass(frozen=True, slots=True)
class TimeWindow:
    """A bookable delivery window [start, end], seconds since midnight."""

    id: int
    start: float
    end: float

    def __post_init__(self) -> None:
        if not self.start < self.end:
            raise ValueError(f"window {self.id}: start {self.start} must be < end {self.end}")


@dataclass(slots=True)
class Customer:
    id: int
    location: Location
    weight: float
    service_seconds: float
    assigned_window: int | None = None
    desired_window: int | None = None

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise ValueError(f"customer {self.id}: weight must be positive")
        if self.service_seconds <= 0:
            raise ValueError(f"customer {self.id}: service time must be positive")

    def copy(self) -> "Customer":
        return Customer(self.id, self.location, self.weight, self.service_seconds,
                        self.assigned_window, self.desired_window)


class TravelTimes:
    """Travel-time lookup between planar locations, in seconds."""

    def seconds(self, a: Location, b: Location) -> float:
        raise NotImplementedError


class EuclideanTravel(TravelTimes):
    """Straight-line distance at a constant vehicle speed."""

    def __init__(self, speed_m_per_s: float):
        if speed_m_per_s <= 0:
            raise ValueError("speed must be positive")
        self.speed_m_per_s = speed_m_per_s
        self._inv_speed = 1.0 / speed_m_per_s

    def seconds(self, a: Location, b: Location) -> float:
        return math.hypot(a[0] - b[0], a[1] - b[1]) * self._inv_speed


class FunctionTravel(TravelTimes):
    """Arbitrary lookup function; t(a, a) is forced to 0."""

    def __init__(self, fn: Callable[[Location, Location], float]):
        self._fn = fn

    def seconds(self, a: Location, b: Location) -> float:
        if a == b:
            return 0.0
        return self._fn(a, b)


@dataclass(frozen=True, slots=True)
class VehicleSpec:
    """One vehicle's operating envelope from the planning configuration."""

    id: int
    capacity: float
    start_time: float
    end_time: float
    depot: Location


@dataclass(slots=True)
class Tour:
    """One vehicle's visit sequence plus incremental-check caches.

    ``earliest``/``latest`` have length n+2: index 0 is the start depot,
    index k+1 is ``customers[k]``, index n+1 is the end depot.  ``win_start``,
    ``win_end``, ``locs`` and ``svc`` are per-visit parallel arrays.  Visits
    are always sorted by window start (windows never overlap), so the gap
    range admitting a window is found by bisect on ``win_start``.
    """

    id: int
    capacity: float
    start_time: float
    end_time: float
    start_depot: Location
    end_depot: Location
    customers: list[Customer] = field(default_factory=list)
    earliest: list[float] = field(default_factory=list)
    latest: list[float] = field(default_factory=list)
    load: float = 0.0
    travel_seconds: float = 0.0
    win_start: list[float] = field(default_factory=list)
    win_end: list[float] = field(default_factory=list)
    locs: list[Location] = field(default_factory=list)
    svc: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.start_time < self.end_time:
            raise ValueError(f"tour {self.id}: start_time must be < end_time")

    def __len__(self) -> int:
        return len(self.customers)

    def refresh(self, travel: TravelTimes, windows: Mapping[int, TimeWindow]) -> None:
        """Rebuild every cache from the visit list (O(n))."""
        self.locs = [c.location for c in self.customers]
        self.svc = [c.service_seconds for c in self.customers]
        ws = [windows[c.assigned_window] for c in self.customers]
        self.win_start = [w.start for w in ws]
        self.win_end = [w.end for w in ws]
        self.load = math.fsum(c.weight for c in self.customers)
        self.earliest, self.latest = compute_arrival_times(self, travel, windows)
        self.travel_seconds = tour_travel_time(self, travel)

    def gap_range(self, window: TimeWindow) -> tuple[int, int]:
        """Inclusive range of gap indices that keep visits window-sorted."""
        return bisect_left(self.win_start, window.start), bisect_right(self.win_start, window.start)


def compute_arrival_times(tour: Tour, travel: TravelTimes,
                          windows: Mapping[int, TimeWindow]) -> tuple[list[float], list[float]]:
    """Propagate earliest (forward) and latest (backward) feasible arrivals.

    Depots carry no service time and no window; the end depot's deadline is
    the tour's end time.  The returned values may violate windows — whether
    the tour is feasible is judged by :func:`tour_time_feasible`.
    """
    cs = tour.customers
    n = len(cs)
    earliest = [0.0] * (n + 2)
    latest = [0.0] * (n + 2)

    earliest[0] = tour.start_time
    prev_loc = tour.start_depot
    prev_ready = tour.start_time  # arrival + service at the predecessor
    for k, c in enumerate(cs):
        w = windows[c.assigned_window]
        arr = prev_ready + travel.seconds(prev_loc, c.location)
        if arr < w.start:
            arr = w.start
        earliest[k + 1] = arr
        prev_loc = c.location
        prev_ready = arr + c.service_seconds
    earliest[n + 1] = prev_ready + travel.seconds(prev_loc, tour.end_depot)

    latest[n + 1] = tour.end_time
    next_loc = tour.end_depot
    next_latest = tour.end_time
    for k in range(n - 1, -1, -1):
        c = cs[k]
        w = windows[c.assigned_window]
        lat = next_latest - c.service_seconds - travel.seconds(c.location, next_loc)
        if lat > w.end:
            lat = w.end
        latest[k + 1] = lat
        next_loc = c.location
        next_latest = lat
    latest[0] = next_latest - travel.seconds(tour.start_depot, next_loc)

    return earliest, latest


def tour_time_feasible(tour: Tour) -> bool:
    """Every arrival inside its window and the end depot reached in time."""
    e = tour.earliest
    for k in range(len(tour.customers)):
        a = e[k + 1]
        if a < tour.win_start[k] - EPS or a > tour.win_end[k] + EPS:
            return False
    return e[-1] <= tour.end_time + EPS


def tour_capacity_feasible(tour: Tour) -> bool:
    return tour.load <= tour.capacity + WEIGHT_EPS


def insertion_time_feasible(tour: Tour, gap_index: int, new_customer: Customer,
                            window: TimeWindow, travel: TravelTimes) -> bool:
    """O(1) check that the customer fits between gap neighbours in time.

    Gap index i in [0, n] inserts between visit i-1 and visit i, with the
    depots acting as virtual neighbours at the ends.
    """
    loc = new_customer.location
    if gap_index == 0:
        prev_loc, prev_service = tour.start_depot, 0.0
    else:
        prev_loc, prev_service = tour.locs[gap_index - 1], tour.svc[gap_index - 1]
    a = tour.earliest[gap_index] + prev_service + travel.seconds(prev_loc, loc)
    if a < window.start:
        a = window.start

    succ_loc = tour.locs[gap_index] if gap_index < len(tour.customers) else tour.end_depot
    b = tour.latest[gap_index + 1] - new_customer.service_seconds - travel.seconds(loc, succ_loc)
    if b > window.end:
        b = window.end

    return a <= b + EPS


def insertion_capacity_feasible(tour: Tour, new_customer: Customer) -> bool:
    return tour.load + new_customer.weight <= tour.capacity + WEIGHT_EPS


def insertion_delta(tour: Tour, gap_index: int, new_customer: Customer,
                    travel: TravelTimes) -> float:
    """Travel-time increase of placing the customer at the given gap."""
    loc = new_customer.location
    prev_loc = tour.locs[gap_index - 1] if gap_index > 0 else tour.start_depot
    succ_loc = tour.locs[gap_index] if gap_index < len(tour.customers) else tour.end_depot
    return (travel.seconds(prev_loc, loc) + travel.seconds(loc, succ_loc)
            - travel.seconds(prev_loc, succ_loc))


def insert_customer(tour: Tour, gap_index: int, new_customer: Customer,
                    travel: TravelTimes, windows: Mapping[int, TimeWindow]) -> None:
    """Splice the customer in at the gap and rebuild caches (O(n)).

    The customer must already carry its assigned window and the insertion
    must satisfy both feasibility conditions; violations raise
    :class:`InfeasibleInsertionError`.
    """
    if new_customer.assigned_window is None:
        raise InfeasibleInsertionError("customer has no assigned window")
    window = windows[new_customer.assigned_window]
    if not (0 <= gap_index <= len(tour.customers)):
        raise IndexError(f"gap index {gap_index} out of range")
    if not insertion_capacity_feasible(tour, new_customer):
        raise InfeasibleInsertionError(
            f"tour {tour.id}: capacity exceeded by customer {new_customer.id}")
    if not insertion_time_feasible(tour, gap_index, new_customer, window, travel):
        raise InfeasibleInsertionError(
            f"tour {tour.id}: customer {new_customer.id} does not fit at gap {gap_index}")
    tour.customers.insert(gap_index, new_customer)
    tour.refresh(travel, windows)


def remove_customer(tour: Tour, position: int, travel: TravelTimes,
                    windows: Mapping[int, TimeWindow]) -> Customer:
    """Remove the visit at 0-based ``position`` and rebuild caches (O(n))."""
    if not (0 <= position < len(tour.customers)):
        raise IndexError(f"position {position} out of range")
    removed = tour.customers.pop(position)
    tour.refresh(travel, windows)
    return removed


def tour_travel_time(tour: Tour, travel: TravelTimes) -> float:
    """Sum of leg times including both depot legs; no service, no waiting."""
    legs = 0.0
    prev = tour.start_depot
    for loc in tour.locs:
        legs += travel.seconds(prev, loc)
        prev = loc
    return legs + travel.seconds(prev, tour.end_depot)


def validate_windows(windows: Sequence[TimeWindow]) -> list[TimeWindow]:
    """Check pairwise non-overlap and uniqueness; return windows sorted by start."""
    ws = sorted(windows, key=lambda w: (w.start, w.end))
    for prev, cur in zip(ws, ws[1:]):
        if cur.start < prev.end - EPS:
            raise ValueError(f"windows {prev.id} and {cur.id} overlap")
        if prev.start == cur.start and prev.end == cur.end:
            raise ValueError(f"windows {prev.id} and {cur.id} are duplicates")
    return ws


@dataclass(slots=True)
class Schedule:
    """The single working set of tours; all booking steps mutate this object.

    ``revision`` is a monotone change counter: it is bumped once per booked
    insertion and once per improvement run that changed anything, which is
    what offer staleness detection needs.
    """

    tours: list[Tour]
    windows: list[TimeWindow]
    travel: TravelTimes
    revision: int = 0
    windows_by_id: dict[int, TimeWindow] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.windows = validate_windows(self.windows)
        self.windows_by_id = {w.id: w for w in self.windows}
        self.tours = sorted(self.tours, key=lambda t: t.id)

    def tour_by_id(self, tour_id: int) -> Tour:
        for t in self.tours:
            if t.id == tour_id:
                return t
        raise KeyError(f"no tour {tour_id}")

    def customer_count(self) -> int:
        return sum(len(t.customers) for t in self.tours)


def total_travel_time(schedule: Schedule, travel: TravelTimes | None = None) -> float:
    """Objective value: total travel time over all tours, in seconds."""
    tr = travel if travel is not None else schedule.travel
    return math.fsum(tour_travel_time(t, tr) for t in schedule.tours)


@dataclass(slots=True)
class Instance:
    """Immutable problem input: customers in arrival order plus the fleet."""

    customers: list[Customer]
    windows: list[TimeWindow]
    fleet: list[VehicleSpec]
    travel: TravelTimes
    metadata: dict = field(default_factory=dict)

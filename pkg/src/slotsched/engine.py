"""The online booking loop: offer windows, book one, keep the schedule sound.

Three operations drive the ordering flow.  ``initialize_schedule`` sets up the
empty working schedule from the fleet configuration.  ``get_time_windows``
answers, read-only and in about a millisecond, which windows a new customer
could book right now.  ``set_time_window`` re-checks one window against the
live schedule and inserts the customer at the cheapest feasible gap, or
reports that the window is gone and returns fresh offers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .model import (
    Customer,
    Schedule,
    TimeWindow,
    Tour,
    TravelTimes,
    VehicleSpec,
    WEIGHT_EPS,
    EPS,
    insert_customer,
    validate_windows,
)


class UnknownWindowError(KeyError):
    """Raised when a booking names a window that is not in the window set."""


@dataclass(frozen=True, slots=True)
class WindowOffer:
    """One offerable window with its cheapest feasible placement."""

    window_id: int
    tour_id: int
    gap_index: int
    delta_seconds: float


@dataclass(frozen=True, slots=True)
class OfferSet:
    """Windows currently bookable by one customer, pinned to a revision."""

    customer_id: int
    windows: tuple[WindowOffer, ...]
    schedule_revision: int

    def offer_for(self, window_id: int) -> WindowOffer | None:
        for o in self.windows:
            if o.window_id == window_id:
                return o
        return None

    def window_ids(self) -> set[int]:
        return {o.window_id for o in self.windows}


class BookingOutcome(enum.Enum):
    BOOKED = "booked"
    NO_LONGER_AVAILABLE = "no_longer_available"


@dataclass(frozen=True, slots=True)
class BookingResult:
    outcome: BookingOutcome
    applied: tuple[int, int, float] | None = None  # (tour id, gap index, delta seconds)
    fresh_offers: OfferSet | None = None


def initialize_schedule(fleet: Sequence[VehicleSpec], windows: Sequence[TimeWindow],
                        travel: TravelTimes) -> Schedule:
    """Build the empty working schedule for a delivery day."""
    if not fleet:
        raise ValueError("fleet must contain at least one vehicle")
    ws = validate_windows(windows)
    tours = []
    for v in fleet:
        t = Tour(id=v.id, capacity=v.capacity, start_time=v.start_time,
                 end_time=v.end_time, start_depot=v.depot, end_depot=v.depot)
        t.refresh(travel, {w.id: w for w in ws})
        tours.append(t)
    return Schedule(tours=tours, windows=ws, travel=travel)


def _best_gap(tour: Tour, customer: Customer, window: TimeWindow,
              travel: TravelTimes) -> tuple[float, int] | None:
    """Cheapest feasible gap for the customer in this tour and window.

    Hot path: called for every (window, tour) pair of every offer request.
    """
    if tour.load + customer.weight > tour.capacity + WEIGHT_EPS:
        return None
    lo, hi = tour.gap_range(window)
    loc = customer.location
    service = customer.service_seconds
    earliest = tour.earliest
    latest = tour.latest
    locs = tour.locs
    svc = tour.svc
    n = len(locs)
    tsec = travel.seconds
    w_start = window.start
    w_end = window.end

    best: tuple[float, int] | None = None
    for gap in range(lo, hi + 1):
        if gap == 0:
            prev_loc, prev_service = tour.start_depot, 0.0
        else:
            prev_loc, prev_service = locs[gap - 1], svc[gap - 1]
        succ_loc = locs[gap] if gap < n else tour.end_depot

        t_in = tsec(prev_loc, loc)
        a = earliest[gap] + prev_service + t_in
        if a < w_start:
            a = w_start
        t_out = tsec(loc, succ_loc)
        b = latest[gap + 1] - service - t_out
        if b > w_end:
            b = w_end
        if a <= b + EPS:
            delta = t_in + t_out - tsec(prev_loc, succ_loc)
            if best is None or delta < best[0]:
                best = (delta, gap)
    return best


def best_insertion(schedule: Schedule, customer: Customer,
                   window: TimeWindow) -> tuple[int, int, float] | None:
    """Minimum-delta feasible placement for one window across all tours.

    Ties are broken towards the lower tour id, then the lower gap index,
    which the scan order guarantees.
    """
    travel = schedule.travel
    best: tuple[float, int, int] | None = None
    for tour in schedule.tours:
        cand = _best_gap(tour, customer, window, travel)
        if cand is not None and (best is None or cand[0] < best[0]):
            best = (cand[0], tour.id, cand[1])
    if best is None:
        return None
    delta, tour_id, gap = best
    return tour_id, gap, delta


def get_time_windows(schedule: Schedule, customer: Customer) -> OfferSet:
    """Offerable windows for a new customer; read-only on the schedule."""
    if customer.assigned_window is not None:
        raise ValueError(f"customer {customer.id} already has a window")
    travel = schedule.travel
    offers = []
    for window in schedule.windows:
        best: tuple[float, int, int] | None = None
        for tour in schedule.tours:
            cand = _best_gap(tour, customer, window, travel)
            if cand is not None and (best is None or cand[0] < best[0]):
                best = (cand[0], tour.id, cand[1])
        if best is not None:
            offers.append(WindowOffer(window.id, best[1], best[2], best[0]))
    return OfferSet(customer_id=customer.id, windows=tuple(offers),
                    schedule_revision=schedule.revision)


def set_time_window(schedule: Schedule, customer: Customer, window_id: int) -> BookingResult:
    """Double-check one window and insert the customer at the best gap.

    Callers must hold exclusive access to the schedule: no other mutation may
    run while a booking is applied.
    """
    window = schedule.windows_by_id.get(window_id)
    if window is None:
        raise UnknownWindowError(window_id)
    placement = best_insertion(schedule, customer, window)
    if placement is None:
        return BookingResult(outcome=BookingOutcome.NO_LONGER_AVAILABLE,
                             fresh_offers=get_time_windows(schedule, customer))
    tour_id, gap, delta = placement
    customer.assigned_window = window_id
    insert_customer(schedule.tour_by_id(tour_id), gap, customer,
                    schedule.travel, schedule.windows_by_id)
    schedule.revision += 1
    return BookingResult(outcome=BookingOutcome.BOOKED, applied=(tour_id, gap, delta))

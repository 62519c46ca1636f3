"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import random

import pytest

from slotsched.model import (
    Customer,
    EuclideanTravel,
    FunctionTravel,
    TimeWindow,
    Tour,
    tour_capacity_feasible,
    tour_time_feasible,
)


def const_travel(seconds: float) -> FunctionTravel:
    return FunctionTravel(lambda a, b: seconds)


def table_travel(default: float, table: dict) -> FunctionTravel:
    """Leg times from a symmetric (loc, loc) table, falling back to a default."""

    def fn(a, b):
        if (a, b) in table:
            return table[(a, b)]
        if (b, a) in table:
            return table[(b, a)]
        return default

    return FunctionTravel(fn)


def hour_windows(q: int, first_start: float = 8 * 3600.0) -> list[TimeWindow]:
    return [TimeWindow(i, first_start + i * 3600.0, first_start + (i + 1) * 3600.0)
            for i in range(q)]


def window_map(windows) -> dict[int, TimeWindow]:
    return {w.id: w for w in windows}


def make_tour(customers, travel, windows, *, tour_id=0, capacity=1e9,
              start_time=0.0, end_time=1e9, depot=(0.0, 0.0)) -> Tour:
    tour = Tour(id=tour_id, capacity=capacity, start_time=start_time,
                end_time=end_time, start_depot=depot, end_depot=depot,
                customers=list(customers))
    tour.refresh(travel, window_map(windows))
    return tour


def three_stop_example_tour(end_time: float = 18000.0):
    """Three customers, two windows, all legs 600 s, all service 300 s."""
    windows = [TimeWindow(0, 3600.0, 7200.0), TimeWindow(1, 7200.0, 10800.0)]
    locs = [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]
    custs = [
        Customer(1, locs[0], 10.0, 300.0, assigned_window=0),
        Customer(2, locs[1], 10.0, 300.0, assigned_window=0),
        Customer(3, locs[2], 10.0, 300.0, assigned_window=1),
    ]
    travel = const_travel(600.0)
    tour = make_tour(custs, travel, windows, capacity=100.0,
                     start_time=0.0, end_time=end_time)
    return tour, travel, windows


def rebuilt_tour_feasible(tour, gap_index, customer, window, travel, windows) -> bool:
    """Oracle for insertion feasibility: rebuild the tour and check it whole.

    Deliberately avoids the O(1) gap conditions; the fresh tour is judged
    only by full arrival-time propagation plus the capacity sum.
    """
    clone = customer.copy()
    clone.assigned_window = window.id
    visits = list(tour.customers)
    visits.insert(gap_index, clone)
    rebuilt = Tour(id=tour.id, capacity=tour.capacity, start_time=tour.start_time,
                   end_time=tour.end_time, start_depot=tour.start_depot,
                   end_depot=tour.end_depot, customers=visits)
    rebuilt.refresh(travel, window_map(windows))
    return tour_time_feasible(rebuilt) and tour_capacity_feasible(rebuilt)


def fresh_caches(tour, travel, windows):
    """From-scratch recomputation of every cache of an existing tour."""
    clone = Tour(id=tour.id, capacity=tour.capacity, start_time=tour.start_time,
                 end_time=tour.end_time, start_depot=tour.start_depot,
                 end_depot=tour.end_depot, customers=list(tour.customers))
    clone.refresh(travel, window_map(windows))
    return clone


def assert_caches_match(tour, travel, windows, tol=1e-9):
    clone = fresh_caches(tour, travel, windows)
    assert tour.earliest == pytest.approx(clone.earliest, abs=tol)
    assert tour.latest == pytest.approx(clone.latest, abs=tol)
    assert tour.load == pytest.approx(clone.load, abs=tol)
    assert tour.travel_seconds == pytest.approx(clone.travel_seconds, abs=tol)
    assert tour.win_start == clone.win_start
    assert tour.win_end == clone.win_end


def rebuilt_with_visits(tour, visits, travel, windows) -> Tour:
    clone = Tour(id=tour.id, capacity=tour.capacity, start_time=tour.start_time,
                 end_time=tour.end_time, start_depot=tour.start_depot,
                 end_depot=tour.end_depot, customers=list(visits))
    clone.refresh(travel, window_map(windows))
    return clone


def _trial_move_objective(sched, src, pos, dst, gap):
    new_src = list(src.customers)
    moved = new_src.pop(pos)
    new_dst = list(dst.customers)
    new_dst.insert(gap, moved)
    total = 0.0
    for t in sched.tours:
        if t is src:
            total += rebuilt_with_visits(t, new_src, sched.travel, sched.windows).travel_seconds
        elif t is dst:
            total += rebuilt_with_visits(t, new_dst, sched.travel, sched.windows).travel_seconds
        else:
            total += t.travel_seconds
    return total


def _trial_swap_objective(sched, src, pos, dst, p2):
    new_src = list(src.customers)
    new_dst = list(dst.customers)
    new_src[pos], new_dst[p2] = new_dst[p2], new_src[pos]
    a = rebuilt_with_visits(src, new_src, sched.travel, sched.windows)
    b = rebuilt_with_visits(dst, new_dst, sched.travel, sched.windows)
    if not (tour_time_feasible(a) and tour_capacity_feasible(a)
            and tour_time_feasible(b) and tour_capacity_feasible(b)):
        return None
    total = a.travel_seconds + b.travel_seconds
    for t in sched.tours:
        if t is not src and t is not dst:
            total += t.travel_seconds
    return total


def exhaustive_no_improving_op(sched, tol=1e-3):
    """Oracle: scan every relocation and exchange via full tour rebuilds."""
    travel = sched.travel
    windows = sched.windows
    wmap = {w.id: w for w in windows}
    obj = sum(t.travel_seconds for t in sched.tours)
    for src in sched.tours:
        for pos, cust in enumerate(src.customers):
            w = wmap[cust.assigned_window]
            for dst in sched.tours:
                if dst is src:
                    continue
                lo, hi = dst.gap_range(w)
                for gap in range(lo, hi + 1):
                    if not rebuilt_tour_feasible(dst, gap, cust, w, travel, windows):
                        continue
                    if _trial_move_objective(sched, src, pos, dst, gap) < obj - tol:
                        return False
                for p2, other in enumerate(dst.customers):
                    if other.assigned_window != cust.assigned_window:
                        continue
                    trial = _trial_swap_objective(sched, src, pos, dst, p2)
                    if trial is not None and trial < obj - tol:
                        return False
    return True


def random_customer(rng: random.Random, cid: int, q: int, side: float = 10_000.0,
                    service: float = 300.0) -> Customer:
    return Customer(id=cid,
                    location=(rng.uniform(0, side), rng.uniform(0, side)),
                    weight=rng.uniform(1.0, 15.0),
                    service_seconds=service,
                    assigned_window=rng.randrange(q))


def random_feasible_tour(rng: random.Random, *, max_customers=8, q=3,
                         capacity=120.0, side=10_000.0, speed=5.0):
    """Grow a tour by random feasible insertions; may end up shorter than asked."""
    windows = hour_windows(q)
    wmap = window_map(windows)
    travel = EuclideanTravel(speed)
    tour = Tour(id=0, capacity=capacity,
                start_time=windows[0].start - 1800.0,
                end_time=windows[-1].end + 5400.0,
                start_depot=(side / 2, side / 2), end_depot=(side / 2, side / 2))
    tour.refresh(travel, wmap)
    from slotsched.model import insert_customer, insertion_capacity_feasible, insertion_time_feasible

    for cid in range(max_customers):
        c = random_customer(rng, cid + 1, q, side)
        w = wmap[c.assigned_window]
        lo, hi = tour.gap_range(w)
        gaps = list(range(lo, hi + 1))
        rng.shuffle(gaps)
        for gap in gaps:
            if (insertion_capacity_feasible(tour, c)
                    and insertion_time_feasible(tour, gap, c, w, travel)):
                insert_customer(tour, gap, c, travel, wmap)
                break
    return tour, travel, windows

"""Relocate/exchange local search: selection rules, invariants, termination."""

import random
from collections import Counter

import pytest

from slotsched.engine import BookingOutcome, initialize_schedule, set_time_window
from slotsched.localsearch import (
    improve_hybrid,
    improve_local,
    one_move,
    one_swap,
)
from slotsched.model import (
    Customer,
    EuclideanTravel,
    Schedule,
    TimeWindow,
    VehicleSpec,
    total_travel_time,
    tour_capacity_feasible,
    tour_time_feasible,
)

from conftest import (
    const_travel,
    exhaustive_no_improving_op,
    hour_windows,
    make_tour,
    random_customer,
    table_travel,
)

W0 = TimeWindow(0, 3600.0, 7200.0)
W1 = TimeWindow(1, 7200.0, 10800.0)
DEPOT = (0.0, 0.0)


def two_tour_schedule(travel, a_customers, b_customers, windows=(W0, W1),
                      capacity=1000.0, start=1800.0, end=40000.0):
    ws = list(windows)
    ta = make_tour(a_customers, travel, ws, tour_id=0, capacity=capacity,
                   start_time=start, end_time=end, depot=DEPOT)
    tb = make_tour(b_customers, travel, ws, tour_id=1, capacity=capacity,
                   start_time=start, end_time=end, depot=DEPOT)
    return Schedule(tours=[ta, tb], windows=ws, travel=travel)


# --------------------------------------------------------------------- 1-move

def _relocation_setup():
    x, y = (9.0, 0.0), (5.0, 0.0)
    travel = table_travel(600.0, {(DEPOT, x): 500.0, (DEPOT, y): 300.0, (x, y): 320.0})
    sched = two_tour_schedule(
        travel,
        [Customer(1, x, 5.0, 300.0, assigned_window=0)],
        [Customer(2, y, 5.0, 300.0, assigned_window=0)],
    )
    return sched, sched.tours[0].customers[0]


def test_one_move_applies_exact_saving():
    sched, cust = _relocation_setup()
    before = total_travel_time(sched)
    applied, delta = one_move(sched, cust, sched.tours[0], sched.tours[1])
    assert applied
    assert delta == pytest.approx(-480.0)
    assert total_travel_time(sched) == pytest.approx(before - 480.0)
    assert len(sched.tours[0]) == 0 and len(sched.tours[1]) == 2


def test_one_move_no_feasible_gap():
    sched, cust = _relocation_setup()
    sched.tours[1].capacity = 5.0  # already carrying 5, no room for 5 more
    sched.tours[1].refresh(sched.travel, sched.windows_by_id)
    before = total_travel_time(sched)
    applied, delta = one_move(sched, cust, sched.tours[0], sched.tours[1])
    assert not applied and delta == 0.0
    assert total_travel_time(sched) == pytest.approx(before)


def test_one_move_rejects_worsening():
    x, y = (9.0, 0.0), (5.0, 0.0)
    # relocation is feasible but would add travel time
    travel = table_travel(600.0, {(DEPOT, x): 200.0, (DEPOT, y): 300.0, (x, y): 500.0})
    sched = two_tour_schedule(
        travel,
        [Customer(1, x, 5.0, 300.0, assigned_window=0)],
        [Customer(2, y, 5.0, 300.0, assigned_window=0)],
    )
    cust = sched.tours[0].customers[0]
    applied, _ = one_move(sched, cust, sched.tours[0], sched.tours[1])
    assert not applied


# --------------------------------------------------------------------- 1-swap

def test_one_swap_crossing_pair():
    travel = EuclideanTravel(1.0)
    a0 = Customer(1, (-1000.0, 100.0), 5.0, 300.0, assigned_window=0)
    a1 = Customer(2, (1000.0, 0.0), 5.0, 300.0, assigned_window=1)
    b0 = Customer(3, (1000.0, 100.0), 5.0, 300.0, assigned_window=0)
    b1 = Customer(4, (-1000.0, 0.0), 5.0, 300.0, assigned_window=1)
    sched = two_tour_schedule(travel, [a0, a1], [b0, b1])
    before = total_travel_time(sched)
    applied, delta = one_swap(sched, a0, sched.tours[0], sched.tours[1])
    assert applied and delta < 0
    assert total_travel_time(sched) == pytest.approx(before + delta)
    assert [c.id for c in sched.tours[0].customers] == [3, 2]
    assert [c.id for c in sched.tours[1].customers] == [1, 4]
    assert tour_time_feasible(sched.tours[0]) and tour_time_feasible(sched.tours[1])


def test_one_swap_no_same_window_candidate():
    travel = EuclideanTravel(1.0)
    a0 = Customer(1, (100.0, 0.0), 5.0, 300.0, assigned_window=0)
    b1 = Customer(2, (-100.0, 0.0), 5.0, 300.0, assigned_window=1)
    sched = two_tour_schedule(travel, [a0], [b1])
    applied, delta = one_swap(sched, a0, sched.tours[0], sched.tours[1])
    assert not applied and delta == 0.0


def test_one_swap_picks_largest_decrease():
    x, y1, y2 = (9.0, 0.0), (5.0, 0.0), (6.0, 0.0)
    travel = table_travel(600.0, {
        (DEPOT, x): 1000.0, (DEPOT, y1): 600.0, (DEPOT, y2): 600.0,
        (y1, y2): 200.0, (x, y1): 60.0, (x, y2): 360.0,
    })
    # exchanging x with y2 saves 540, with y1 saves 240
    sched = two_tour_schedule(
        travel,
        [Customer(1, x, 5.0, 300.0, assigned_window=0)],
        [Customer(2, y1, 5.0, 300.0, assigned_window=0),
         Customer(3, y2, 5.0, 300.0, assigned_window=0)],
    )
    cust = sched.tours[0].customers[0]
    before = total_travel_time(sched)
    applied, delta = one_swap(sched, cust, sched.tours[0], sched.tours[1])
    assert applied
    assert delta == pytest.approx(-540.0)
    assert total_travel_time(sched) == pytest.approx(before - 540.0)
    assert [c.id for c in sched.tours[0].customers] == [3]


def test_swap_preserves_customer_multiset_and_windows():
    rng = random.Random(5)
    sched = _random_booked_schedule(rng, tours=3, q=2, customers=18)
    assignment_before = {c.id: c.assigned_window for t in sched.tours for c in t.customers}
    ids_before = Counter(c.id for t in sched.tours for c in t.customers)
    improve_local(sched)
    assignment_after = {c.id: c.assigned_window for t in sched.tours for c in t.customers}
    ids_after = Counter(c.id for t in sched.tours for c in t.customers)
    assert ids_before == ids_after
    assert assignment_before == assignment_after


# ------------------------------------------------------------- improve passes

def _random_booked_schedule(rng, tours=3, q=2, customers=20, capacity=60.0,
                            side=4000.0, speed=2.0):
    windows = hour_windows(q)
    fleet = [VehicleSpec(id=i, capacity=capacity,
                         start_time=windows[0].start - 1800.0,
                         end_time=windows[-1].end + 5400.0,
                         depot=(side / 2, side / 2))
             for i in range(tours)]
    sched = initialize_schedule(fleet, windows, EuclideanTravel(speed))
    for cid in range(customers):
        c = random_customer(rng, cid, q, side)
        c.assigned_window = None
        set_time_window(sched, c, rng.randrange(q))
    return sched


def test_improve_empty_schedule():
    sched = initialize_schedule(
        [VehicleSpec(0, 100.0, 0.0, 1e6, DEPOT)], hour_windows(2), const_travel(60.0))
    stats = improve_local(sched)
    assert stats.moves_applied == 0 and stats.swaps_applied == 0
    assert stats.travel_time_before == stats.travel_time_after == 0.0


def test_improve_local_reaches_local_minimum():
    rng = random.Random(11)
    for trial in range(6):
        sched = _random_booked_schedule(rng, tours=rng.randint(2, 4),
                                        q=rng.choice([2, 3]),
                                        customers=rng.randint(10, 30))
        before = total_travel_time(sched)
        stats = improve_local(sched)
        after = total_travel_time(sched)
        assert after <= before + 1e-6
        assert stats.travel_time_after == pytest.approx(after)
        assert exhaustive_no_improving_op(sched), f"trial {trial} not a local minimum"
        for t in sched.tours:
            assert tour_time_feasible(t) and tour_capacity_feasible(t)


def test_dirty_restricted_improvement_still_reaches_local_minimum():
    rng = random.Random(23)
    sched = _random_booked_schedule(rng, tours=3, q=2, customers=15)
    improve_local(sched)  # full scan to a local minimum
    # one more booking, then a scan restricted to the tour it landed on
    newcomer = random_customer(rng, 999, 2, 4000.0)
    newcomer.assigned_window = None
    result = set_time_window(sched, newcomer, newcomer.desired_window or 0)
    assert result.outcome is BookingOutcome.BOOKED
    improve_local(sched, dirty_tours={result.applied[0]})
    assert exhaustive_no_improving_op(sched)


def test_improvement_monotone_and_feasible_along_the_way():
    rng = random.Random(31)
    sched = _random_booked_schedule(rng, tours=3, q=3, customers=25)
    before = total_travel_time(sched)
    stats = improve_local(sched)
    assert stats.travel_time_after <= stats.travel_time_before + 1e-6
    assert stats.travel_time_before == pytest.approx(before)
    assert stats.moves_applied >= 0 and stats.swaps_applied >= 0
    assert set(stats.changed_tours) <= {t.id for t in sched.tours}


# --------------------------------------------------------------------- hybrid

def test_hybrid_without_changes_runs_no_exact_solves():
    sched = initialize_schedule(
        [VehicleSpec(0, 100.0, 0.0, 1e6, DEPOT)], hour_windows(2), const_travel(60.0))
    stats = improve_hybrid(sched, changed_tours=set())
    assert stats.exact_solves == 0
    assert stats.exact_changed == frozenset()


def test_hybrid_never_worsens_and_beats_or_matches_local():
    rng = random.Random(41)
    base = _random_booked_schedule(rng, tours=3, q=2, customers=22)
    import copy
    local_sched = copy.deepcopy(base)
    hybrid_sched = copy.deepcopy(base)
    local_stats = improve_local(local_sched)
    hybrid_stats = improve_hybrid(hybrid_sched, changed_tours=None)
    assert hybrid_stats.travel_time_after <= hybrid_stats.travel_time_before + 1e-6
    assert hybrid_stats.travel_time_after <= local_stats.travel_time_after + 1e-6
    for t in hybrid_sched.tours:
        assert tour_time_feasible(t) and tour_capacity_feasible(t)

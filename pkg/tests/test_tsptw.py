"""Exact single-tour reoptimization vs. brute-force enumeration."""

import math
import random
from itertools import permutations

import pytest

from slotsched.model import EPS, Tour, tour_time_feasible
from slotsched.tsptw import OptStatus, optimize_tour

from conftest import random_feasible_tour, window_map


def brute_force_optimum(tour, travel, windows):
    """DFS over all visit orders with sound infeasibility pruning.

    Arrival times only grow along a prefix, so abandoning a prefix whose last
    arrival misses its window skips only infeasible completions.  No cost
    bounds are used; every feasible order is enumerated.
    """
    wmap = window_map(windows)
    tsec = travel.seconds
    best = [math.inf]

    def extend(remaining, loc, ready, cost):
        if not remaining:
            closing = tsec(loc, tour.end_depot)
            if ready + closing <= tour.end_time + EPS and cost + closing < best[0]:
                best[0] = cost + closing
            return
        for i, c in enumerate(remaining):
            w = wmap[c.assigned_window]
            arr = ready + tsec(loc, c.location)
            if arr < w.start:
                arr = w.start
            if arr > w.end + EPS:
                continue
            extend(remaining[:i] + remaining[i + 1:], c.location,
                   arr + c.service_seconds, cost + tsec(loc, c.location))

    extend(tuple(tour.customers), tour.start_depot, tour.start_time, 0.0)
    return best[0] if best[0] < math.inf else None


def rebuilt(tour, order, travel, windows):
    t = Tour(id=tour.id, capacity=tour.capacity, start_time=tour.start_time,
             end_time=tour.end_time, start_depot=tour.start_depot,
             end_depot=tour.end_depot, customers=list(order))
    t.refresh(travel, window_map(windows))
    return t


def test_single_customer_is_trivially_optimal():
    rng = random.Random(1)
    tour, travel, windows = random_feasible_tour(rng, max_customers=1)
    assert len(tour.customers) == 1
    result = optimize_tour(tour, travel)
    assert result.status is OptStatus.OPTIMAL
    assert [c.id for c in result.order] == [c.id for c in tour.customers]
    assert result.travel_seconds == pytest.approx(tour.travel_seconds)


def test_matches_brute_force_on_random_tours():
    rng = random.Random(17)
    nontrivial = 0
    for trial in range(40):
        tour, travel, windows = random_feasible_tour(
            rng, max_customers=rng.randint(2, 7), q=rng.choice([1, 2, 3]))
        result = optimize_tour(tour, travel)
        expected = brute_force_optimum(tour, travel, windows)
        assert expected is not None
        assert result.status is OptStatus.OPTIMAL
        assert result.travel_seconds == pytest.approx(expected, abs=1e-6), f"trial {trial}"
        check = rebuilt(tour, result.order, travel, windows)
        assert tour_time_feasible(check)
        assert check.travel_seconds == pytest.approx(result.travel_seconds, abs=1e-6)
        if len(tour.customers) >= 4:
            nontrivial += 1
    assert nontrivial > 10


def test_matches_plain_permutation_scan_small():
    """Extra guard at tiny sizes: no pruning at all, full rebuilds."""
    rng = random.Random(29)
    for _ in range(10):
        tour, travel, windows = random_feasible_tour(rng, max_customers=5, q=2)
        best = math.inf
        for perm in permutations(tour.customers):
            cand = rebuilt(tour, perm, travel, windows)
            if tour_time_feasible(cand):
                best = min(best, cand.travel_seconds)
        result = optimize_tour(tour, travel)
        assert result.travel_seconds == pytest.approx(best, abs=1e-6)


def test_never_worse_than_warm_start():
    rng = random.Random(37)
    for _ in range(30):
        tour, travel, _ = random_feasible_tour(rng, max_customers=8, q=3)
        warm = tour.travel_seconds
        result = optimize_tour(tour, travel)
        assert result.travel_seconds <= warm + 1e-9
        assert result.status in (OptStatus.OPTIMAL, OptStatus.TIME_LIMIT)


def test_already_optimal_warm_start_returns_equal_objective():
    rng = random.Random(43)
    tour, travel, windows = random_feasible_tour(rng, max_customers=6, q=2)
    first = optimize_tour(tour, travel)
    tour.customers = list(first.order)
    tour.refresh(travel, window_map(windows))
    second = optimize_tour(tour, travel)
    assert second.travel_seconds == pytest.approx(first.travel_seconds, abs=1e-9)


def test_optimizer_does_not_mutate_the_tour():
    rng = random.Random(53)
    tour, travel, _ = random_feasible_tour(rng, max_customers=6, q=2)
    ids = [c.id for c in tour.customers]
    earliest = list(tour.earliest)
    optimize_tour(tour, travel)
    assert [c.id for c in tour.customers] == ids
    assert tour.earliest == earliest

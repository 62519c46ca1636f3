"""Improvement step: relocate (1-move) and exchange (1-swap) local search.

Both neighbourhoods keep every customer inside their booked window, so a
relocation only scans the target tour's gaps admitting that window and an
exchange only pairs customers booked into the same window.  Only strictly
improving operations are ever applied; the search stops in a local minimum
of total travel time.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import _best_gap
from .model import (
    Customer,
    EPS,
    Schedule,
    Tour,
    TravelTimes,
    WEIGHT_EPS,
    total_travel_time,
)
from . import tsptw

# Gains below this (seconds) do not count as improvements; avoids
# floating-point churn on near-degenerate moves.
MIN_IMPROVEMENT = 1e-3


@dataclass(slots=True)
class ImprovementStats:
    moves_applied: int = 0
    swaps_applied: int = 0
    travel_time_before: float = 0.0
    travel_time_after: float = 0.0
    changed_tours: frozenset[int] = frozenset()
    exact_solves: int = 0
    exact_changed: frozenset[int] = frozenset()


def _removal_delta(tour: Tour, position: int, travel: TravelTimes) -> float:
    """Travel-time change of dropping the visit at ``position`` (<= 0 on metric inputs)."""
    locs = tour.locs
    prev_loc = locs[position - 1] if position > 0 else tour.start_depot
    succ_loc = locs[position + 1] if position + 1 < len(locs) else tour.end_depot
    loc = locs[position]
    tsec = travel.seconds
    return tsec(prev_loc, succ_loc) - tsec(prev_loc, loc) - tsec(loc, succ_loc)


def _best_move(schedule: Schedule, source: Tour, position: int,
               target: Tour) -> tuple[float, int] | None:
    """Best total delta of relocating source's visit at ``position`` into target."""
    customer = source.customers[position]
    window = schedule.windows_by_id[customer.assigned_window]
    cand = _best_gap(target, customer, window, schedule.travel)
    if cand is None:
        return None
    return cand[0] + _removal_delta(source, position, schedule.travel), cand[1]


def _apply_move(schedule: Schedule, source: Tour, position: int,
                target: Tour, gap: int) -> None:
    customer = source.customers.pop(position)
    target.customers.insert(gap, customer)
    windows = schedule.windows_by_id
    source.refresh(schedule.travel, windows)
    target.refresh(schedule.travel, windows)
    schedule.revision += 1


def one_move(schedule: Schedule, customer: Customer, source: Tour,
             target: Tour) -> tuple[bool, float]:
    """Relocate ``customer`` from source to target inside its booked window.

    Applies the feasible placement with the largest travel-time decrease,
    or does nothing if none improves.  Returns (applied, total delta).
    """
    if source is target:
        raise ValueError("source and target must differ")
    position = source.customers.index(customer)
    cand = _best_move(schedule, source, position, target)
    if cand is None or cand[0] >= -MIN_IMPROVEMENT:
        return False, 0.0
    _apply_move(schedule, source, position, target, cand[1])
    return True, cand[0]


def _replacement_feasible(tour: Tour, position: int, incoming: Customer,
                          travel: TravelTimes) -> bool:
    """Would ``incoming`` fit where the visit at ``position`` sits now?

    O(1): the cached arrival bounds of the neighbours do not depend on the
    visit being replaced.  Both customers share the same window.
    """
    locs = tour.locs
    w_start = tour.win_start[position]
    w_end = tour.win_end[position]
    loc = incoming.location
    if position == 0:
        prev_loc, prev_service = tour.start_depot, 0.0
    else:
        prev_loc, prev_service = locs[position - 1], tour.svc[position - 1]
    succ_loc = locs[position + 1] if position + 1 < len(locs) else tour.end_depot
    tsec = travel.seconds
    a = tour.earliest[position] + prev_service + tsec(prev_loc, loc)
    if a < w_start:
        a = w_start
    b = tour.latest[position + 2] - incoming.service_seconds - tsec(loc, succ_loc)
    if b > w_end:
        b = w_end
    return a <= b + EPS


def _replacement_delta(tour: Tour, position: int, incoming: Customer,
                       travel: TravelTimes) -> float:
    locs = tour.locs
    prev_loc = locs[position - 1] if position > 0 else tour.start_depot
    succ_loc = locs[position + 1] if position + 1 < len(locs) else tour.end_depot
    old_loc = locs[position]
    new_loc = incoming.location
    tsec = travel.seconds
    return (tsec(prev_loc, new_loc) + tsec(new_loc, succ_loc)
            - tsec(prev_loc, old_loc) - tsec(old_loc, succ_loc))


def _best_swap(schedule: Schedule, source: Tour, position: int,
               target: Tour) -> tuple[float, int] | None:
    """Best exchange of source's visit at ``position`` with a same-window visit of target."""
    customer = source.customers[position]
    w_start = source.win_start[position]
    travel = schedule.travel

    lo, hi = target.gap_range(schedule.windows_by_id[customer.assigned_window])
    best: tuple[float, int] | None = None
    for p in range(lo, hi):  # target visits p with win_start == w_start
        other = target.customers[p]
        if target.win_start[p] != w_start:
            continue
        if target.load - other.weight + customer.weight > target.capacity + WEIGHT_EPS:
            continue
        if source.load - customer.weight + other.weight > source.capacity + WEIGHT_EPS:
            continue
        if not _replacement_feasible(target, p, customer, travel):
            continue
        if not _replacement_feasible(source, position, other, travel):
            continue
        delta = (_replacement_delta(target, p, customer, travel)
                 + _replacement_delta(source, position, other, travel))
        if best is None or delta < best[0]:
            best = (delta, p)
    return best


def _apply_swap(schedule: Schedule, source: Tour, position: int,
                target: Tour, target_position: int) -> None:
    a = source.customers[position]
    b = target.customers[target_position]
    source.customers[position] = b
    target.customers[target_position] = a
    windows = schedule.windows_by_id
    source.refresh(schedule.travel, windows)
    target.refresh(schedule.travel, windows)
    schedule.revision += 1


def one_swap(schedule: Schedule, customer: Customer, source: Tour,
             target: Tour) -> tuple[bool, float]:
    """Exchange ``customer`` with a same-window customer of the target tour.

    Applies the feasible exchange with the largest travel-time decrease,
    or does nothing if none improves.  Returns (applied, total delta).
    """
    if source is target:
        raise ValueError("source and target must differ")
    position = source.customers.index(customer)
    cand = _best_swap(schedule, source, position, target)
    if cand is None or cand[0] >= -MIN_IMPROVEMENT:
        return False, 0.0
    _apply_swap(schedule, source, position, target, cand[1])
    return True, cand[0]


def _neighbourhood_pass(schedule: Schedule, dirty: set[int], changed: set[int],
                        best_fn, apply_fn) -> int:
    """One pass of one neighbourhood; returns how many operations were applied.

    A (source, target) pair is only worth scanning when one of the two tours
    changed since the schedule was last known to be a local minimum, so for a
    clean source tour only dirty targets are enumerated at all.
    """
    applied = 0
    dirty_list = [t for t in schedule.tours if t.id in dirty]
    for source in schedule.tours:
        for customer in list(source.customers):
            try:
                position = source.customers.index(customer)
            except ValueError:
                continue  # left this tour earlier in the pass
            targets = schedule.tours if source.id in dirty else dirty_list
            for target in targets:
                if target is source:
                    continue
                cand = best_fn(schedule, source, position, target)
                if cand is not None and cand[0] < -MIN_IMPROVEMENT:
                    apply_fn(schedule, source, position, target, cand[1])
                    dirty.add(source.id)
                    dirty.add(target.id)
                    changed.add(source.id)
                    changed.add(target.id)
                    dirty_list = [t for t in schedule.tours if t.id in dirty]
                    applied += 1
                    break
    return applied


def _move_pass(schedule: Schedule, dirty: set[int], changed: set[int]) -> int:
    return _neighbourhood_pass(schedule, dirty, changed, _best_move, _apply_move)


def _swap_pass(schedule: Schedule, dirty: set[int], changed: set[int]) -> int:
    return _neighbourhood_pass(schedule, dirty, changed, _best_swap, _apply_swap)


def improve_local(schedule: Schedule, dirty_tours: set[int] | None = None) -> ImprovementStats:
    """Drive the schedule to a local minimum of total travel time.

    Relocations are exhausted first (they are cheaper and usually stronger),
    then exchanges get one pass; any applied exchange re-opens the relocation
    neighbourhood.  ``dirty_tours`` narrows the scan to operations touching
    the named tours — sound whenever the schedule was a local minimum before
    those tours changed.  ``None`` scans everything.
    """
    before = total_travel_time(schedule)
    dirty = {t.id for t in schedule.tours} if dirty_tours is None else set(dirty_tours)
    changed: set[int] = set()
    moves = swaps = 0
    rev0 = schedule.revision
    while True:
        while True:
            n = _move_pass(schedule, dirty, changed)
            moves += n
            if n == 0:
                break
        n = _swap_pass(schedule, dirty, changed)
        swaps += n
        if n == 0:
            break
    after = total_travel_time(schedule)
    if schedule.revision > rev0:
        # collapse the per-operation bumps into one revision step
        schedule.revision = rev0 + 1
    return ImprovementStats(moves_applied=moves, swaps_applied=swaps,
                            travel_time_before=before, travel_time_after=after,
                            changed_tours=frozenset(changed))


def improve_hybrid(schedule: Schedule, changed_tours: set[int] | None = None,
                   time_budget_s: float = tsptw.DEFAULT_TIME_BUDGET_S) -> ImprovementStats:
    """Local search, then exact reordering of every tour that changed.

    Each changed tour is reoptimized to proven optimality warm-started from
    its current order, so the exact phase never worsens a tour.
    """
    stats = improve_local(schedule, dirty_tours=changed_tours)
    targets = set(stats.changed_tours)
    if changed_tours is not None:
        targets |= set(changed_tours)
    else:
        targets |= {t.id for t in schedule.tours}

    solves = 0
    exact_changed: set[int] = set()
    for tour_id in sorted(targets):
        tour = schedule.tour_by_id(tour_id)
        if len(tour.customers) < 2:
            continue
        result = tsptw.optimize_tour(tour, schedule.travel, time_budget_s)
        solves += 1
        if result.travel_seconds < tour.travel_seconds - 1e-9:
            tour.customers = list(result.order)
            tour.refresh(schedule.travel, schedule.windows_by_id)
            exact_changed.add(tour_id)
    if exact_changed:
        schedule.revision += 1

    after = total_travel_time(schedule)
    return ImprovementStats(moves_applied=stats.moves_applied,
                            swaps_applied=stats.swaps_applied,
                            travel_time_before=stats.travel_time_before,
                            travel_time_after=after,
                            changed_tours=frozenset(set(stats.changed_tours) | exact_changed),
                            exact_solves=solves,
                            exact_changed=frozenset(exact_changed))

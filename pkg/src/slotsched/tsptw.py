"""Exact single-tour reoptimization under fixed window assignments.

Because delivery windows never overlap and service times are positive, any
feasible visit order is sorted by window; the tour therefore decomposes into
consecutive same-window blocks.  A label-setting dynamic program enumerates
the orderings of each block over (visited-subset, last-visit) states and
chains blocks through Pareto-minimal (travel cost, departure time) labels.
The result is a provably optimal order, or the best order found when the
time budget expires.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

from .model import Customer, EPS, Tour, TravelTimes, tour_travel_time

DEFAULT_TIME_BUDGET_S = 0.05


class OptStatus(enum.Enum):
    OPTIMAL = "optimal"
    TIME_LIMIT = "time_limit"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, slots=True)
class TourOptimizationResult:
    order: tuple[Customer, ...]
    travel_seconds: float
    status: OptStatus
    nodes_explored: int


@dataclass(slots=True)
class _Label:
    """Partial solution ending at ``loc``: cost so far and earliest departure."""

    cost: float
    ready: float  # earliest time the vehicle can leave ``loc``
    loc: tuple[float, float]
    path: tuple[Customer, ...]

    def key(self) -> tuple[float, float, tuple[int, ...]]:
        return self.cost, self.ready, tuple(c.id for c in self.path)


def _prune(labels: list[_Label]) -> list[_Label]:
    """Keep Pareto-minimal (cost, ready) labels; ties keep the smaller path."""
    labels.sort(key=_Label.key)
    kept: list[_Label] = []
    best_ready = float("inf")
    for lab in labels:
        if lab.ready < best_ready - 1e-12:
            kept.append(lab)
            best_ready = lab.ready
    return kept


def _blocks(tour: Tour) -> list[tuple[float, float, list[Customer]]]:
    """Consecutive same-window runs as (window start, window end, members)."""
    out: list[tuple[float, float, list[Customer]]] = []
    for c, ws, we in zip(tour.customers, tour.win_start, tour.win_end):
        if out and out[-1][0] == ws:
            out[-1][2].append(c)
        else:
            out.append((ws, we, [c]))
    for _, _, members in out:
        members.sort(key=lambda c: c.id)
    return out


def optimize_tour(tour: Tour, travel: TravelTimes,
                  time_budget: float = DEFAULT_TIME_BUDGET_S) -> TourOptimizationResult:
    """Minimum-travel-time visit order for one tour's booked customers.

    Warm-started by construction: the incumbent order bounds the answer, so
    the returned objective is never worse than ``tour.travel_seconds`` unless
    the input itself was infeasible.
    """
    warm_order = tuple(tour.customers)
    warm_cost = tour_travel_time(tour, travel)
    n = len(warm_order)
    if n <= 1:
        return TourOptimizationResult(warm_order, warm_cost, OptStatus.OPTIMAL, 0)

    deadline = time.perf_counter() + time_budget
    tsec = travel.seconds
    nodes = 0

    labels = [_Label(0.0, tour.start_time, tour.start_depot, ())]
    for w_start, w_end, members in _blocks(tour):
        b = len(members)
        full = (1 << b) - 1
        # states[(mask, last)] -> Pareto labels ending at members[last]
        states: dict[tuple[int, int], list[_Label]] = {}
        for i, c in enumerate(members):
            cands = []
            for lab in labels:
                arr = lab.ready + tsec(lab.loc, c.location)
                if arr < w_start:
                    arr = w_start
                if arr <= w_end + EPS:
                    cands.append(_Label(lab.cost + tsec(lab.loc, c.location),
                                        arr + c.service_seconds, c.location,
                                        lab.path + (c,)))
                    nodes += 1
            if cands:
                states[(1 << i, i)] = _prune(cands)
        if time.perf_counter() > deadline:
            return TourOptimizationResult(warm_order, warm_cost, OptStatus.TIME_LIMIT, nodes)

        for mask in sorted(range(1, full + 1), key=lambda m: (m.bit_count(), m)):
            if mask.bit_count() >= b:
                continue
            for last in range(b):
                cur = states.get((mask, last))
                if not cur:
                    continue
                last_loc = members[last].location
                for i, c in enumerate(members):
                    if mask & (1 << i):
                        continue
                    leg = tsec(last_loc, c.location)
                    cands = []
                    for lab in cur:
                        arr = lab.ready + leg
                        if arr < w_start:
                            arr = w_start
                        if arr <= w_end + EPS:
                            cands.append(_Label(lab.cost + leg, arr + c.service_seconds,
                                                c.location, lab.path + (c,)))
                            nodes += 1
                    if cands:
                        key = (mask | (1 << i), i)
                        prev = states.get(key)
                        states[key] = _prune(cands if prev is None else prev + cands)
            if time.perf_counter() > deadline:
                return TourOptimizationResult(warm_order, warm_cost, OptStatus.TIME_LIMIT, nodes)

        labels = []
        for last in range(b):
            labels.extend(states.get((full, last), ()))
        labels.sort(key=_Label.key)
        if not labels:
            # the warm start was feasible, so this only happens on bad input
            return TourOptimizationResult(warm_order, warm_cost, OptStatus.INFEASIBLE, nodes)

    best: _Label | None = None
    best_cost = float("inf")
    best_ids: tuple[int, ...] | None = None
    for lab in labels:
        closing = tsec(lab.loc, tour.end_depot)
        if lab.ready + closing > tour.end_time + EPS:
            continue
        cost = lab.cost + closing
        ids = tuple(c.id for c in lab.path)
        if cost < best_cost - 1e-12 or (abs(cost - best_cost) <= 1e-12 and
                                        (best_ids is None or ids < best_ids)):
            best, best_cost, best_ids = lab, cost, ids
    if best is None:
        return TourOptimizationResult(warm_order, warm_cost, OptStatus.INFEASIBLE, nodes)
    if best_cost > warm_cost + 1e-12:
        # float-drift guard: never hand back something worse than the incumbent
        return TourOptimizationResult(warm_order, warm_cost, OptStatus.OPTIMAL, nodes)
    return TourOptimizationResult(best.path, best_cost, OptStatus.OPTIMAL, nodes)

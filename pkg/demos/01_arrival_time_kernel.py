"""Walk through the arrival-time kernel on a three-stop tour.

Shows the cached earliest/latest arrival bounds, why they make a single
insertion check O(1), and what an infeasible insertion looks like.
"""

from slotsched import Customer, FunctionTravel, TimeWindow, Tour
from slotsched.model import (
    insertion_delta,
    insertion_time_feasible,
    tour_time_feasible,
)

windows = [TimeWindow(0, 3600.0, 7200.0), TimeWindow(1, 7200.0, 10800.0)]
wmap = {w.id: w for w in windows}
travel = FunctionTravel(lambda a, b: 600.0)  # every leg takes 10 minutes

tour = Tour(id=0, capacity=100.0, start_time=0.0, end_time=18000.0,
            start_depot=(0.0, 0.0), end_depot=(0.0, 0.0),
            customers=[
                Customer(1, (1.0, 0.0), 10.0, 300.0, assigned_window=0),
                Customer(2, (2.0, 0.0), 10.0, 300.0, assigned_window=0),
                Customer(3, (3.0, 0.0), 10.0, 300.0, assigned_window=1),
            ])
tour.refresh(travel, wmap)

print("visit order:", [c.id for c in tour.customers])
print("earliest arrivals (incl. depots):", tour.earliest)
print("latest arrivals   (incl. depots):", tour.latest)
print("tour time-feasible?", tour_time_feasible(tour))
print()

new = Customer(9, (9.0, 9.0), 5.0, 300.0)
for leg, label in [(300.0, "short detour"), (3600.0, "one-hour detour")]:
    t = FunctionTravel(lambda a, b, leg=leg: leg if (9.0, 9.0) in (a, b) else 600.0)
    tour.refresh(t, wmap)
    ok = insertion_time_feasible(tour, 1, new, windows[0], t)
    extra = insertion_delta(tour, 1, new, t)
    print(f"insert new customer after stop 1 with a {label}: "
          f"feasible={ok}, travel-time delta={extra:+.0f} s")

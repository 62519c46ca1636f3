"""Replay one full ordering day against the engine and print the metrics.

Generates a 500-customer benchmark instance (30 vehicles, 5 one-hour
windows), lets every customer ask for their desired window, and improves
the schedule after each accepted booking.
"""

from slotsched import GenerationParams, generate_instance, run_simulation

params = GenerationParams(grid_side_m=20_000.0, customer_count=500,
                          tour_count=30, window_count=5, tour_capacity=100.0,
                          seed=7)
instance = generate_instance(params)
print(f"instance: {len(instance.customers)} customers, "
      f"{len(instance.fleet)} vehicles, {len(instance.windows)} windows")

for policy in ("none", "local", "hybrid"):
    m = run_simulation(instance, improve_policy=policy)
    print(f"\npolicy={policy}")
    print(f"  customers inserted          {m.total_inserted}")
    print(f"  windows offered (avg)       {m.avg_offered_windows:.2f}")
    print(f"  offer latency (avg)         {m.avg_get_tws_ms:.3f} ms")
    if policy != "none":
        print(f"  improvement step (avg)      {m.avg_improvement_ms:.1f} ms")
        print(f"  objective reduction / step  {m.avg_obj_reduction_pct:.2f} %")
        print(f"  insertion cost recovered    {m.total_insertion_cost_recovered_pct:.1f} %")
    if policy == "hybrid":
        print(f"  exact solves / step         {m.avg_exact_solves:.2f}")
    print(f"  final travel time           {m.final_objective_s / 3600:.2f} h")

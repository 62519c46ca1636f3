"""Online delivery-slot scheduling for capacitated routing with delivery windows."""

from .model import (
    Customer,
    EuclideanTravel,
    FunctionTravel,
    Instance,
    Schedule,
    TimeWindow,
    Tour,
    TravelTimes,
    VehicleSpec,
    total_travel_time,
)
from .engine import BookingResult, OfferSet, get_time_windows, initialize_schedule, set_time_window
from .localsearch import ImprovementStats, improve_hybrid, improve_local
from .tsptw import TourOptimizationResult, optimize_tour
from .benchgen import GenerationParams, generate_instance, read_instance, write_instance
from .sim import RunMetrics, run_simulation

__all__ = [
    "BookingResult",
    "Customer",
    "EuclideanTravel",
    "FunctionTravel",
    "GenerationParams",
    "ImprovementStats",
    "Instance",
    "OfferSet",
    "RunMetrics",
    "Schedule",
    "TimeWindow",
    "Tour",
    "TourOptimizationResult",
    "TravelTimes",
    "VehicleSpec",
    "generate_instance",
    "get_time_windows",
    "improve_hybrid",
    "improve_local",
    "initialize_schedule",
    "optimize_tour",
    "read_instance",
    "run_simulation",
    "set_time_window",
    "total_travel_time",
    "write_instance",
]

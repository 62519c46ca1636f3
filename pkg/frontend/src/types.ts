// JSON shapes of the booking service endpoints.

export interface WindowOfferDto {
  id: number;
  start_s: number;
  end_s: number;
  available: boolean;
  tour_id?: number;
  gap_index?: number;
  delta_s?: number;
}

export interface OffersResponse {
  schedule_revision: number;
  windows: WindowOfferDto[];
}

export interface BookedResponse {
  outcome: "booked";
  customer_id: number;
  window: number;
  tour_id: number;
  gap_index: number;
  delta_s: number;
  revision: number;
}

export interface ConflictResponse {
  error: string;
  detail: string;
  offers: OffersResponse;
}

export interface VisitDto {
  customer_id: number;
  x_m: number;
  y_m: number;
  weight: number;
  service_s: number;
  window: number;
  earliest_arrival_s: number;
}

export interface TourDto {
  id: number;
  capacity: number;
  load: number;
  start_s: number;
  end_s: number;
  depot: { x_m: number; y_m: number };
  travel_s: number;
  visits: VisitDto[];
}

export interface ScheduleResponse {
  revision: number;
  objective_s: number;
  windows: { id: number; start_s: number; end_s: number }[];
  tours: TourDto[];
}

export interface ImproveResponse {
  moves_applied: number;
  swaps_applied: number;
  travel_time_before_s: number;
  travel_time_after_s: number;
  changed_tours: number[];
  exact_solves: number;
  duration_ms: number;
}

export interface CustomerPayload {
  x_m: number;
  y_m: number;
  weight: number;
  service_s: number;
}

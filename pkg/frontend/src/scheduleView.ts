// Schedule view: polls /schedule and draws the working schedule on a canvas.
// Pure view: points, polylines and load bars come verbatim from the payload.

import type { ApiClient } from "./api.js";
import type { ScheduleResponse, TourDto } from "./types.js";

export const POLL_INTERVAL_MS = 2000;

const TOUR_COLORS = [
  "#2563eb", "#dc2626", "#16a34a", "#9333ea", "#ea580c",
  "#0891b2", "#ca8a04", "#db2777", "#4d7c0f", "#7c3aed",
];

export function tourColor(tourId: number): string {
  return TOUR_COLORS[tourId % TOUR_COLORS.length];
}

export class ScheduleView {
  current: ScheduleResponse | null = null;
  stale = false;

  constructor(private readonly api: ApiClient) {}

  async refresh(): Promise<void> {
    try {
      this.current = await this.api.schedule();
      this.stale = false;
    } catch {
      this.stale = true; // keep showing the last good snapshot, badged stale
    }
  }

  customerPointCount(): number {
    if (!this.current) return 0;
    return this.current.tours.reduce((n, t) => n + t.visits.length, 0);
  }

  objectiveSeconds(): number | null {
    return this.current ? this.current.objective_s : null;
  }

  loadFractions(): { tourId: number; fraction: number }[] {
    if (!this.current) return [];
    return this.current.tours.map((t) => ({
      tourId: t.id,
      fraction: t.capacity > 0 ? t.load / t.capacity : 0,
    }));
  }
}

function gridExtent(schedule: ScheduleResponse): number {
  let max = 1;
  for (const tour of schedule.tours) {
    max = Math.max(max, tour.depot.x_m, tour.depot.y_m);
    for (const v of tour.visits) max = Math.max(max, v.x_m, v.y_m);
  }
  return max * 1.05;
}

function drawTour(ctx: CanvasRenderingContext2D, tour: TourDto,
                  scale: number, height: number): void {
  const px = (x: number) => x * scale;
  const py = (y: number) => height - y * scale; // meters grow upward
  ctx.strokeStyle = tourColor(tour.id);
  ctx.fillStyle = tourColor(tour.id);
  ctx.lineWidth = 1.25;
  ctx.beginPath();
  ctx.moveTo(px(tour.depot.x_m), py(tour.depot.y_m));
  for (const v of tour.visits) ctx.lineTo(px(v.x_m), py(v.y_m));
  ctx.lineTo(px(tour.depot.x_m), py(tour.depot.y_m));
  ctx.stroke();
  for (const v of tour.visits) {
    ctx.beginPath();
    ctx.arc(px(v.x_m), py(v.y_m), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

/** Draw depot, visit points and tour polylines in abstract meters. */
export function drawSchedule(canvas: HTMLCanvasElement,
                             schedule: ScheduleResponse | null): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!schedule || schedule.tours.length === 0) return;

  const scale = Math.min(canvas.width, canvas.height) / gridExtent(schedule);
  for (const tour of schedule.tours) {
    if (tour.visits.length) drawTour(ctx, tour, scale, canvas.height);
  }
  const depot = schedule.tours[0].depot;
  ctx.fillStyle = "#111827";
  ctx.fillRect(depot.x_m * scale - 5, canvas.height - depot.y_m * scale - 5, 10, 10);
}

// Browser wiring: map clicks set the delivery location, offers render as
// window buttons, the schedule view polls every two seconds.

import { ApiClient } from "./api.js";
import { BookingFlow } from "./booking.js";
import { renderBanner, renderBookingToast, renderLoadBars, renderOffers } from "./render.js";
import { POLL_INTERVAL_MS, ScheduleView, drawSchedule } from "./scheduleView.js";

const api = new ApiClient((url, init) => fetch(url, init), "");
const flow = new BookingFlow(api);
const scheduleView = new ScheduleView(api);

const el = (id: string) => document.getElementById(id) as HTMLElement;
const mapCanvas = el("map") as HTMLCanvasElement;
const scheduleCanvas = el("schedule-canvas") as HTMLCanvasElement;
const weightInput = el("weight") as HTMLInputElement;

function mapMeters(): number {
  return scheduleView.current
    ? Math.max(1000, ...scheduleView.current.tours.map((t) => 2 * t.depot.x_m))
    : 20000;
}

function redrawBooking(): void {
  renderOffers(el("windows"), flow.offers, (windowId) => void pick(windowId));
  renderBanner(el("banner"), flow.banner);
  renderBookingToast(el("toast"), flow);
  const loc = flow.location;
  el("location-readout").textContent = loc
    ? `delivery at (${Math.round(loc.x)} m, ${Math.round(loc.y)} m)`
    : "click the map to set the delivery location";
}

async function redrawSchedule(): Promise<void> {
  await scheduleView.refresh();
  drawSchedule(scheduleCanvas, scheduleView.current);
  renderLoadBars(el("load-bars"), scheduleView.loadFractions());
  const objective = scheduleView.objectiveSeconds();
  el("objective").textContent = objective === null
    ? "no schedule yet"
    : `total travel ${(objective / 3600).toFixed(2)} h over ` +
      `${scheduleView.customerPointCount()} deliveries`;
  el("stale-badge").classList.toggle("hidden", !scheduleView.stale);
}

async function pick(windowId: number): Promise<void> {
  await flow.book(windowId);
  redrawBooking();
  await redrawSchedule();
}

mapCanvas.addEventListener("click", (event) => {
  const rect = mapCanvas.getBoundingClientRect();
  const meters = mapMeters();
  const x = ((event.clientX - rect.left) / rect.width) * meters;
  const y = (1 - (event.clientY - rect.top) / rect.height) * meters;
  flow.setLocation(x, y);
  redrawBooking();
});

el("get-windows").addEventListener("click", async () => {
  flow.weight = Number(weightInput.value) || 7;
  await flow.loadOffers();
  redrawBooking();
});

el("improve-now").addEventListener("click", async () => {
  try {
    await api.improve("hybrid");
  } catch {
    // surfaced through the stale badge on the next poll
  }
  await redrawSchedule();
});

redrawBooking();
void redrawSchedule();
setInterval(() => void redrawSchedule(), POLL_INTERVAL_MS);

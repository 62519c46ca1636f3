// Booking-flow controller: pure state over the API, no DOM in here.
// The UI never computes availability itself; every offer view is a direct
// rendering of the last /offers (or 409 fresh-offers) payload it received.

import type { ApiClient, BookResult } from "./api.js";
import type { CustomerPayload, OffersResponse } from "./types.js";

export interface UiOfferView {
  windowId: number;
  label: string;
  available: boolean;
  deltaSeconds: number | null;
  revision: number;
}

export interface BookedInfo {
  customerId: number;
  windowId: number;
  tourId: number;
  deltaSeconds: number;
  revision: number;
}

export type BookingOutcome = "booked" | "unavailable" | "invalid" | "network-error";

export function formatClock(seconds: number): string {
  const h = Math.floor(seconds / 3600);
  const m = Math.floor((seconds % 3600) / 60);
  const pad = (n: number) => String(n).padStart(2, "0");
  return `${pad(h)}:${pad(m)}`;
}

export function windowLabel(startS: number, endS: number): string {
  return `${formatClock(startS)}–${formatClock(endS)}`;
}

function toViews(offers: OffersResponse): UiOfferView[] {
  return offers.windows.map((w) => ({
    windowId: w.id,
    label: windowLabel(w.start_s, w.end_s),
    available: w.available,
    deltaSeconds: w.delta_s ?? null,
    revision: offers.schedule_revision,
  }));
}

export class BookingFlow {
  location: { x: number; y: number } | null = null;
  weight = 7;
  serviceSeconds = 300;
  offers: UiOfferView[] = [];
  revision: number | null = null;
  banner: string | null = null;
  lastBooked: BookedInfo | null = null;

  constructor(private readonly api: ApiClient) {}

  private customer(): CustomerPayload {
    if (!this.location) throw new Error("no delivery location set");
    return {
      x_m: this.location.x,
      y_m: this.location.y,
      weight: this.weight,
      service_s: this.serviceSeconds,
    };
  }

  setLocation(x: number, y: number): void {
    this.location = { x, y };
    this.offers = [];
    this.revision = null;
    this.banner = null;
  }

  async loadOffers(): Promise<boolean> {
    if (!this.location) {
      this.banner = "Pick a delivery location on the map first.";
      return false;
    }
    try {
      const offers = await this.api.offers(this.customer());
      this.offers = toViews(offers);
      this.revision = offers.schedule_revision;
      this.banner = null;
      return true;
    } catch (err) {
      this.banner = `Could not load delivery windows — retry. (${String(err)})`;
      return false;
    }
  }

  /** Book one of the rendered windows, carrying the revision they came from. */
  async book(windowId: number): Promise<BookingOutcome> {
    const offer = this.offers.find((o) => o.windowId === windowId);
    if (!offer || this.revision === null) return "invalid";
    if (!offer.available) return "invalid";

    let result: BookResult;
    try {
      result = await this.api.book(this.customer(), windowId, this.revision);
    } catch (err) {
      this.banner = `Booking failed — retry. (${String(err)})`;
      return "network-error";
    }

    if (result.kind === "booked") {
      this.lastBooked = {
        customerId: result.body.customer_id,
        windowId: result.body.window,
        tourId: result.body.tour_id,
        deltaSeconds: result.body.delta_s,
        revision: result.body.revision,
      };
      this.offers = [];
      this.revision = result.body.revision;
      this.banner = null;
      return "booked";
    }
    if (result.kind === "unavailable") {
      // double-check lost: re-render straight from the fresh offers
      this.offers = toViews(result.body.offers);
      this.revision = result.body.offers.schedule_revision;
      this.banner = "That window was just taken — here is the updated availability.";
      return "unavailable";
    }
    this.banner = `Booking rejected: ${result.detail}`;
    return "invalid";
  }
}

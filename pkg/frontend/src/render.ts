// DOM rendering for the booking panel: window buttons, banner, booking toast.

import type { BookingFlow, UiOfferView } from "./booking.js";

export function renderOffers(
  container: HTMLElement,
  offers: UiOfferView[],
  onPick: (windowId: number) => void,
): void {
  container.replaceChildren();
  for (const offer of offers) {
    const button = document.createElement("button");
    button.type = "button";
    button.textContent = offer.label;
    button.dataset.windowId = String(offer.windowId);
    button.classList.add("window-button");
    if (offer.available) {
      if (offer.deltaSeconds !== null) {
        button.title = `adds ${Math.round(offer.deltaSeconds)} s of travel`;
      }
      button.addEventListener("click", () => onPick(offer.windowId));
    } else {
      button.classList.add("crossed-out");
      button.disabled = true;
    }
    container.appendChild(button);
  }
}

export function renderBanner(element: HTMLElement, banner: string | null): void {
  element.textContent = banner ?? "";
  element.classList.toggle("hidden", banner === null);
}

export function renderBookingToast(element: HTMLElement, flow: BookingFlow): void {
  if (!flow.lastBooked) {
    element.textContent = "";
    element.classList.add("hidden");
    return;
  }
  const b = flow.lastBooked;
  element.textContent =
    `Booked! Customer ${b.customerId} rides on tour ${b.tourId} ` +
    `(+${Math.round(b.deltaSeconds)} s travel).`;
  element.classList.remove("hidden");
}

export function renderLoadBars(
  container: HTMLElement,
  loads: { tourId: number; fraction: number }[],
): void {
  container.replaceChildren();
  for (const { tourId, fraction } of loads) {
    const row = document.createElement("div");
    row.className = "load-row";
    const label = document.createElement("span");
    label.textContent = `tour ${tourId}`;
    const bar = document.createElement("div");
    bar.className = "load-bar";
    const fill = document.createElement("div");
    fill.className = "load-fill";
    fill.style.width = `${Math.min(100, Math.round(fraction * 100))}%`;
    bar.appendChild(fill);
    row.append(label, bar);
    container.appendChild(row);
  }
}

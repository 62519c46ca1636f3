// Thin typed client over the booking service; the fetch implementation is
// injected so tests can run against an in-memory fixture server.

import type {
  BookedResponse,
  ConflictResponse,
  CustomerPayload,
  ImproveResponse,
  OffersResponse,
  ScheduleResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export type BookResult =
  | { kind: "booked"; body: BookedResponse }
  | { kind: "unavailable"; body: ConflictResponse }
  | { kind: "invalid"; detail: string };

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base: string = "",
  ) {}

  private async post(path: string, body: unknown): Promise<Response> {
    return this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async offers(customer: CustomerPayload): Promise<OffersResponse> {
    const resp = await this.post("/offers", customer);
    if (!resp.ok) throw new Error(`offers failed: HTTP ${resp.status}`);
    return (await resp.json()) as OffersResponse;
  }

  async book(
    customer: CustomerPayload,
    windowId: number,
    offerRevision: number,
  ): Promise<BookResult> {
    const resp = await this.post("/book", {
      customer,
      window: windowId,
      offer_revision: offerRevision,
    });
    if (resp.status === 200) {
      return { kind: "booked", body: (await resp.json()) as BookedResponse };
    }
    if (resp.status === 409) {
      return { kind: "unavailable", body: (await resp.json()) as ConflictResponse };
    }
    const detail = await resp.text();
    return { kind: "invalid", detail: `HTTP ${resp.status}: ${detail}` };
  }

  async schedule(): Promise<ScheduleResponse> {
    const resp = await this.fetchFn(this.base + "/schedule");
    if (!resp.ok) throw new Error(`schedule failed: HTTP ${resp.status}`);
    return (await resp.json()) as ScheduleResponse;
  }

  async improve(policy: "local" | "hybrid"): Promise<ImproveResponse> {
    const resp = await this.post("/improve", { policy });
    if (!resp.ok) throw new Error(`improve failed: HTTP ${resp.status}`);
    return (await resp.json()) as ImproveResponse;
  }
}

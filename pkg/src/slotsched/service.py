"""HTTP booking service: the live offer/book/improve loop over one schedule.

A single working schedule serves all requests.  Offer requests run
concurrently; bookings and improvement runs serialize through a writer lock.
Every mutation is appended to an NDJSON event log, and replaying the log from
its init record reconstructs the schedule exactly, which is the crash-recovery
story: snapshots every ``SNAPSHOT_EVERY`` events keep replays short.

Environment: ``PORT`` (default 8000) and ``LOG_PATH`` when run as a server.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import benchgen
from .engine import BookingOutcome, OfferSet, get_time_windows, initialize_schedule, set_time_window
from .localsearch import ImprovementStats, improve_hybrid, improve_local
from .model import Customer, Schedule, total_travel_time
from .sim import POLICY_HYBRID, POLICY_LOCAL

SNAPSHOT_EVERY = 100

EVENT_INIT = "init"
EVENT_BOOKED = "booked"
EVENT_IMPROVED = "improved"


class _RWLock:
    """Many readers or one writer; writers wait for readers to drain."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    def acquire_read(self) -> None:
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1

    def release_read(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self) -> None:
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True

    def release_write(self) -> None:
        with self._cond:
            self._writer = False
            self._cond.notify_all()


class EventLog:
    """Append-only NDJSON log with periodic schedule snapshots."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path else None
        self.seq = 0

    def reset(self) -> None:
        self.seq = 0
        if self.path:
            self.path.write_text("")
            snap = self._snapshot_path()
            if snap.exists():
                snap.unlink()

    def _snapshot_path(self) -> Path:
        return self.path.with_suffix(self.path.suffix + ".snapshot.json")

    def append(self, kind: str, payload: dict, snapshot_fn=None) -> int:
        self.seq += 1
        if self.path:
            record = {"seq": self.seq, "ts": time.time(), "kind": kind, "payload": payload}
            with self.path.open("a") as fh:
                fh.write(json.dumps(record) + "\n")
            if snapshot_fn is not None and self.seq % SNAPSHOT_EVERY == 0:
                self._snapshot_path().write_text(
                    json.dumps({"seq": self.seq, "state": snapshot_fn()}))
        return self.seq

    @staticmethod
    def read_events(path: str | Path) -> list[dict]:
        events = []
        for line in Path(path).read_text().splitlines():
            if line.strip():
                events.append(json.loads(line))
        return events


@dataclass(slots=True)
class _OpMetrics:
    count: int = 0
    total_ms: float = 0.0

    def record(self, ms: float) -> None:
        self.count += 1
        self.total_ms += ms

    def as_dict(self) -> dict:
        return {"count": self.count,
                "mean_ms": self.total_ms / self.count if self.count else 0.0}


@dataclass(slots=True)
class Session:
    """One delivery day: the working schedule plus its booking bookkeeping."""

    schedule: Schedule
    instance_doc: dict
    auto_improve_every: int = 0
    improve_policy: str = POLICY_LOCAL
    next_customer_id: int = 1
    bookings_since_improve: int = 0
    auto_improvements: int = 0
    dirty_tours: set[int] = field(default_factory=set)
    carry_exact: set[int] = field(default_factory=set)


def _customer_from_payload(payload: dict, customer_id: int) -> Customer:
    try:
        return Customer(id=customer_id,
                        location=(float(payload["x_m"]), float(payload["y_m"])),
                        weight=float(payload["weight"]),
                        service_seconds=float(payload["service_s"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise _BadRequest(f"invalid customer payload: {exc}") from exc


class _BadRequest(ValueError):
    pass


class _Conflict(ValueError):
    pass


def schedule_snapshot(schedule: Schedule) -> dict:
    """JSON view of the whole working schedule, objective included."""
    tours = []
    for t in schedule.tours:
        tours.append({
            "id": t.id,
            "capacity": t.capacity,
            "load": t.load,
            "start_s": t.start_time,
            "end_s": t.end_time,
            "depot": {"x_m": t.start_depot[0], "y_m": t.start_depot[1]},
            "travel_s": t.travel_seconds,
            "visits": [{
                "customer_id": c.id,
                "x_m": c.location[0],
                "y_m": c.location[1],
                "weight": c.weight,
                "service_s": c.service_seconds,
                "window": c.assigned_window,
                "earliest_arrival_s": t.earliest[k + 1],
            } for k, c in enumerate(t.customers)],
        })
    return {
        "revision": schedule.revision,
        "objective_s": total_travel_time(schedule),
        "windows": [{"id": w.id, "start_s": w.start, "end_s": w.end}
                    for w in schedule.windows],
        "tours": tours,
    }


def _offers_payload(schedule: Schedule, offers: OfferSet) -> dict:
    by_id = {o.window_id: o for o in offers.windows}
    windows = []
    for w in schedule.windows:
        offer = by_id.get(w.id)
        entry = {"id": w.id, "start_s": w.start, "end_s": w.end,
                 "available": offer is not None}
        if offer is not None:
            entry.update(tour_id=offer.tour_id, gap_index=offer.gap_index,
                         delta_s=offer.delta_seconds)
        windows.append(entry)
    return {"schedule_revision": offers.schedule_revision, "windows": windows}


def _stats_payload(stats: ImprovementStats, duration_ms: float) -> dict:
    return {
        "moves_applied": stats.moves_applied,
        "swaps_applied": stats.swaps_applied,
        "travel_time_before_s": stats.travel_time_before,
        "travel_time_after_s": stats.travel_time_after,
        "changed_tours": sorted(stats.changed_tours),
        "exact_solves": stats.exact_solves,
        "duration_ms": duration_ms,
    }


class BookingService:
    """Engine session plus locking, metrics and the event log."""

    def __init__(self, log_path: str | Path | None = None):
        self.log = EventLog(log_path)
        self.lock = _RWLock()
        self.session: Session | None = None
        self.recovered_from_snapshot = False
        self._improve_busy = threading.Lock()
        self.metrics = {"offers": _OpMetrics(), "bookings": _OpMetrics(),
                        "improvements": _OpMetrics()}
        if log_path and Path(log_path).exists() and Path(log_path).read_text().strip():
            self._recover(log_path)

    # ------------------------------------------------------------ lifecycle

    def _build_session(self, doc: dict, auto_every: int, policy: str) -> Session:
        instance = benchgen.instance_from_doc(doc)
        schedule = initialize_schedule(instance.fleet, instance.windows, instance.travel)
        return Session(schedule=schedule, instance_doc=doc,
                       auto_improve_every=auto_every, improve_policy=policy)

    def init_instance(self, doc: dict, force: bool, auto_every: int, policy: str) -> dict:
        if policy not in (POLICY_LOCAL, POLICY_HYBRID):
            raise _BadRequest(f"unknown improvement policy {policy!r}")
        if auto_every < 0:
            raise _BadRequest("auto_improve_every must be >= 0")
        self.lock.acquire_write()
        try:
            if self.session is not None and not force:
                raise _Conflict("a session is active; pass force=true to replace it")
            try:
                session = self._build_session(doc, auto_every, policy)
            except (benchgen.InstanceFormatError, ValueError) as exc:
                raise _BadRequest(str(exc)) from exc
            self.session = session
            self.log.reset()
            self.log.append(EVENT_INIT, {"instance": doc,
                                         "auto_improve_every": auto_every,
                                         "improve_policy": policy})
            return {"revision": session.schedule.revision,
                    "tours": len(session.schedule.tours),
                    "windows": len(session.schedule.windows)}
        finally:
            self.lock.release_write()

    def _recover(self, log_path: str | Path) -> None:
        """Rebuild the session after a restart: snapshot plus log tail.

        The newest snapshot (written every ``SNAPSHOT_EVERY`` events) short-
        circuits the replay; without one the whole log is replayed.
        """
        events = EventLog.read_events(log_path)
        if not events:
            return
        snap_path = self.log._snapshot_path()
        self.recovered_from_snapshot = False
        if snap_path.exists():
            snap = json.loads(snap_path.read_text())
            if snap["seq"] <= events[-1]["seq"]:
                session = _session_from_init(events[0])
                _apply_snapshot_state(session, snap["state"])
                for event in events:
                    if event["seq"] > snap["seq"] and event["kind"] != EVENT_INIT:
                        _apply_event(session, event)
                _restore_counters(session, events)
                self.session = session
                self.recovered_from_snapshot = True
        if self.session is None:
            self.session = replay_events(events)
        self.log.seq = events[-1]["seq"]

    # ------------------------------------------------------------- requests

    def _require_session(self) -> Session:
        if self.session is None:
            raise _Conflict("no active session; POST /instance first")
        return self.session

    def offers(self, payload: dict) -> dict:
        t0 = time.perf_counter()
        self.lock.acquire_read()
        try:
            session = self._require_session()
            customer = _customer_from_payload(payload, customer_id=0)
            offers = get_time_windows(session.schedule, customer)
            return _offers_payload(session.schedule, offers)
        finally:
            self.lock.release_read()
            self.metrics["offers"].record((time.perf_counter() - t0) * 1e3)

    def book(self, payload: dict) -> tuple[int, dict]:
        t0 = time.perf_counter()
        self.lock.acquire_write()
        try:
            session = self._require_session()
            try:
                window_id = int(payload["window"])
                offer_revision = int(payload["offer_revision"])
                customer_payload = payload["customer"]
            except (KeyError, TypeError, ValueError) as exc:
                raise _BadRequest(f"invalid booking payload: {exc}") from exc
            if window_id not in session.schedule.windows_by_id:
                raise _BadRequest(f"unknown window {window_id}")

            customer = _customer_from_payload(customer_payload, session.next_customer_id)
            result = set_time_window(session.schedule, customer, window_id)
            if result.outcome is BookingOutcome.NO_LONGER_AVAILABLE:
                return 409, {
                    "error": "window_no_longer_available",
                    "detail": f"window {window_id} has no feasible insertion anymore",
                    "offers": _offers_payload(session.schedule, result.fresh_offers),
                }

            session.next_customer_id += 1
            session.bookings_since_improve += 1
            tour_id, gap_index, delta = result.applied
            session.dirty_tours.add(tour_id)
            response = {
                "outcome": "booked",
                "customer_id": customer.id,
                "window": window_id,
                "tour_id": tour_id,
                "gap_index": gap_index,
                "delta_s": delta,
                "offer_revision": offer_revision,
                "revision": session.schedule.revision,
            }
            self.log.append(EVENT_BOOKED, {
                "customer": {"id": customer.id, "x_m": customer.location[0],
                             "y_m": customer.location[1], "weight": customer.weight,
                             "service_s": customer.service_seconds},
                "window": window_id, "tour_id": tour_id, "gap_index": gap_index,
                "delta_s": delta, "revision": session.schedule.revision,
            }, snapshot_fn=lambda: schedule_snapshot(session.schedule))

            if (session.auto_improve_every
                    and session.bookings_since_improve >= session.auto_improve_every):
                stats, duration_ms = self._improve_locked(session, session.improve_policy)
                session.auto_improvements += 1
                response["auto_improvement"] = _stats_payload(stats, duration_ms)
                response["revision"] = session.schedule.revision
            return 200, response
        finally:
            self.lock.release_write()
            self.metrics["bookings"].record((time.perf_counter() - t0) * 1e3)

    def _improve_locked(self, session: Session, policy: str) -> tuple[ImprovementStats, float]:
        """Run one improvement under the writer lock and log it."""
        t0 = time.perf_counter()
        changed = session.dirty_tours | session.carry_exact
        if policy == POLICY_HYBRID:
            stats = improve_hybrid(session.schedule, changed_tours=changed)
        else:
            stats = improve_local(session.schedule, dirty_tours=changed)
        duration_ms = (time.perf_counter() - t0) * 1e3
        session.dirty_tours = set()
        session.carry_exact = set(stats.exact_changed)
        session.bookings_since_improve = 0
        orders = {tid: [c.id for c in session.schedule.tour_by_id(tid).customers]
                  for tid in sorted(stats.changed_tours)}
        self.log.append(EVENT_IMPROVED, {
            "policy": policy,
            "orders": orders,
            "revision": session.schedule.revision,
            "stats": {"moves_applied": stats.moves_applied,
                      "swaps_applied": stats.swaps_applied,
                      "travel_time_before_s": stats.travel_time_before,
                      "travel_time_after_s": stats.travel_time_after,
                      "exact_solves": stats.exact_solves},
        }, snapshot_fn=lambda: schedule_snapshot(session.schedule))
        self.metrics["improvements"].record(duration_ms)
        return stats, duration_ms

    def improve(self, payload: dict) -> dict:
        policy = payload.get("policy", POLICY_LOCAL)
        if policy not in (POLICY_LOCAL, POLICY_HYBRID):
            raise _BadRequest(f"unknown improvement policy {policy!r}")
        if not self._improve_busy.acquire(blocking=False):
            raise _Conflict("an improvement run is already in progress")
        try:
            self.lock.acquire_write()
            try:
                session = self._require_session()
                stats, duration_ms = self._improve_locked(session, policy)
                return _stats_payload(stats, duration_ms)
            finally:
                self.lock.release_write()
        finally:
            self._improve_busy.release()

    def snapshot(self) -> dict:
        self.lock.acquire_read()
        try:
            session = self._require_session()
            return schedule_snapshot(session.schedule)
        finally:
            self.lock.release_read()

    def operational_metrics(self) -> dict:
        self.lock.acquire_read()
        try:
            out = {name: m.as_dict() for name, m in self.metrics.items()}
            if self.session is not None:
                out["revision"] = self.session.schedule.revision
                out["objective_s"] = total_travel_time(self.session.schedule)
                out["bookings_since_improve"] = self.session.bookings_since_improve
                out["auto_improvements"] = self.session.auto_improvements
                out["customers"] = self.session.schedule.customer_count()
            return out
        finally:
            self.lock.release_read()


def _session_from_init(event: dict) -> Session:
    if event["kind"] != EVENT_INIT:
        raise ValueError("event log must start with an init record")
    init = event["payload"]
    instance = benchgen.instance_from_doc(init["instance"])
    schedule = initialize_schedule(instance.fleet, instance.windows, instance.travel)
    return Session(schedule=schedule, instance_doc=init["instance"],
                   auto_improve_every=init.get("auto_improve_every", 0),
                   improve_policy=init.get("improve_policy", POLICY_LOCAL))


def _apply_event(session: Session, event: dict) -> None:
    from .model import insert_customer

    schedule = session.schedule
    kind = event["kind"]
    payload = event["payload"]
    if kind == EVENT_BOOKED:
        c = payload["customer"]
        customer = Customer(id=int(c["id"]), location=(float(c["x_m"]), float(c["y_m"])),
                            weight=float(c["weight"]),
                            service_seconds=float(c["service_s"]),
                            assigned_window=int(payload["window"]))
        insert_customer(schedule.tour_by_id(int(payload["tour_id"])),
                        int(payload["gap_index"]), customer,
                        schedule.travel, schedule.windows_by_id)
        schedule.revision = int(payload["revision"])
        session.next_customer_id = max(session.next_customer_id, customer.id + 1)
    elif kind == EVENT_IMPROVED:
        # every tour a customer moved to or from is recorded, so assigning
        # each recorded tour its logged order reproduces the whole state
        orders = {int(tid): [int(cid) for cid in order]
                  for tid, order in payload["orders"].items()}
        pool = {c.id: c for t in schedule.tours for c in t.customers}
        for tid, order in orders.items():
            tour = schedule.tour_by_id(tid)
            tour.customers = [pool[cid] for cid in order]
            tour.refresh(schedule.travel, schedule.windows_by_id)
        schedule.revision = int(payload["revision"])
    else:
        raise ValueError(f"unknown event kind {kind!r}")


def _apply_snapshot_state(session: Session, state: dict) -> None:
    schedule = session.schedule
    for tour_state in state["tours"]:
        tour = schedule.tour_by_id(int(tour_state["id"]))
        tour.customers = [
            Customer(id=int(v["customer_id"]),
                     location=(float(v["x_m"]), float(v["y_m"])),
                     weight=float(v["weight"]),
                     service_seconds=float(v["service_s"]),
                     assigned_window=int(v["window"]))
            for v in tour_state["visits"]
        ]
        tour.refresh(schedule.travel, schedule.windows_by_id)
        session.next_customer_id = max(
            session.next_customer_id,
            max((c.id for c in tour.customers), default=0) + 1)
    schedule.revision = int(state["revision"])


def _restore_counters(session: Session, events: list[dict]) -> None:
    since = 0
    for event in events:
        if event["kind"] == EVENT_BOOKED:
            since += 1
        elif event["kind"] == EVENT_IMPROVED:
            since = 0
    session.bookings_since_improve = since


def replay_events(events: list[dict]) -> Session:
    """Rebuild a session by applying the log from its init record."""
    if not events:
        raise ValueError("empty event log")
    session = _session_from_init(events[0])
    for event in events[1:]:
        _apply_event(session, event)
    _restore_counters(session, events)
    return session


def create_app(log_path: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="slotsched booking service")
    service = BookingService(log_path=log_path)
    app.state.service = service

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "bad_request", "detail": str(exc.errors())})

    @app.exception_handler(_BadRequest)
    async def _bad_request_handler(request: Request, exc: _BadRequest):
        return JSONResponse(status_code=400,
                            content={"error": "bad_request", "detail": str(exc)})

    @app.exception_handler(_Conflict)
    async def _conflict_handler(request: Request, exc: _Conflict):
        return JSONResponse(status_code=409,
                            content={"error": "conflict", "detail": str(exc)})

    @app.post("/instance", status_code=201)
    def post_instance(doc: dict,
                      force: bool = Query(False),
                      auto_improve_every: int = Query(0),
                      improve_policy: str = Query(POLICY_LOCAL)):
        return service.init_instance(doc, force, auto_improve_every, improve_policy)

    @app.post("/offers")
    def post_offers(payload: dict):
        return service.offers(payload)

    @app.post("/book")
    def post_book(payload: dict):
        status, body = service.book(payload)
        return JSONResponse(status_code=status, content=body)

    @app.post("/improve")
    def post_improve(payload: dict | None = None):
        return service.improve(payload or {})

    @app.get("/schedule")
    def get_schedule():
        return service.snapshot()

    @app.get("/metrics")
    def get_metrics():
        return service.operational_metrics()

    ui_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def main() -> None:
    import uvicorn

    port = int(os.environ.get("PORT", "8000"))
    log_path = os.environ.get("LOG_PATH")
    uvicorn.run(create_app(log_path=log_path), host="0.0.0.0", port=port)


if __name__ == "__main__":
    main()

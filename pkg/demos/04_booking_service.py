"""Drive the HTTP booking service end to end, in process.

Initializes a delivery day, shows the offer/book loop (including a window
going unavailable under capacity pressure and the 409 + fresh-offers
double-check), then an improvement run and the event log that makes the
whole session replayable.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from slotsched.benchgen import GenerationParams, generate_instance, instance_to_doc
from slotsched.service import EventLog, create_app, replay_events, schedule_snapshot

log_path = Path(tempfile.mkdtemp()) / "events.ndjson"
client = TestClient(create_app(log_path=log_path))

doc = instance_to_doc(generate_instance(GenerationParams(
    grid_side_m=4000.0, customer_count=0, tour_count=2, window_count=3,
    tour_capacity=25.0, seed=1)))
print("POST /instance ->", client.post("/instance", json=doc).json())

def offers_line(body):
    marks = [f"{w['id']}:{'open' if w['available'] else 'CROSSED-OUT'}"
             for w in body["windows"]]
    return f"revision {body['schedule_revision']}  " + "  ".join(marks)

customer = {"x_m": 1200.0, "y_m": 900.0, "weight": 9.0, "service_s": 300.0}
body = client.post("/offers", json=customer).json()
print("offers for first customer:   ", offers_line(body))

for i in range(6):
    resp = client.post("/book", json={
        "customer": {**customer, "x_m": 400.0 + 600 * i},
        "window": 1, "offer_revision": body["schedule_revision"]})
    print(f"book window 1 (weight 9) #{i + 1}: HTTP {resp.status_code}"
          + ("" if resp.status_code == 200 else "  -> fresh offers returned"))
    if resp.status_code == 409:
        print("fresh offers after the 409: ",
              offers_line(resp.json()["offers"]))
        break

print("\nPOST /improve ->", client.post("/improve", json={"policy": "hybrid"}).json())

snap = client.get("/schedule").json()
print(f"\nschedule: revision {snap['revision']}, objective {snap['objective_s']:.0f} s, "
      f"{sum(len(t['visits']) for t in snap['tours'])} customers on "
      f"{len(snap['tours'])} tours")

events = EventLog.read_events(log_path)
print(f"event log: {[e['kind'] for e in events]}")
rebuilt = replay_events(events)
print("replay reproduces the live schedule:",
      schedule_snapshot(rebuilt.schedule) == snap)

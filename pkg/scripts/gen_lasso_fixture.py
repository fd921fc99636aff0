#!/usr/bin/env python3
"""Generate golden fixtures for the browser frontend tests.

Writes frontend/tests/fixtures/lasso_cases.json (200 random polygons over a
fixed EventBox payload, with the server-side even-odd oracle's id sets) and
frontend/tests/fixtures/eventbox_payload.json (the payload itself, with and
without outliers shown). Rerun after changing payload shapes or the
selection rule.
"""

import json
import math
import random
from pathlib import Path

from seqbox.engine import Session, apply_action, eventbox_payload
from seqbox.geometry import lasso_select

N_POLYGONS = 200
SEED = 20240501


def random_polygon(rng: random.Random, x_range, y_range):
    kind = rng.choice(["triangle", "rect", "blob"])
    cx = rng.uniform(*x_range)
    cy = rng.uniform(*y_range)
    rx = rng.uniform(0.05, 0.6) * (x_range[1] - x_range[0])
    ry = rng.uniform(0.05, 0.6) * (y_range[1] - y_range[0])
    if kind == "triangle":
        return [
            [cx, cy - ry],
            [cx - rx, cy + ry],
            [cx + rx, cy + ry],
        ]
    if kind == "rect":
        return [[cx - rx, cy - ry], [cx + rx, cy - ry], [cx + rx, cy + ry], [cx - rx, cy + ry]]
    n = rng.randint(5, 9)
    pts = []
    for i in range(n):
        angle = 2 * math.pi * i / n
        r = rng.uniform(0.4, 1.0)
        pts.append([cx + r * rx * math.cos(angle), cy + r * ry * math.sin(angle)])
    return pts


def main() -> None:
    session = Session(session_id="fixture")
    apply_action(session, "synthetic", {"n_sequences": 120, "seed": 33})
    payload = eventbox_payload(
        session, {"event_type": "wait", "b": "day_of_week", "s_v": "urgency"}
    )
    payload_hidden = eventbox_payload(
        session,
        {"event_type": "wait", "b": "day_of_week", "s_v": "urgency", "show_outliers": False},
    )

    points = [(p[0], float(p[1]), float(p[2])) for p in payload["points"]]
    xs = [p[1] for p in points]
    ys = [p[2] for p in points]
    rng = random.Random(SEED)
    cases = []
    for i in range(N_POLYGONS):
        polygon = random_polygon(rng, (min(xs), max(xs)), (min(ys), max(ys)))
        selected = sorted(lasso_select(points, [tuple(v) for v in polygon]))
        cases.append({"polygon": polygon, "selected": selected})

    fixtures = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    (fixtures / "lasso_cases.json").write_text(json.dumps({"cases": cases}, indent=1))
    (fixtures / "eventbox_payload.json").write_text(
        json.dumps({"shown": payload, "hidden": payload_hidden}, indent=1)
    )
    print(f"wrote {N_POLYGONS} lasso cases and payload fixtures to {fixtures}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""End-to-end demo on synthetic clinic data.

Generates visits with a planted Monday slowdown, aggregates the care events,
clusters, aligns, and writes a report plus EventBox JSON/SVG artifacts to
demo_out/ using the same pipeline the CLI runs.
"""

import json
import sys
import tempfile
from pathlib import Path

from seqbox.cli import main as cli_main

CONFIG = {
    "synthetic": {
        "n_sequences": 600,
        "seed": 7,
        "planted_effects": [{"day_of_week": "Mon", "multiplier": 1.3}],
    },
    "actions": [
        {"action": "substitute_aggregate", "params": {"source_types": ["wait", "consult"], "new_type": "care"}},
        {"action": "cluster", "params": {"k": 3}},
        {
            "action": "align",
            "params": {
                "anchors": [
                    {"event_type": "arrival", "strength": "hard"},
                    {"event_type": "care", "strength": "soft"},
                    {"event_type": "complete", "strength": "hard"},
                ]
            },
        },
        {"action": "sort", "params": {"event_type": "care"}},
        {"action": "select_query", "params": {"query": "Cluster ID = C1"}},
    ],
    "outputs": [
        {"kind": "report_json", "path": "report.json", "params": {"categorical": ["day_of_week", "urgency"], "response": "duration", "max_order": 2}},
        {"kind": "report_md", "path": "report.md", "params": {"categorical": ["day_of_week", "urgency"], "response": "duration", "max_order": 2}},
        {"kind": "eventbox_json", "path": "care_box.json", "params": {"event_type": "care", "b": "day_of_week"}},
        {"kind": "eventbox_svg", "path": "care_box.svg", "params": {"event_type": "care", "b": "day_of_week", "s_v": "urgency"}},
        {"kind": "dataset", "path": "dataset.json"},
    ],
}


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(CONFIG, fh)
        config_path = fh.name
    code = cli_main(["--config", config_path, "--out", str(out_dir), "--verbose"])
    if code == 0:
        print(f"artifacts in {out_dir}/")
    return code


if __name__ == "__main__":
    sys.exit(main())

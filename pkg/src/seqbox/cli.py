"""Batch pipeline runner.

Runs an ingest -> transform -> analysis pipeline described by one JSON config
and writes the declared artifacts. The config's ``actions`` use the same
vocabulary as the HTTP service, so a saved service action log is a valid
pipeline. Exit codes: 0 success, 1 validation error, 2 runtime error.

Config shape:
    {
      "ingest": {...load params...}  |  "synthetic": {...synthetic params...},
      "actions": [{"action": "...", "params": {...}}, ...],
      "outputs": [
        {"kind": "report_json", "path": "report.json", "params": {...}},
        {"kind": "report_md",   "path": "report.md",   "params": {...}},
        {"kind": "eventbox_json", "path": "box.json",  "params": {...}},
        {"kind": "eventbox_svg",  "path": "box.svg",   "params": {...}},
        {"kind": "quality_report", "path": "quality.json"},
        {"kind": "dataset", "path": "dataset.json"}
      ]
    }
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import engine
from .errors import ConfigError, SeqboxError
from .model import canonical_json, dataset_to_obj
from .svg import render_eventbox_svg

log = logging.getLogger("seqbox")

OUTPUT_KINDS = (
    "report_json",
    "report_md",
    "eventbox_json",
    "eventbox_svg",
    "quality_report",
    "dataset",
)


def run_pipeline(config: dict, out_dir: Path, seed: int | None = None) -> list[Path]:
    """Execute one pipeline config; returns the written paths.

    Raises on failure after removing any partially written outputs.
    """
    _validate_config(config)
    session = engine.Session(session_id="cli")

    t0 = time.perf_counter()
    if "ingest" in config:
        engine.apply_action(session, "load", config["ingest"])
    else:
        params = dict(config["synthetic"])
        if seed is not None:
            params["seed"] = seed
        engine.apply_action(session, "synthetic", params)
    log.info("loaded dataset in %.3fs", time.perf_counter() - t0)

    for step in config.get("actions", []):
        t0 = time.perf_counter()
        engine.apply_action(session, step["action"], step.get("params", {}))
        log.info("action %-20s %.3fs", step["action"], time.perf_counter() - t0)

    written: list[Path] = []
    try:
        for output in config.get("outputs", []):
            path = out_dir / output["path"]
            path.parent.mkdir(parents=True, exist_ok=True)
            t0 = time.perf_counter()
            _write_output(session, output, path)
            written.append(path)
            log.info("output %-20s %.3fs (%s)", output["kind"], time.perf_counter() - t0, path)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def _validate_config(config: dict) -> None:
    if ("ingest" in config) == ("synthetic" in config):
        raise ConfigError("config needs exactly one of an ingest or a synthetic section")
    for step in config.get("actions", []):
        if "action" not in step:
            raise ConfigError(f"action entry without an action name: {step}")
    for output in config.get("outputs", []):
        if output.get("kind") not in OUTPUT_KINDS:
            raise ConfigError(f"unknown output kind {output.get('kind')!r}")
        if "path" not in output:
            raise ConfigError(f"output entry without a path: {output}")


def _write_output(session: engine.Session, output: dict, path: Path) -> None:
    kind = output["kind"]
    params = output.get("params", {})
    if kind == "report_json":
        report = engine.build_report(session, params)
        path.write_text(canonical_json(report.to_obj()) + "\n", encoding="utf-8")
    elif kind == "report_md":
        report = engine.build_report(session, params)
        path.write_text(report.to_markdown(), encoding="utf-8")
    elif kind == "eventbox_json":
        box = engine.build_box(session, params)
        path.write_text(canonical_json(box.to_obj()) + "\n", encoding="utf-8")
    elif kind == "eventbox_svg":
        box = engine.build_box(session, params)
        path.write_text(render_eventbox_svg(box.to_obj()), encoding="utf-8")
    elif kind == "quality_report":
        if session.quality_report is None:
            raise ConfigError("no quality report available (synthetic data)")
        path.write_text(canonical_json(session.quality_report.to_obj()) + "\n", encoding="utf-8")
    elif kind == "dataset":
        path.write_text(canonical_json(dataset_to_obj(session.dataset)) + "\n", encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="seqbox", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override synthetic seed")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )

    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except FileNotFoundError:
        log.error("config file not found: %s", args.config)
        return 1
    except json.JSONDecodeError as exc:
        log.error("config is not valid JSON: %s", exc)
        return 1

    try:
        written = run_pipeline(config, Path(args.out), seed=args.seed)
    except SeqboxError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failure
        log.error("runtime error: %s", exc)
        return 2
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

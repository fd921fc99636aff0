"""CSV ingestion: schema inference, validation, and data-quality reporting.

Dirty rows are the norm in the event logs this package targets, so loading
is warn-and-continue: rejected rows are counted with a reason code and up to
ten sample row indices per issue, and the load only aborts when every row is
rejected.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone as dt_timezone
from pathlib import Path
from zoneinfo import ZoneInfo

from .errors import EmptyDatasetError, SchemaError
from .model import (
    AttributeSchema,
    AttributeSpec,
    AttributeValue,
    Dataset,
    EventOccurrence,
    KIND_CATEGORICAL,
    KIND_NUMERICAL,
    KIND_TEMPORAL,
    LEVEL_EVENT,
    LEVEL_SEQUENCE,
    Sequence,
)

DEFAULT_TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"

#: Empty cells are the only missing marker; anything else is data.
MISSING_TOKEN = ""

MAX_ISSUE_SAMPLES = 10


@dataclass(frozen=True)
class ColumnMap:
    """Names of the required columns in the events file.

    Exactly one of ``end`` and ``duration`` must be set; a duration column is
    interpreted in seconds and converted to ``end = start + duration``.
    """

    sequence_id: str = "sequence_id"
    event_type: str = "event_type"
    start: str = "start"
    end: str | None = "end"
    duration: str | None = None

    def __post_init__(self):
        if (self.end is None) == (self.duration is None):
            raise SchemaError("map exactly one of an end column or a duration column")

    @property
    def mapped(self) -> tuple[str, ...]:
        time_col = self.end if self.end is not None else self.duration
        return (self.sequence_id, self.event_type, self.start, time_col)


@dataclass(frozen=True)
class IngestConfig:
    events_path: str | Path = ""
    sequence_attrs_path: str | Path | None = None
    delimiter: str = ","
    columns: ColumnMap = field(default_factory=ColumnMap)
    timestamp_format: str = DEFAULT_TIMESTAMP_FORMAT
    timezone: str = "UTC"
    kind_overrides: dict = field(default_factory=dict)


@dataclass
class QualityReport:
    """Accounting of what the loader saw, accepted, and rejected.

    ``rows_read == accepted + rejected`` for the events file; every rejected
    row is tallied under a reason in ``reject_reasons``.
    """

    rows_read: int = 0
    accepted: int = 0
    rejected: int = 0
    duplicate_rows: int = 0
    near_duplicate_rows: int = 0
    invalid_timestamps: int = 0
    negative_durations: int = 0
    missing_cells: dict = field(default_factory=dict)
    reject_reasons: dict = field(default_factory=dict)
    sequence_rows_read: int = 0
    orphan_sequence_attrs: int = 0
    issue_samples: dict = field(default_factory=dict)

    def _note(self, issue: str, row_index: int) -> None:
        samples = self.issue_samples.setdefault(issue, [])
        if len(samples) < MAX_ISSUE_SAMPLES:
            samples.append(row_index)

    def _reject(self, reason: str, row_index: int) -> None:
        self.rejected += 1
        self.reject_reasons[reason] = self.reject_reasons.get(reason, 0) + 1
        self._note(reason, row_index)

    def to_obj(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "duplicate_rows": self.duplicate_rows,
            "near_duplicate_rows": self.near_duplicate_rows,
            "invalid_timestamps": self.invalid_timestamps,
            "negative_durations": self.negative_durations,
            "missing_cells": dict(sorted(self.missing_cells.items())),
            "reject_reasons": dict(sorted(self.reject_reasons.items())),
            "sequence_rows_read": self.sequence_rows_read,
            "orphan_sequence_attrs": self.orphan_sequence_attrs,
            "issue_samples": {k: list(v) for k, v in sorted(self.issue_samples.items())},
        }


def _parses_as_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _parse_timestamp(text: str, fmt: str, tz: ZoneInfo) -> int | None:
    try:
        dt = datetime.strptime(text, fmt)
    except ValueError:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=tz)
    return int(dt.timestamp())


def infer_schema(
    sample_rows: list[dict],
    config: IngestConfig,
    sequence_sample_rows: list[dict] | None = None,
) -> AttributeSchema:
    """Infer attribute kinds from raw string records.

    Unmapped event-file columns become event-level attributes and
    sequence-file columns (beyond sequence_id) become sequence-level ones.
    A column is numerical if every non-missing sample parses as a number,
    temporal if every non-missing sample parses with the timestamp format,
    else categorical. ``config.kind_overrides`` wins over inference.
    """
    if not sample_rows:
        raise SchemaError("need at least one sample row to infer a schema")
    mapped = set(config.columns.mapped)
    tz = ZoneInfo(config.timezone)
    specs: list[AttributeSpec] = []
    event_names = [c for c in sample_rows[0].keys() if c not in mapped]
    for name in event_names:
        kind = _infer_kind(name, (row.get(name, "") for row in sample_rows), config, tz)
        specs.append(AttributeSpec(name, kind, LEVEL_EVENT))
    if sequence_sample_rows:
        seq_names = [
            c for c in sequence_sample_rows[0].keys() if c != config.columns.sequence_id
        ]
        for name in seq_names:
            kind = _infer_kind(
                name, (row.get(name, "") for row in sequence_sample_rows), config, tz
            )
            specs.append(AttributeSpec(name, kind, LEVEL_SEQUENCE))
    return AttributeSchema(tuple(specs))


def _infer_kind(name, values, config: IngestConfig, tz: ZoneInfo) -> str:
    if name in config.kind_overrides:
        kind = config.kind_overrides[name]
        if kind not in (KIND_NUMERICAL, KIND_CATEGORICAL, KIND_TEMPORAL):
            raise SchemaError(f"invalid kind override {kind!r} for column {name!r}")
        return kind
    non_missing = [v for v in values if v != MISSING_TOKEN]
    if non_missing and all(_parses_as_number(v) for v in non_missing):
        return KIND_NUMERICAL
    if non_missing and all(
        _parse_timestamp(v, config.timestamp_format, tz) is not None for v in non_missing
    ):
        return KIND_TEMPORAL
    return KIND_CATEGORICAL


def _read_rows(path: str | Path, delimiter: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: missing header row")
        return [dict(row) for row in reader]


def load_dataset(config: IngestConfig) -> tuple[Dataset, QualityReport]:
    """Load an events CSV (and optional sequence-attrs CSV) into a Dataset.

    Rows are grouped by sequence id and sorted by start time (ties keep file
    order). Exact duplicate rows collapse to one; rows with unparseable
    timestamps or end before start are rejected and counted.
    """
    report = QualityReport()
    tz = ZoneInfo(config.timezone)
    cols = config.columns
    rows = _read_rows(config.events_path, config.delimiter)
    if not rows:
        raise EmptyDatasetError(f"{config.events_path}: no data rows")
    header = list(rows[0].keys())
    for required in cols.mapped:
        if required not in header:
            raise SchemaError(f"mapped column {required!r} not in events header")

    seq_rows: list[dict] = []
    if config.sequence_attrs_path is not None:
        seq_rows = _read_rows(config.sequence_attrs_path, config.delimiter)
        if seq_rows and cols.sequence_id not in seq_rows[0]:
            raise SchemaError(
                f"mapped column {cols.sequence_id!r} not in sequence-attrs header"
            )

    schema = infer_schema(rows, config, seq_rows or None)
    event_specs = {s.name: s for s in schema.at_level(LEVEL_EVENT)}
    seq_specs = {s.name: s for s in schema.at_level(LEVEL_SEQUENCE)}

    seen_rows: set[tuple] = set()
    seen_core: set[tuple] = set()
    accepted: list[tuple[str, int, int, str, dict, int]] = []
    for idx, row in enumerate(rows):
        report.rows_read += 1
        fingerprint = tuple(sorted(row.items()))
        if fingerprint in seen_rows:
            report.duplicate_rows += 1
            report._reject("duplicate", idx)
            continue
        seen_rows.add(fingerprint)

        for col, value in row.items():
            if (value or "") == MISSING_TOKEN:
                report.missing_cells[col] = report.missing_cells.get(col, 0) + 1
                report._note(f"missing:{col}", idx)

        sid = row.get(cols.sequence_id, "")
        etype = row.get(cols.event_type, "")
        if sid == MISSING_TOKEN or etype == MISSING_TOKEN:
            report._reject("missing_key_field", idx)
            continue
        start = _parse_timestamp(row.get(cols.start, ""), config.timestamp_format, tz)
        if start is None:
            report.invalid_timestamps += 1
            report._reject("invalid_timestamp", idx)
            continue
        if cols.end is not None:
            end = _parse_timestamp(row.get(cols.end, ""), config.timestamp_format, tz)
            if end is None:
                report.invalid_timestamps += 1
                report._reject("invalid_timestamp", idx)
                continue
        else:
            raw = row.get(cols.duration, "")
            if not _parses_as_number(raw):
                report.invalid_timestamps += 1
                report._reject("invalid_duration", idx)
                continue
            end = start + round(float(raw))
        if end < start:
            report.negative_durations += 1
            report._reject("negative_duration", idx)
            continue

        core = (sid, etype, start, end)
        if core in seen_core:
            report.near_duplicate_rows += 1
            report._note("near_duplicate", idx)
        seen_core.add(core)

        attrs = {
            name: _coerce(row.get(name, ""), spec, config, tz)
            for name, spec in event_specs.items()
        }
        report.accepted += 1
        accepted.append((sid, start, end, etype, attrs, idx))

    if not accepted:
        raise EmptyDatasetError(f"{config.events_path}: all rows rejected")

    seq_attr_map: dict[str, dict] = {}
    for idx, row in enumerate(seq_rows):
        report.sequence_rows_read += 1
        sid = row.get(cols.sequence_id, "")
        if sid in seq_attr_map:
            report._note("duplicate_sequence_attrs", idx)
            continue
        seq_attr_map[sid] = {
            name: _coerce(row.get(name, ""), spec, config, tz)
            for name, spec in seq_specs.items()
        }

    by_sequence: dict[str, list] = {}
    for item in accepted:
        by_sequence.setdefault(item[0], []).append(item)

    sequences = []
    for sid in sorted(by_sequence):
        items = sorted(by_sequence[sid], key=lambda item: item[1])  # stable on start
        events = tuple(
            EventOccurrence(
                id=f"{sid}#{k}",
                sequence_id=sid,
                event_type=item[3],
                start=item[1],
                end=item[2],
                attrs=item[4],
            )
            for k, item in enumerate(items)
        )
        sequences.append(
            Sequence(id=sid, events=events, attrs=seq_attr_map.get(sid, _all_missing(seq_specs)))
        )

    for sid in seq_attr_map:
        if sid not in by_sequence:
            report.orphan_sequence_attrs += 1

    dataset = Dataset(
        schema=schema, sequences=tuple(sequences), timezone=config.timezone
    )
    return dataset, report


def _all_missing(specs: dict) -> dict:
    return {name: None for name in specs}


def _coerce(raw: str, spec: AttributeSpec, config: IngestConfig, tz: ZoneInfo) -> AttributeValue:
    if (raw or "") == MISSING_TOKEN:
        return None
    if spec.kind == KIND_NUMERICAL:
        return float(raw) if _parses_as_number(raw) else None
    if spec.kind == KIND_TEMPORAL:
        return _parse_timestamp(raw, config.timestamp_format, tz)
    return raw


def _format_timestamp(ts: int, fmt: str, tz_name: str) -> str:
    return datetime.fromtimestamp(ts, dt_timezone.utc).astimezone(ZoneInfo(tz_name)).strftime(fmt)


def export_csv(
    dataset: Dataset,
    events_path: str | Path,
    sequence_attrs_path: str | Path | None = None,
    timestamp_format: str = DEFAULT_TIMESTAMP_FORMAT,
) -> None:
    """Write a dataset back to the canonical CSV layout.

    The output re-loads to an equal dataset under the same config: columns
    are sequence_id, event_type, start, end, then event attributes in schema
    order.
    """
    event_specs = dataset.schema.at_level(LEVEL_EVENT)
    with open(events_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["sequence_id", "event_type", "start", "end", *(s.name for s in event_specs)]
        )
        for seq in dataset.sequences:
            for ev in seq.events:
                writer.writerow(
                    [
                        seq.id,
                        ev.event_type,
                        _format_timestamp(ev.start, timestamp_format, dataset.timezone),
                        _format_timestamp(ev.end, timestamp_format, dataset.timezone),
                        *(
                            _cell(ev.attrs.get(s.name), s, timestamp_format, dataset.timezone)
                            for s in event_specs
                        ),
                    ]
                )
    if sequence_attrs_path is None:
        return
    seq_specs = dataset.schema.at_level(LEVEL_SEQUENCE)
    with open(sequence_attrs_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sequence_id", *(s.name for s in seq_specs)])
        for seq in dataset.sequences:
            writer.writerow(
                [
                    seq.id,
                    *(
                        _cell(seq.attrs.get(s.name), s, timestamp_format, dataset.timezone)
                        for s in seq_specs
                    ),
                ]
            )


def _cell(value: AttributeValue, spec: AttributeSpec, fmt: str, tz_name: str) -> str:
    if value is None:
        return MISSING_TOKEN
    if spec.kind == KIND_TEMPORAL:
        return _format_timestamp(int(value), fmt, tz_name)
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)

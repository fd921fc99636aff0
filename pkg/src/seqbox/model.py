"""Core data model: schemas, event occurrences, sequences, datasets, selections.

Datasets are immutable after construction; transformations return new
instances and append a provenance record. Attribute values are plain Python
values with ``None`` standing for missing; the schema decides how a value is
interpreted (numerical, categorical, or temporal).

Timestamps are integer seconds since the Unix epoch, UTC. Derived temporal
attributes (``duration``, ``start_time_of_day``, ``day_of_week``) are
computed on demand in the dataset's configured timezone.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime
from functools import cached_property, lru_cache
from typing import Iterable, Mapping
from zoneinfo import ZoneInfo

import json

from .errors import (
    NotFoundError,
    SchemaError,
    StaleSelectionError,
    UnknownAttributeError,
)

KIND_TEMPORAL = "temporal"
KIND_CATEGORICAL = "categorical"
KIND_NUMERICAL = "numerical"
KINDS = (KIND_TEMPORAL, KIND_CATEGORICAL, KIND_NUMERICAL)

LEVEL_EVENT = "event"
LEVEL_SEQUENCE = "sequence"
LEVELS = (LEVEL_EVENT, LEVEL_SEQUENCE)

WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")

#: Derived event-level attributes, pure functions of an occurrence's
#: start/end. Their names are reserved and may not appear in a schema.
DERIVED_ATTRS: dict[str, tuple[str, str]] = {
    "duration": (KIND_NUMERICAL, LEVEL_EVENT),
    "start_time_of_day": (KIND_NUMERICAL, LEVEL_EVENT),
    "day_of_week": (KIND_CATEGORICAL, LEVEL_EVENT),
}

#: Reserved pseudo-attribute resolved through a ClusterAssignment, not the
#: schema. Categorical, sequence level.
CLUSTER_ATTR = "Cluster ID"

AttributeValue = float | int | str | None


def is_missing(value: AttributeValue) -> bool:
    return value is None


@lru_cache(maxsize=16)
def _tz(name: str) -> ZoneInfo:
    return ZoneInfo(name)


@dataclass(frozen=True)
class AttributeSpec:
    """One attribute definition: a name, a kind, and the level it lives at."""

    name: str
    kind: str
    level: str
    unit: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown attribute kind {self.kind!r}")
        if self.level not in LEVELS:
            raise SchemaError(f"unknown attribute level {self.level!r}")


@dataclass(frozen=True)
class AttributeSchema:
    """The typed attribute catalogue for one dataset.

    Names must be unique across both levels; the derived names and
    ``Cluster ID`` are reserved.
    """

    attributes: tuple[AttributeSpec, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for spec in self.attributes:
            if spec.name in seen:
                raise SchemaError(f"duplicate attribute name {spec.name!r}")
            if spec.name in DERIVED_ATTRS or spec.name == CLUSTER_ATTR:
                raise SchemaError(f"attribute name {spec.name!r} is reserved")
            seen.add(spec.name)

    @cached_property
    def _by_name(self) -> dict[str, AttributeSpec]:
        return {spec.name: spec for spec in self.attributes}

    def get(self, name: str) -> AttributeSpec | None:
        return self._by_name.get(name)

    def require(self, name: str) -> AttributeSpec:
        spec = self._by_name.get(name)
        if spec is None:
            raise UnknownAttributeError(f"unknown attribute {name!r}")
        return spec

    def kind_of(self, name: str) -> str:
        """Kind of a schema attribute or derived name. Raises if unknown."""
        if name in DERIVED_ATTRS:
            return DERIVED_ATTRS[name][0]
        if name == CLUSTER_ATTR:
            return KIND_CATEGORICAL
        return self.require(name).kind

    def level_of(self, name: str) -> str:
        if name in DERIVED_ATTRS:
            return DERIVED_ATTRS[name][1]
        if name == CLUSTER_ATTR:
            return LEVEL_SEQUENCE
        return self.require(name).level

    def knows(self, name: str) -> bool:
        return name in self._by_name or name in DERIVED_ATTRS or name == CLUSTER_ATTR

    def at_level(self, level: str) -> tuple[AttributeSpec, ...]:
        return tuple(s for s in self.attributes if s.level == level)


@dataclass(frozen=True)
class EventOccurrence:
    """A single timestamped event occurrence within one sequence."""

    id: str
    sequence_id: str
    event_type: str
    start: int
    end: int
    attrs: Mapping[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self):
        if self.end < self.start:
            raise SchemaError(
                f"occurrence {self.id!r}: end {self.end} before start {self.start}"
            )

    @property
    def duration(self) -> float:
        return float(self.end - self.start)


@dataclass(frozen=True)
class Sequence:
    """An ordered run of event occurrences plus sequence-level attributes."""

    id: str
    events: tuple[EventOccurrence, ...]
    attrs: Mapping[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self):
        prev = None
        for ev in self.events:
            if ev.sequence_id != self.id:
                raise SchemaError(
                    f"occurrence {ev.id!r} carries sequence_id {ev.sequence_id!r} "
                    f"inside sequence {self.id!r}"
                )
            if prev is not None and ev.start < prev:
                raise SchemaError(f"sequence {self.id!r}: events out of order")
            prev = ev.start

    @cached_property
    def signature(self) -> tuple[str, ...]:
        return tuple(ev.event_type for ev in self.events)


@dataclass(frozen=True)
class Dataset:
    """Immutable container for sequences under one schema.

    ``version`` increases with every transformation; ``provenance`` holds one
    descriptor per applied transformation (op, params, input/output version).
    """

    schema: AttributeSchema
    sequences: tuple[Sequence, ...]
    provenance: tuple[dict, ...] = ()
    timezone: str = "UTC"
    version: int = 0

    def __post_init__(self):
        self._validate()

    def _validate(self) -> None:
        _tz(self.timezone)  # fail early on a bad zone name
        event_specs = {s.name: s for s in self.schema.at_level(LEVEL_EVENT)}
        seq_specs = {s.name: s for s in self.schema.at_level(LEVEL_SEQUENCE)}
        seen_occ: set[str] = set()
        seen_seq: set[str] = set()
        for seq in self.sequences:
            if seq.id in seen_seq:
                raise SchemaError(f"duplicate sequence id {seq.id!r}")
            seen_seq.add(seq.id)
            _check_attrs(seq.attrs, seq_specs, f"sequence {seq.id!r}")
            for ev in seq.events:
                if ev.id in seen_occ:
                    raise SchemaError(f"duplicate occurrence id {ev.id!r}")
                seen_occ.add(ev.id)
                _check_attrs(ev.attrs, event_specs, f"occurrence {ev.id!r}")

    @cached_property
    def _occ_index(self) -> dict[str, tuple[EventOccurrence, Sequence]]:
        index: dict[str, tuple[EventOccurrence, Sequence]] = {}
        for seq in self.sequences:
            for ev in seq.events:
                index[ev.id] = (ev, seq)
        return index

    @cached_property
    def _seq_index(self) -> dict[str, Sequence]:
        return {seq.id: seq for seq in self.sequences}

    @property
    def n_sequences(self) -> int:
        return len(self.sequences)

    @cached_property
    def n_events(self) -> int:
        return sum(len(seq.events) for seq in self.sequences)

    def sequence(self, sequence_id: str) -> Sequence:
        try:
            return self._seq_index[sequence_id]
        except KeyError:
            raise NotFoundError(f"unknown sequence {sequence_id!r}") from None

    def occurrence(self, occurrence_id: str) -> EventOccurrence:
        try:
            return self._occ_index[occurrence_id][0]
        except KeyError:
            raise NotFoundError(f"unknown occurrence {occurrence_id!r}") from None

    def owner_of(self, occurrence_id: str) -> Sequence:
        try:
            return self._occ_index[occurrence_id][1]
        except KeyError:
            raise NotFoundError(f"unknown occurrence {occurrence_id!r}") from None

    def iter_occurrences(self) -> Iterable[tuple[EventOccurrence, Sequence]]:
        for seq in self.sequences:
            for ev in seq.events:
                yield ev, seq

    @cached_property
    def event_types(self) -> tuple[str, ...]:
        """Event types in order of first appearance."""
        seen: dict[str, None] = {}
        for seq in self.sequences:
            for ev in seq.events:
                seen.setdefault(ev.event_type, None)
        return tuple(seen)

    def with_transformation(
        self, op: str, params: dict, sequences: tuple[Sequence, ...]
    ) -> "Dataset":
        """New dataset version with ``sequences`` and a provenance record."""
        record = {
            "op": op,
            "params": params,
            "input_version": self.version,
            "output_version": self.version + 1,
        }
        return replace(
            self,
            sequences=sequences,
            provenance=self.provenance + (record,),
            version=self.version + 1,
        )


def _check_attrs(
    attrs: Mapping[str, AttributeValue], specs: Mapping[str, AttributeSpec], where: str
) -> None:
    for name, value in attrs.items():
        spec = specs.get(name)
        if spec is None:
            raise SchemaError(f"{where}: attribute {name!r} not in schema at this level")
        if value is None:
            continue
        if spec.kind == KIND_NUMERICAL and not _is_number(value):
            raise SchemaError(f"{where}: {name!r} expects a number, got {value!r}")
        if spec.kind == KIND_CATEGORICAL and not isinstance(value, str):
            raise SchemaError(f"{where}: {name!r} expects a category, got {value!r}")
        if spec.kind == KIND_TEMPORAL and not _is_number(value):
            raise SchemaError(f"{where}: {name!r} expects a timestamp, got {value!r}")


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def resolve_attribute(dataset: Dataset, occurrence_id: str, name: str) -> AttributeValue:
    """Value of ``name`` as seen from one occurrence.

    Event-level attributes come from the occurrence itself, sequence-level
    ones from the owning sequence. The derived temporal names are computed
    from the occurrence's start/end in the dataset timezone.
    """
    try:
        ev, seq = dataset._occ_index[occurrence_id]
    except KeyError:
        raise NotFoundError(f"unknown occurrence {occurrence_id!r}") from None
    return resolve_on(dataset, ev, seq, name)


def resolve_on(
    dataset: Dataset, ev: EventOccurrence, seq: Sequence, name: str
) -> AttributeValue:
    """Same as :func:`resolve_attribute` without the occurrence-id lookup."""
    if name in DERIVED_ATTRS:
        if name == "duration":
            return float(ev.end - ev.start)
        local = datetime.fromtimestamp(ev.start, _tz(dataset.timezone))
        if name == "start_time_of_day":
            return local.hour * 60.0 + local.minute + local.second / 60.0
        return WEEKDAYS[local.weekday()]
    spec = dataset.schema.require(name)
    if spec.level == LEVEL_EVENT:
        return ev.attrs.get(name)
    return seq.attrs.get(name)


@dataclass(frozen=True)
class SelectionSet:
    """The cross-panel coordination currency: sequence ids plus occurrence ids.

    Invariant: the owning sequence of every retained occurrence is itself
    retained. ``dataset_version`` pins the dataset the ids refer to.
    """

    sequence_ids: frozenset[str]
    occurrence_ids: frozenset[str]
    origin: str = ""
    dataset_version: int = 0

    @property
    def is_empty(self) -> bool:
        return not self.sequence_ids and not self.occurrence_ids


def selection_from_sequences(
    dataset: Dataset, sequence_ids: Iterable[str], origin: str = ""
) -> SelectionSet:
    """Selection of whole sequences: all their occurrences are included."""
    seq_ids = frozenset(sequence_ids)
    occ_ids = set()
    for sid in seq_ids:
        occ_ids.update(ev.id for ev in dataset.sequence(sid).events)
    return SelectionSet(seq_ids, frozenset(occ_ids), origin, dataset.version)


def selection_from_occurrences(
    dataset: Dataset, occurrence_ids: Iterable[str], origin: str = ""
) -> SelectionSet:
    """Selection of individual occurrences plus their owning sequences."""
    occ_ids = frozenset(occurrence_ids)
    seq_ids = frozenset(dataset.owner_of(oid).id for oid in occ_ids)
    return SelectionSet(seq_ids, occ_ids, origin, dataset.version)


def selection_all(dataset: Dataset, origin: str = "all") -> SelectionSet:
    return selection_from_sequences(dataset, (s.id for s in dataset.sequences), origin)


def selection_combine(
    dataset: Dataset, a: SelectionSet, b: SelectionSet, op: str
) -> SelectionSet:
    """Set algebra on selections, re-normalized to keep occurrence containment.

    ``op`` is one of ``union``, ``intersect``, ``difference``. Both selections
    must refer to the same dataset version.
    """
    if a.dataset_version != b.dataset_version:
        raise StaleSelectionError(
            f"selections from versions {a.dataset_version} and {b.dataset_version}"
        )
    if op == "union":
        seq_ids = a.sequence_ids | b.sequence_ids
        occ_ids = a.occurrence_ids | b.occurrence_ids
    elif op == "intersect":
        seq_ids = a.sequence_ids & b.sequence_ids
        occ_ids = a.occurrence_ids & b.occurrence_ids
    elif op == "difference":
        seq_ids = a.sequence_ids - b.sequence_ids
        occ_ids = a.occurrence_ids - b.occurrence_ids
    else:
        raise ValueError(f"unknown selection op {op!r}")
    occ_ids = frozenset(
        oid for oid in occ_ids if dataset.owner_of(oid).id in seq_ids
    )
    origin = f"({a.origin}) {op} ({b.origin})"
    return SelectionSet(frozenset(seq_ids), occ_ids, origin, a.dataset_version)


# ---------------------------------------------------------------------------
# Canonical serialization. Used for replay-determinism checks and snapshots:
# two equal datasets serialize to byte-identical JSON.

def dataset_to_obj(dataset: Dataset) -> dict:
    return {
        "version": dataset.version,
        "timezone": dataset.timezone,
        "schema": [
            {"name": s.name, "kind": s.kind, "level": s.level, "unit": s.unit}
            for s in dataset.schema.attributes
        ],
        "sequences": [
            {
                "id": seq.id,
                "attrs": {k: seq.attrs[k] for k in sorted(seq.attrs)},
                "events": [
                    {
                        "id": ev.id,
                        "event_type": ev.event_type,
                        "start": ev.start,
                        "end": ev.end,
                        "attrs": {k: ev.attrs[k] for k in sorted(ev.attrs)},
                    }
                    for ev in seq.events
                ],
            }
            for seq in dataset.sequences
        ],
        "provenance": list(dataset.provenance),
    }


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def dataset_from_obj(obj: dict) -> Dataset:
    schema = AttributeSchema(
        tuple(
            AttributeSpec(s["name"], s["kind"], s["level"], s.get("unit"))
            for s in obj["schema"]
        )
    )
    sequences = tuple(
        Sequence(
            id=s["id"],
            events=tuple(
                EventOccurrence(
                    id=e["id"],
                    sequence_id=s["id"],
                    event_type=e["event_type"],
                    start=e["start"],
                    end=e["end"],
                    attrs=dict(e["attrs"]),
                )
                for e in s["events"]
            ),
            attrs=dict(s["attrs"]),
        )
        for s in obj["sequences"]
    )
    return Dataset(
        schema=schema,
        sequences=sequences,
        provenance=tuple(obj.get("provenance", ())),
        timezone=obj.get("timezone", "UTC"),
        version=obj.get("version", 0),
    )

"""Shared builders for tests: tiny datasets and random dataset generation."""

from __future__ import annotations

import random

from seqbox.model import (
    AttributeSchema,
    AttributeSpec,
    Dataset,
    EventOccurrence,
    Sequence,
)

EVENT_SYMBOLS = "abcdefg"


def make_sequence(sid: str, types: list[str], start0: int = 0, attrs: dict | None = None) -> Sequence:
    events = tuple(
        EventOccurrence(
            id=f"{sid}#{k}",
            sequence_id=sid,
            event_type=t,
            start=start0 + k * 100,
            end=start0 + k * 100 + 60,
        )
        for k, t in enumerate(types)
    )
    return Sequence(id=sid, events=events, attrs=attrs or {})


def make_dataset(signatures: dict[str, list[str]], schema: AttributeSchema | None = None) -> Dataset:
    sequences = tuple(make_sequence(sid, types) for sid, types in signatures.items())
    return Dataset(schema=schema or AttributeSchema(), sequences=sequences)


def random_dataset(rng: random.Random, max_sequences: int = 8, max_events: int = 12) -> Dataset:
    n = rng.randint(1, max_sequences)
    sequences = {}
    for i in range(n):
        length = rng.randint(0, max_events)
        sequences[f"s{i}"] = [rng.choice(EVENT_SYMBOLS) for _ in range(length)]
    return make_dataset(sequences)


def random_attr_dataset(
    rng: random.Random, n_sequences: int = 6, max_events: int = 10, missing_rate: float = 0.1
) -> Dataset:
    """Random dataset with durations, a categorical event attr, and ages."""
    schema = AttributeSchema(
        (
            AttributeSpec("tag", "categorical", "event"),
            AttributeSpec("age", "numerical", "sequence"),
        )
    )
    sequences = []
    for i in range(n_sequences):
        sid = f"s{i}"
        t = rng.randrange(1_700_000_000, 1_710_000_000)
        events = []
        for k in range(rng.randint(1, max_events)):
            dur = rng.randint(1, 5000)
            tag = None if rng.random() < missing_rate else rng.choice("uvw")
            events.append(
                EventOccurrence(
                    id=f"{sid}#{k}",
                    sequence_id=sid,
                    event_type=rng.choice("xyz"),
                    start=t,
                    end=t + dur,
                    attrs={"tag": tag},
                )
            )
            t += dur + rng.randrange(0, 600)
        sequences.append(
            Sequence(id=sid, events=tuple(events), attrs={"age": float(rng.randint(1, 99))})
        )
    return Dataset(schema=schema, sequences=tuple(sequences))


def numeric_event_dataset(values_by_group: dict[str, list[float]]) -> Dataset:
    """One sequence; each (group, value) pair becomes one occurrence."""
    schema = AttributeSchema(
        (
            AttributeSpec("y", "numerical", "event"),
            AttributeSpec("g", "categorical", "event"),
        )
    )
    events = []
    i = 0
    for group, values in values_by_group.items():
        for v in values:
            events.append(
                EventOccurrence(
                    id=f"e{i}",
                    sequence_id="s",
                    event_type="x",
                    start=i,
                    end=i + 1,
                    attrs={"y": float(v), "g": group},
                )
            )
            i += 1
    return Dataset(schema=schema, sequences=(Sequence(id="s", events=tuple(events)),))

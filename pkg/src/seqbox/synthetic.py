"""Deterministic synthetic clinic-visit generator.

Produces datasets of visit sequences built from an
arrival -> scan -> wait -> consult -> complete motif, with optional planted
effects (for example "Monday durations x1.3") whose strength downstream
statistics should recover. Identical seeds produce identical datasets.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import ConfigError, EmptyDatasetError
from .model import (
    AttributeSchema,
    AttributeSpec,
    Dataset,
    EventOccurrence,
    KIND_CATEGORICAL,
    KIND_NUMERICAL,
    LEVEL_EVENT,
    LEVEL_SEQUENCE,
    Sequence,
    WEEKDAYS,
)

DEFAULT_ALPHABET = ("arrival", "scan", "wait", "consult", "complete")

# Mondays 2024-01-01 00:00 UTC onward; visits land on a 90-day window so all
# weekdays appear.
_EPOCH_START = 1704067200
_DAY = 86400

# Mean duration in seconds and lognormal sigma per motif event type.
_DURATION_PROFILE = {
    "arrival": (300.0, 0.4),
    "scan": (900.0, 0.5),
    "wait": (1800.0, 0.7),
    "consult": (1200.0, 0.5),
    "complete": (180.0, 0.3),
}
_FALLBACK_PROFILE = (600.0, 0.5)

_CLINICS = tuple(f"Clinic_{i}" for i in (21, 34, 47, 58, 63, 71, 82, 90))
_ROOMS = ("R1", "R2", "R3", "R4", "R5")
_URGENCIES = ("Red", "Amber", "Green")


@dataclass(frozen=True)
class PlantedEffect:
    """Multiply event durations when the visit falls on a given weekday.

    ``event_type`` limits the effect to one motif event; ``None`` applies it
    to every event of the visit.
    """

    day_of_week: str
    multiplier: float
    event_type: str | None = None

    def __post_init__(self):
        if self.day_of_week not in WEEKDAYS:
            raise ConfigError(f"unknown weekday {self.day_of_week!r}")
        if self.multiplier <= 0:
            raise ConfigError("multiplier must be positive")


@dataclass(frozen=True)
class SyntheticConfig:
    n_sequences: int
    seed: int
    event_alphabet: tuple[str, ...] = DEFAULT_ALPHABET
    planted_effects: tuple[PlantedEffect, ...] = ()
    extra_visit_rate: float = 0.6  # mean number of extra wait+consult loops


def generate_synthetic(config: SyntheticConfig) -> Dataset:
    """Build a synthetic dataset; the same config yields a byte-identical one."""
    if not config.event_alphabet:
        raise ConfigError("event alphabet must not be empty")
    if config.n_sequences <= 0:
        raise EmptyDatasetError("n_sequences must be at least 1")

    rng = random.Random(config.seed)
    alphabet = config.event_alphabet
    schema = AttributeSchema(
        (
            AttributeSpec("room", KIND_CATEGORICAL, LEVEL_EVENT),
            AttributeSpec("age", KIND_NUMERICAL, LEVEL_SEQUENCE),
            AttributeSpec("urgency", KIND_CATEGORICAL, LEVEL_SEQUENCE),
            AttributeSpec("clinic", KIND_CATEGORICAL, LEVEL_SEQUENCE),
        )
    )

    sequences = []
    for i in range(config.n_sequences):
        sid = f"s{i:05d}"
        day_offset = rng.randrange(90)
        # mornings twice as likely as afternoons
        if rng.random() < 2 / 3:
            start_minute = int(rng.gauss(9.5 * 60, 45))
        else:
            start_minute = int(rng.gauss(14 * 60, 45))
        start_minute = min(max(start_minute, 6 * 60), 20 * 60)
        t = _EPOCH_START + day_offset * _DAY + start_minute * 60

        motif = _visit_motif(rng, alphabet, config.extra_visit_rate)
        events = []
        for k, etype in enumerate(motif):
            # weekday of the event itself, so effects line up with the
            # derived day_of_week attribute even when a visit crosses midnight
            weekday = WEEKDAYS[((t - _EPOCH_START) // _DAY) % 7]
            mean, sigma = _DURATION_PROFILE.get(etype, _FALLBACK_PROFILE)
            duration = rng.lognormvariate(_mu(mean, sigma), sigma)
            for effect in config.planted_effects:
                if effect.day_of_week == weekday and (
                    effect.event_type is None or effect.event_type == etype
                ):
                    duration *= effect.multiplier
            duration = max(1, round(duration))
            events.append(
                EventOccurrence(
                    id=f"{sid}#{k}",
                    sequence_id=sid,
                    event_type=etype,
                    start=t,
                    end=t + duration,
                    attrs={"room": rng.choice(_ROOMS)},
                )
            )
            # small idle gap between consecutive events
            t = t + duration + rng.randrange(0, 120)
        attrs = {
            "age": float(rng.randrange(18, 91)),
            "urgency": rng.choices(_URGENCIES, weights=(1, 3, 6))[0],
            "clinic": rng.choice(_CLINICS),
        }
        sequences.append(Sequence(id=sid, events=tuple(events), attrs=attrs))

    return Dataset(schema=schema, sequences=tuple(sequences), timezone="UTC")


def _mu(mean: float, sigma: float) -> float:
    # lognormal mean = exp(mu + sigma^2 / 2)
    return math.log(mean) - sigma * sigma / 2


def _visit_motif(rng: random.Random, alphabet: tuple[str, ...], extra_rate: float) -> list[str]:
    """One visit's event-type path over the configured alphabet.

    With the default five-symbol alphabet this is
    arrival, [scan], wait, consult, (wait, consult)*, complete.
    Shorter alphabets cycle through whatever symbols exist.
    """
    if set(DEFAULT_ALPHABET).issubset(alphabet):
        path = ["arrival"]
        if rng.random() < 0.7:
            path.append("scan")
            if rng.random() < 0.2:
                path.append("scan")
        path += ["wait", "consult"]
        while rng.random() < extra_rate / (1 + extra_rate):
            path += ["wait", "consult"]
        path.append("complete")
        return path
    length = rng.randrange(2, 7)
    return [alphabet[rng.randrange(len(alphabet))] for _ in range(length)]

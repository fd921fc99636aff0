import pytest

from seqbox.errors import ConfigError, EmptyDatasetError
from seqbox.model import canonical_json, dataset_to_obj, resolve_on
from seqbox.synthetic import PlantedEffect, SyntheticConfig, generate_synthetic


def test_same_seed_byte_identical():
    cfg = SyntheticConfig(n_sequences=50, seed=1)
    a = generate_synthetic(cfg)
    b = generate_synthetic(cfg)
    assert canonical_json(dataset_to_obj(a)) == canonical_json(dataset_to_obj(b))


def test_different_seeds_differ():
    a = generate_synthetic(SyntheticConfig(n_sequences=50, seed=1))
    b = generate_synthetic(SyntheticConfig(n_sequences=50, seed=2))
    assert canonical_json(dataset_to_obj(a)) != canonical_json(dataset_to_obj(b))


def test_zero_sequences_raises():
    with pytest.raises(EmptyDatasetError):
        generate_synthetic(SyntheticConfig(n_sequences=0, seed=1))


def test_empty_alphabet_raises():
    with pytest.raises(ConfigError):
        generate_synthetic(SyntheticConfig(n_sequences=5, seed=1, event_alphabet=()))


def test_bad_effect_rejected():
    with pytest.raises(ConfigError):
        PlantedEffect(day_of_week="Funday", multiplier=1.3)
    with pytest.raises(ConfigError):
        PlantedEffect(day_of_week="Mon", multiplier=0)


def test_planted_monday_effect_shows_in_sample_means():
    cfg = SyntheticConfig(
        n_sequences=1200,  # ~6000+ events, comfortably past n=5000
        seed=7,
        planted_effects=(PlantedEffect(day_of_week="Mon", multiplier=1.3),),
    )
    ds = generate_synthetic(cfg)
    assert ds.n_events >= 5000
    mon, other = [], []
    for ev, seq in ds.iter_occurrences():
        d = float(ev.end - ev.start)
        if resolve_on(ds, ev, seq, "day_of_week") == "Mon":
            mon.append(d)
        else:
            other.append(d)
    ratio = (sum(mon) / len(mon)) / (sum(other) / len(other))
    assert 1.2 <= ratio <= 1.4


def test_all_weekdays_present():
    ds = generate_synthetic(SyntheticConfig(n_sequences=300, seed=3))
    days = {resolve_on(ds, ev, seq, "day_of_week") for ev, seq in ds.iter_occurrences()}
    assert len(days) == 7

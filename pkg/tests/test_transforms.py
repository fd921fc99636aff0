import random

import pytest
from hypothesis import given, settings, strategies as st

from seqbox.errors import ConfigError
from seqbox.model import (
    AttributeSchema,
    AttributeSpec,
    Dataset,
    EventOccurrence,
    Sequence,
)
from seqbox.transforms import (
    GAP,
    AnchorSpec,
    MergePolicy,
    align,
    sort_by_event,
    substitute_aggregate,
)

from util import EVENT_SYMBOLS, make_dataset, random_dataset


def types_of(dataset, row):
    return [dataset.occurrence(c).event_type if c is not GAP else "GAP" for c in row.cells]


# ---------------------------------------------------------------------------
# substitute_aggregate

def test_consecutive_sources_collapse():
    ds = make_dataset({"s": ["x", "y", "z"]})
    out = substitute_aggregate(ds, {"x", "y"}, "a")
    seq = out.sequences[0]
    assert [e.event_type for e in seq.events] == ["a", "z"]
    merged = seq.events[0]
    original = ds.sequences[0]
    assert merged.start == original.events[0].start
    assert merged.end == original.events[1].end


def test_non_consecutive_runs_stay_separate():
    ds = make_dataset({"s": ["x", "z", "y"]})
    out = substitute_aggregate(ds, {"x", "y"}, "a")
    assert [e.event_type for e in out.sequences[0].events] == ["a", "z", "a"]


def test_self_substitution_collapses_runs():
    ds = make_dataset({"s": ["x", "x", "x"]})
    out = substitute_aggregate(ds, {"x"}, "x")
    seq = out.sequences[0]
    assert len(seq.events) == 1
    assert seq.events[0].start == ds.sequences[0].events[0].start
    assert seq.events[0].end == ds.sequences[0].events[-1].end


def test_empty_sources_raise():
    ds = make_dataset({"s": ["x"]})
    with pytest.raises(ConfigError):
        substitute_aggregate(ds, set(), "a")


def test_existing_new_type_raises():
    ds = make_dataset({"s": ["x", "z"]})
    with pytest.raises(ConfigError):
        substitute_aggregate(ds, {"x"}, "z")


def test_original_dataset_unchanged_and_provenance_recorded():
    ds = make_dataset({"s": ["x", "y"]})
    out = substitute_aggregate(ds, {"x", "y"}, "a")
    assert [e.event_type for e in ds.sequences[0].events] == ["x", "y"]
    assert out.version == ds.version + 1
    assert out.provenance[-1]["op"] == "substitute_aggregate"


def test_merge_policy_rules():
    schema = AttributeSchema(
        (
            AttributeSpec("cost", "numerical", "event"),
            AttributeSpec("tag", "categorical", "event"),
        )
    )
    events = tuple(
        EventOccurrence(
            id=f"e{k}", sequence_id="s", event_type="x", start=k * 10, end=k * 10 + 5,
            attrs={"cost": float(k + 1), "tag": t},
        )
        for k, t in enumerate(["u", "v", "v"])
    )
    ds = Dataset(schema=schema, sequences=(Sequence(id="s", events=events),))
    out = substitute_aggregate(
        ds, {"x"}, "x", MergePolicy({"cost": "sum", "tag": "join"})
    )
    merged = out.sequences[0].events[0]
    assert merged.attrs["cost"] == 6.0
    assert merged.attrs["tag"] == "u+v"
    out2 = substitute_aggregate(ds, {"x"}, "x", MergePolicy({"cost": "span", "tag": "mode"}))
    merged2 = out2.sequences[0].events[0]
    assert merged2.attrs["cost"] == 2.0
    assert merged2.attrs["tag"] == "v"


def test_bad_merge_rule_raises():
    schema = AttributeSchema((AttributeSpec("cost", "numerical", "event"),))
    ds = Dataset(
        schema=schema,
        sequences=(
            Sequence(
                id="s",
                events=(
                    EventOccurrence(id="e", sequence_id="s", event_type="x", start=0, end=1, attrs={"cost": 1.0}),
                ),
            ),
        ),
    )
    with pytest.raises(ConfigError):
        substitute_aggregate(ds, {"x"}, "y", MergePolicy({"cost": "join"}))


@given(st.integers(0, 10_000))
def test_substitution_conserves_counts_and_spans(seed):
    rng = random.Random(seed)
    ds = random_dataset(rng)
    sources = set(rng.sample(EVENT_SYMBOLS, rng.randint(1, 3)))
    expected_drop = 0
    spans = []
    for seq in ds.sequences:
        run = []
        for ev in list(seq.events) + [None]:
            if ev is not None and ev.event_type in sources:
                run.append(ev)
                continue
            if run:
                expected_drop += len(run) - 1
                spans.append((run[0].start, run[-1].end))
                run = []
    out = substitute_aggregate(ds, sources, "zz")
    assert out.n_events == ds.n_events - expected_drop
    got_spans = [
        (e.start, e.end)
        for seq in out.sequences
        for e in seq.events
        if e.event_type == "zz"
    ]
    assert sorted(got_spans) == sorted(spans)


# ---------------------------------------------------------------------------
# align

def test_hard_alignment_golden():
    ds = make_dataset({"S1": ["a", "c", "e"], "S2": ["c", "b", "e"]})
    view = align(ds, AnchorSpec((("c", "hard"), ("e", "hard"))))
    assert types_of(ds, view.rows[0]) == ["a", "c", "GAP", "e"]
    assert types_of(ds, view.rows[1]) == ["GAP", "c", "b", "e"]
    assert view.anchor_columns == {"c": 1, "e": 3}


def test_soft_alignment_golden():
    ds = make_dataset({"S1": ["c", "f", "e"], "S2": ["c", "g", "f", "e"]})
    view = align(ds, AnchorSpec((("c", "hard"), ("f", "soft"), ("e", "hard"))))
    assert types_of(ds, view.rows[0]) == ["c", "GAP", "f", "e"]
    assert types_of(ds, view.rows[1]) == ["c", "g", "f", "e"]


def test_single_sequence_no_gaps():
    ds = make_dataset({"S1": ["a", "b", "c"]})
    view = align(ds, AnchorSpec((("b", "hard"),)))
    assert types_of(ds, view.rows[0]) == ["a", "b", "c"]


def test_no_anchor_matches_left_justified():
    ds = make_dataset({"S1": ["a", "b"], "S2": ["a"]})
    view = align(ds, AnchorSpec((("z", "hard"),)))
    assert types_of(ds, view.rows[0]) == ["a", "b", "GAP"]
    assert types_of(ds, view.rows[1]) == ["a", "GAP", "GAP"]


def test_missing_hard_anchor_keeps_events_left_of_gap_column():
    ds = make_dataset({"S1": ["a", "c", "e"], "S2": ["a", "b", "e"]})
    view = align(ds, AnchorSpec((("c", "hard"), ("e", "hard"))))
    # S2 lacks c: its a,b stay in the segment before the c column
    assert types_of(ds, view.rows[0]) == ["a", "GAP", "c", "e"]
    assert types_of(ds, view.rows[1]) == ["a", "b", "GAP", "e"]
    assert view.anchor_columns == {"c": 2, "e": 3}


def test_anchor_spec_validation():
    with pytest.raises(ConfigError):
        AnchorSpec(())
    with pytest.raises(ConfigError):
        AnchorSpec((("a", "hard"), ("a", "soft")))
    with pytest.raises(ConfigError):
        AnchorSpec((("a", "rigid"),))


def random_anchor_spec(rng: random.Random) -> AnchorSpec:
    n = rng.randint(1, 4)
    types = rng.sample(EVENT_SYMBOLS, n)
    return AnchorSpec(tuple((t, rng.choice(["hard", "soft"])) for t in types))


@given(st.integers(0, 10_000))
@settings(max_examples=200)
def test_gap_stripping_round_trip(seed):
    rng = random.Random(seed)
    ds = random_dataset(rng)
    spec = random_anchor_spec(rng)
    view = align(ds, spec)
    for seq, row in zip(ds.sequences, view.rows):
        assert row.sequence_id == seq.id
        assert len(row.cells) == view.column_count
        stripped = [c for c in row.cells if c is not GAP]
        assert stripped == [e.id for e in seq.events]


@given(st.integers(0, 10_000))
@settings(max_examples=200)
def test_hard_anchor_columns_hold_their_type(seed):
    rng = random.Random(seed)
    ds = random_dataset(rng)
    spec = random_anchor_spec(rng)
    view = align(ds, spec)
    for etype in spec.hard_types:
        col = view.anchor_columns[etype]
        for row in view.rows:
            cell = row.cells[col]
            if cell is not GAP:
                assert ds.occurrence(cell).event_type == etype


# ---------------------------------------------------------------------------
# sort_by_event

def aligned(ds):
    return align(ds, AnchorSpec((("a", "hard"),)))


def test_sort_lexicographic():
    ds = make_dataset({"A": ["f", "g"], "B": ["f", "e"]})
    view = align(ds, AnchorSpec((("f", "hard"),)))
    out = sort_by_event(view, ds, "f")
    assert [r.sequence_id for r in out.rows] == ["B", "A"]  # [f,e] < [f,g]


def test_rows_without_sort_event_go_last():
    ds = make_dataset({"A": ["x", "y"], "B": ["f", "e"], "C": ["x"]})
    view = align(ds, AnchorSpec((("f", "hard"),)))
    out = sort_by_event(view, ds, "f")
    assert [r.sequence_id for r in out.rows] == ["B", "A", "C"]


def test_sort_stable_on_identical_keys():
    ds = make_dataset({"A": ["f", "e"], "B": ["f", "e"], "C": ["f", "e"]})
    view = aligned(ds)
    out = sort_by_event(view, ds, "f")
    assert [r.sequence_id for r in out.rows] == ["A", "B", "C"]


def test_unknown_sort_type_keeps_order():
    ds = make_dataset({"B": ["b"], "A": ["a"]})
    view = aligned(ds)
    out = sort_by_event(view, ds, "nope")
    assert [r.sequence_id for r in out.rows] == [r.sequence_id for r in view.rows]


def test_sort_key_uses_suffix_from_event_position():
    # key starts AT the sort event, not at the row start
    ds = make_dataset({"A": ["z", "f", "b"], "B": ["a", "f", "a"]})
    view = align(ds, AnchorSpec((("f", "hard"),)))
    out = sort_by_event(view, ds, "f")
    assert [r.sequence_id for r in out.rows] == ["B", "A"]  # [f,a] < [f,b]


@given(st.integers(0, 10_000))
def test_sort_is_permutation(seed):
    rng = random.Random(seed)
    ds = random_dataset(rng)
    spec = random_anchor_spec(rng)
    view = align(ds, spec)
    out = sort_by_event(view, ds, rng.choice(EVENT_SYMBOLS))
    assert sorted(r.sequence_id for r in out.rows) == sorted(
        r.sequence_id for r in view.rows
    )
    assert {r.sequence_id: r.cells for r in out.rows} == {
        r.sequence_id: r.cells for r in view.rows
    }

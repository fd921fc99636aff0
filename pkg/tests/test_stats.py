import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from seqbox.errors import InsufficientDataError
from seqbox.grouping import cluster
from seqbox.model import selection_from_occurrences
from seqbox.stats import (
    ReportConfig,
    anova,
    contingency,
    generate_report,
    mean_comparison,
)
from seqbox.synthetic import PlantedEffect, SyntheticConfig, generate_synthetic

from util import make_dataset, numeric_event_dataset


# ---------------------------------------------------------------------------
# mean comparison

def test_welch_hand_example():
    ds = numeric_event_dataset({"A": [1, 2, 3], "B": [4, 5, 6]})
    table = mean_comparison(ds, None, "y", "g")
    test = table.tests[0]
    assert abs(test.t) == pytest.approx(3.674, abs=1e-3)
    assert test.df == pytest.approx(4.0)
    assert test.p == pytest.approx(0.0213, abs=1e-3)


def test_identical_groups_t_zero():
    ds = numeric_event_dataset({"A": [1, 2, 3], "B": [1, 2, 3]})
    test = mean_comparison(ds, None, "y", "g").tests[0]
    assert test.t == 0.0
    assert test.p == 1.0


def test_three_groups_three_pairs():
    ds = numeric_event_dataset({"A": [1, 2], "B": [3, 4], "C": [5, 6]})
    table = mean_comparison(ds, None, "y", "g")
    assert len(table.tests) == 3


def test_small_groups_listed_but_untested():
    ds = numeric_event_dataset({"A": [1, 2, 3], "B": [4, 5], "C": [9]})
    table = mean_comparison(ds, None, "y", "g")
    assert {g.label for g in table.groups} == {"A", "B", "C"}
    tested = {(t.group_a, t.group_b) for t in table.tests}
    assert tested == {("A", "B")}


def test_fewer_than_two_testable_groups_raises():
    ds = numeric_event_dataset({"A": [1, 2, 3], "B": [9]})
    with pytest.raises(InsufficientDataError):
        mean_comparison(ds, None, "y", "g")


# ---------------------------------------------------------------------------
# contingency

def cat_dataset(pairs):
    """Occurrences with two categorical attrs from a list of (a, b) pairs."""
    from seqbox.model import AttributeSchema, AttributeSpec, Dataset, EventOccurrence, Sequence

    schema = AttributeSchema(
        (
            AttributeSpec("u", "categorical", "event"),
            AttributeSpec("v", "categorical", "event"),
        )
    )
    events = tuple(
        EventOccurrence(
            id=f"e{i}", sequence_id="s", event_type="x", start=i, end=i + 1,
            attrs={"u": a, "v": b},
        )
        for i, (a, b) in enumerate(pairs)
    )
    return Dataset(schema=schema, sequences=(Sequence(id="s", events=events),))


def counts_to_pairs(matrix, rows="RS", cols="CD"):
    pairs = []
    for i, row in enumerate(matrix):
        for j, count in enumerate(row):
            pairs.extend([(rows[i], cols[j])] * count)
    return pairs


def test_independent_table_chi_zero():
    ds = cat_dataset(counts_to_pairs([[10, 10], [10, 10]]))
    result = contingency(ds, None, "u", "v")
    assert result.chi_square == pytest.approx(0.0, abs=1e-12)
    assert result.p == pytest.approx(1.0)


def test_2x2_closed_form():
    ds = cat_dataset(counts_to_pairs([[20, 10], [10, 20]]))
    result = contingency(ds, None, "u", "v")
    # N(ad - bc)^2 / (r1 r2 c1 c2)
    expected = 60 * (20 * 20 - 10 * 10) ** 2 / (30 * 30 * 30 * 30)
    assert result.chi_square == pytest.approx(expected, abs=1e-9)
    assert result.df == 1
    assert result.p == pytest.approx(0.0098, abs=1e-3)


def test_transpose_invariance():
    ds = cat_dataset(counts_to_pairs([[5, 9, 2], [7, 1, 6]], cols="CDE"))
    r1 = contingency(ds, None, "u", "v")
    r2 = contingency(ds, None, "v", "u")
    assert r1.chi_square == pytest.approx(r2.chi_square, rel=1e-12)
    assert r1.df == r2.df


def test_expected_totals_match_observed():
    ds = cat_dataset(counts_to_pairs([[5, 9, 2], [7, 1, 6]], cols="CDE"))
    r = contingency(ds, None, "u", "v")
    assert sum(map(sum, r.expected)) == pytest.approx(sum(map(sum, r.observed)))


def test_low_expected_flag():
    ds = cat_dataset(counts_to_pairs([[2, 1], [1, 2]]))
    assert contingency(ds, None, "u", "v").low_expected


def test_single_level_raises():
    ds = cat_dataset([("R", "C"), ("R", "D")])
    with pytest.raises(InsufficientDataError):
        contingency(ds, None, "u", "v")


def test_zero_marginal_level_dropped_with_note():
    # level T of u exists in the dataset but not in the selection
    ds = cat_dataset(counts_to_pairs([[5, 5], [4, 4]]) + [("T", "C")])
    keep = [ev.id for ev, _ in ds.iter_occurrences() if ev.attrs["u"] != "T"]
    sel = selection_from_occurrences(ds, keep)
    result = contingency(ds, sel, "u", "v")
    assert "u=T" in result.dropped_levels
    assert result.row_levels == ("R", "S")


@given(st.integers(0, 5_000))
def test_permutation_invariance(seed):
    rng = random.Random(seed)
    pairs = [(rng.choice("RST"), rng.choice("CDE")) for _ in range(60)]
    base = contingency(cat_dataset(pairs), None, "u", "v")
    shuffled = pairs[:]
    rng.shuffle(shuffled)
    again = contingency(cat_dataset(shuffled), None, "u", "v")
    assert base.chi_square == pytest.approx(again.chi_square, rel=1e-12)


# ---------------------------------------------------------------------------
# anova

def test_one_factor_hand_example():
    ds = numeric_event_dataset({"A": [1, 2, 3], "B": [4, 5, 6]})
    report = anova(ds, None, "y", ["g"])
    row = report.terms[0]
    assert row.ss == pytest.approx(13.5, rel=1e-12)
    assert report.residual_ss == pytest.approx(4.0, rel=1e-12)
    assert row.f == pytest.approx(13.5, rel=1e-9)
    assert row.p == pytest.approx(0.0213, abs=1e-3)


def test_constant_response_degenerate():
    ds = numeric_event_dataset({"A": [5, 5, 5], "B": [5, 5, 5]})
    report = anova(ds, None, "y", ["g"])
    assert report.terms[0].ss == pytest.approx(0.0, abs=1e-9)
    assert report.terms[0].f == 0.0
    assert any("zero variance" in note for note in report.notes)


def test_interaction_order_and_layout():
    rng = random.Random(3)
    from seqbox.model import AttributeSchema, AttributeSpec, Dataset, EventOccurrence, Sequence

    schema = AttributeSchema(
        (
            AttributeSpec("y", "numerical", "event"),
            AttributeSpec("f1", "categorical", "event"),
            AttributeSpec("f2", "categorical", "event"),
        )
    )
    events = tuple(
        EventOccurrence(
            id=f"e{i}", sequence_id="s", event_type="x", start=i, end=i + 1,
            attrs={"y": rng.gauss(0, 1), "f1": rng.choice("ab"), "f2": rng.choice("cd")},
        )
        for i in range(40)
    )
    ds = Dataset(schema=schema, sequences=(Sequence(id="s", events=events),))
    report = anova(ds, None, "y", ["f1", "f2"], max_order=2)
    assert [t.name for t in report.terms] == ["f1", "f2", "f1 × f2"]
    assert report.terms[-1].name == "f1 × f2"  # highest order is the last row
    total = sum(t.ss for t in report.terms) + report.residual_ss
    assert total == pytest.approx(report.total_ss, rel=1e-8)
    assert sum(t.df for t in report.terms) + report.residual_df == report.n - 1


def test_empty_cells_drop_columns_with_note():
    # f1=b never co-occurs with f2=d, so the interaction column is collinear
    pairs = [("a", "c"), ("a", "d"), ("b", "c")] * 10
    rng = random.Random(4)
    from seqbox.model import AttributeSchema, AttributeSpec, Dataset, EventOccurrence, Sequence

    schema = AttributeSchema(
        (
            AttributeSpec("y", "numerical", "event"),
            AttributeSpec("f1", "categorical", "event"),
            AttributeSpec("f2", "categorical", "event"),
        )
    )
    events = tuple(
        EventOccurrence(
            id=f"e{i}", sequence_id="s", event_type="x", start=i, end=i + 1,
            attrs={"y": rng.gauss(0, 1), "f1": a, "f2": b},
        )
        for i, (a, b) in enumerate(pairs)
    )
    ds = Dataset(schema=schema, sequences=(Sequence(id="s", events=events),))
    report = anova(ds, None, "y", ["f1", "f2"], max_order=2)
    assert any("collinear" in n for n in report.notes)
    assert sum(t.df for t in report.terms) + report.residual_df == report.n - 1


def test_insufficient_observations_raises():
    ds = numeric_event_dataset({"A": [1.0], "B": [2.0]})
    with pytest.raises(InsufficientDataError):
        anova(ds, None, "y", ["g"])


def pooled_t(xs, ys):
    n1, n2 = len(xs), len(ys)
    m1 = sum(xs) / n1
    m2 = sum(ys) / n2
    v1 = sum((x - m1) ** 2 for x in xs) / (n1 - 1)
    v2 = sum((x - m2) ** 2 for x in ys) / (n2 - 1)
    sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
    return (m1 - m2) / math.sqrt(sp2 * (1 / n1 + 1 / n2))


@given(st.integers(0, 10_000))
@settings(max_examples=200)
def test_f_equals_t_squared(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 25)
    xs = [rng.gauss(0, 3) for _ in range(n)]
    ys = [rng.gauss(1, 3) for _ in range(n)]
    ds = numeric_event_dataset({"A": xs, "B": ys})
    f_stat = anova(ds, None, "y", ["g"]).terms[0].f
    t = pooled_t(xs, ys)
    assert f_stat == pytest.approx(t * t, rel=1e-9)


@given(st.integers(0, 10_000))
@settings(max_examples=50)
def test_sequential_ss_partition_random(seed):
    rng = random.Random(seed)
    from seqbox.model import AttributeSchema, AttributeSpec, Dataset, EventOccurrence, Sequence

    schema = AttributeSchema(
        (
            AttributeSpec("y", "numerical", "event"),
            AttributeSpec("f1", "categorical", "event"),
            AttributeSpec("f2", "categorical", "event"),
            AttributeSpec("f3", "categorical", "event"),
        )
    )
    n = rng.randint(40, 90)
    events = tuple(
        EventOccurrence(
            id=f"e{i}", sequence_id="s", event_type="x", start=i, end=i + 1,
            attrs={
                "y": rng.gauss(0, 1) + (1.0 if rng.random() < 0.3 else 0.0),
                "f1": rng.choice("ab"),
                "f2": rng.choice("cde"),
                "f3": rng.choice("fg"),
            },
        )
        for i in range(n)
    )
    ds = Dataset(schema=schema, sequences=(Sequence(id="s", events=events),))
    max_order = rng.randint(1, 3)
    report = anova(ds, None, "y", ["f1", "f2", "f3"], max_order=max_order)
    total = sum(t.ss for t in report.terms) + report.residual_ss
    assert total == pytest.approx(report.total_ss, rel=1e-8)


# ---------------------------------------------------------------------------
# report

def test_report_planted_effect_flagged():
    ds = generate_synthetic(
        SyntheticConfig(
            n_sequences=1000,
            seed=42,
            planted_effects=(PlantedEffect(day_of_week="Mon", multiplier=1.3),),
        )
    )
    report = generate_report(
        ds,
        None,
        ReportConfig(continuous=("duration",), categorical=("day_of_week",), response="duration"),
    )
    ar = report.anova_reports[0]
    assert ar.term("day_of_week").p < 0.01
    assert any(f["kind"] == "anova" for f in report.flags)


def test_report_includes_all_sections():
    ds = generate_synthetic(SyntheticConfig(n_sequences=150, seed=9))
    report = generate_report(
        ds,
        None,
        ReportConfig(
            continuous=("duration", "age"),
            categorical=("day_of_week", "urgency"),
            response="duration",
            max_order=2,
        ),
    )
    assert len(report.mean_tables) == 4  # 2 continuous x 2 categorical
    assert len(report.contingency_tables) == 1
    assert len(report.anova_reports) == 1
    assert all(f["p"] < report.config.alpha for f in report.flags)
    md = report.to_markdown()
    assert "ANOVA" in md and "sequential" in md
    assert str(report.n_tests) in md


def test_report_with_cluster_factor():
    ds = generate_synthetic(SyntheticConfig(n_sequences=200, seed=11))
    clusters = cluster(ds, 3)
    report = generate_report(
        ds,
        None,
        ReportConfig(continuous=("duration",), categorical=("Cluster ID",), response="duration"),
        clusters=clusters,
    )
    assert report.anova_reports[0].factors == ("Cluster ID",)


def test_report_empty_selection_raises():
    ds = generate_synthetic(SyntheticConfig(n_sequences=10, seed=1))
    empty = selection_from_occurrences(ds, [])
    with pytest.raises(InsufficientDataError):
        generate_report(ds, empty, ReportConfig())


def test_report_component_failure_becomes_note():
    ds = make_dataset({"s1": ["a"], "s2": ["a"]})  # no attributes at all
    report = generate_report(
        ds, None, ReportConfig(continuous=("duration",), categorical=("day_of_week",))
    )
    # everything may fail (single weekday), but the report itself must build
    assert report.notes or report.mean_tables

"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion. Timed criteria use wall-clock budgets sized for a commodity
laptop.
"""

import json
import math
import random
import time

import mpmath as mp

from seqbox.cli import main as cli_main
from seqbox.engine import Session, apply_action, canonical_state
from seqbox.eventbox import EventBoxConfig, breakdown, build_eventbox, merge, quartiles, tukey_partition
from seqbox.grouping import cluster
from seqbox.model import selection_all, selection_from_occurrences
from seqbox.query import evaluate_query, format_query, parse_query
from seqbox.special import special_cdf
from seqbox.stats import anova
from seqbox.synthetic import PlantedEffect, SyntheticConfig, generate_synthetic
from seqbox.transforms import GAP, AnchorSpec, align, substitute_aggregate

from util import EVENT_SYMBOLS, make_dataset, random_attr_dataset, random_dataset
from test_query import SCHEMA as QUERY_SCHEMA, asts, brute_force, make_dataset as query_dataset


def report(name: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# 1. Quartile / outlier oracle


def reference_five_numbers(values):
    """Brute-force reference of the stated interpolation, written separately."""
    ordered = sorted(values)
    n = len(ordered)

    def quantile(q):
        position = q * (n - 1)
        below = math.floor(position)
        fraction = position - below
        if fraction == 0:
            return float(ordered[below])
        return ordered[below] + fraction * (ordered[below + 1] - ordered[below])

    return (
        float(ordered[0]),
        quantile(0.25),
        quantile(0.5),
        quantile(0.75),
        float(ordered[-1]),
    )


def test_quartile_outlier_oracle():
    rng = random.Random(20240101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = rng.randint(1, 500)
        values = [rng.uniform(0, 1000) for _ in range(n)]
        s = quartiles(values)
        ref = reference_five_numbers(values)
        for got, want in zip((s.min, s.q1, s.q2, s.q3, s.max), ref):
            worst = max(worst, abs(got - want))
        # Tukey partition against the fence definition, w = 1.5
        pairs = list(enumerate(values))
        _, outliers, (lo, hi) = tukey_partition(pairs, 1.5)
        iqr = ref[3] - ref[1]
        ref_lo, ref_hi = ref[1] - 1.5 * iqr, ref[3] + 1.5 * iqr
        assert abs(lo - ref_lo) <= 1e-12 and abs(hi - ref_hi) <= 1e-12
        ref_outliers = {i for i, v in pairs if v < ref_lo or v > ref_hi}
        assert outliers == ref_outliers
    elapsed = time.perf_counter() - t0
    report(
        "quartile/outlier oracle (1000 arrays)",
        worst <= 1e-12 and elapsed < 5.0,
        f"worst={worst:.2e}, {elapsed:.2f}s",
    )


# ---------------------------------------------------------------------------
# 2. Alignment invariants


def test_alignment_invariants():
    rng = random.Random(7)
    t0 = time.perf_counter()
    for _ in range(500):
        ds = random_dataset(rng)
        anchor_types = rng.sample(EVENT_SYMBOLS, rng.randint(1, 4))
        spec = AnchorSpec(
            tuple((t, rng.choice(["hard", "soft"])) for t in anchor_types)
        )
        view = align(ds, spec)
        for seq, row in zip(ds.sequences, view.rows):
            assert len(row.cells) == view.column_count
            assert [c for c in row.cells if c is not GAP] == [e.id for e in seq.events]
        for etype in spec.hard_types:
            col = view.anchor_columns[etype]
            for row in view.rows:
                cell = row.cells[col]
                assert cell is GAP or ds.occurrence(cell).event_type == etype
    elapsed = time.perf_counter() - t0

    golden = make_dataset({"S1": ["a", "c", "e"], "S2": ["c", "b", "e"]})
    view = align(golden, AnchorSpec((("c", "hard"), ("e", "hard"))))
    layout = [
        [golden.occurrence(c).event_type if c is not GAP else None for c in row.cells]
        for row in view.rows
    ]
    golden_ok = layout == [["a", "c", None, "e"], [None, "c", "b", "e"]]
    report(
        "alignment invariants (500 datasets + golden)",
        golden_ok and elapsed < 10.0,
        f"{elapsed:.2f}s",
    )


# ---------------------------------------------------------------------------
# 3. Substitution / aggregation conservation


def test_substitution_conservation():
    rng = random.Random(11)
    for _ in range(300):
        ds = random_dataset(rng)
        sources = set(rng.sample(EVENT_SYMBOLS, rng.randint(1, 3)))
        expected_drop = 0
        expected_spans = []
        for seq in ds.sequences:
            run = []
            for ev in list(seq.events) + [None]:
                if ev is not None and ev.event_type in sources:
                    run.append(ev)
                    continue
                if run:
                    expected_drop += len(run) - 1
                    expected_spans.append((run[0].start, run[-1].end))
                    run = []
        out = substitute_aggregate(ds, sources, "zz")
        assert out.n_events == ds.n_events - expected_drop
        got = sorted(
            (e.start, e.end)
            for seq in out.sequences
            for e in seq.events
            if e.event_type == "zz"
        )
        assert got == sorted(expected_spans)
    report("substitution/aggregation conservation (300 datasets)", True)


# ---------------------------------------------------------------------------
# 4. Breakdown / merge duality


def test_breakdown_merge_duality():
    rng = random.Random(13)
    checked = 0
    while checked < 200:
        ds = random_attr_dataset(rng)
        etype = rng.choice("xyz")
        b_attr = rng.choice(["tag", "day_of_week"])
        try:
            parent = build_eventbox(
                ds, selection_all(ds), etype, EventBoxConfig(b=b_attr)
            )
        except Exception:
            continue
        merged = merge(breakdown(parent))
        assert merged.n == parent.n
        assert merged.summary == parent.summary
        assert merged.outlier_ids == parent.outlier_ids
        checked += 1
    report("breakdown/merge duality (200 EventBoxes)", True)


# ---------------------------------------------------------------------------
# 5. Statistics identities


def pooled_t(xs, ys):
    n1, n2 = len(xs), len(ys)
    m1, m2 = sum(xs) / n1, sum(ys) / n2
    v1 = sum((x - m1) ** 2 for x in xs) / (n1 - 1)
    v2 = sum((x - m2) ** 2 for x in ys) / (n2 - 1)
    sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
    return (m1 - m2) / math.sqrt(sp2 * (1 / n1 + 1 / n2))


def test_f_equals_t_squared_identity():
    from util import numeric_event_dataset

    rng = random.Random(17)
    worst = 0.0
    for _ in range(500):
        n = rng.randint(3, 30)
        xs = [rng.gauss(0, 2) for _ in range(n)]
        ys = [rng.gauss(rng.uniform(-1, 1), 2) for _ in range(n)]
        ds = numeric_event_dataset({"A": xs, "B": ys})
        f_stat = anova(ds, None, "y", ["g"]).terms[0].f
        t2 = pooled_t(xs, ys) ** 2
        worst = max(worst, abs(f_stat - t2) / max(abs(t2), 1e-300))
    report("F = t^2 identity (500 trials)", worst < 1e-9, f"worst rel err {worst:.2e}")


def test_sequential_ss_partition():
    from seqbox.model import AttributeSchema, AttributeSpec, Dataset, EventOccurrence, Sequence

    rng = random.Random(19)
    worst = 0.0
    for _ in range(100):
        schema = AttributeSchema(
            (
                AttributeSpec("y", "numerical", "event"),
                AttributeSpec("f1", "categorical", "event"),
                AttributeSpec("f2", "categorical", "event"),
                AttributeSpec("f3", "categorical", "event"),
            )
        )
        n = rng.randint(50, 120)
        events = tuple(
            EventOccurrence(
                id=f"e{i}", sequence_id="s", event_type="x", start=i, end=i + 1,
                attrs={
                    "y": rng.gauss(0, 1),
                    "f1": rng.choice("ab"),
                    "f2": rng.choice("cde"),
                    "f3": rng.choice("fg"),
                },
            )
            for i in range(n)
        )
        ds = Dataset(schema=schema, sequences=(Sequence(id="s", events=events),))
        result = anova(ds, None, "y", ["f1", "f2", "f3"], max_order=rng.randint(1, 3))
        total = sum(t.ss for t in result.terms) + result.residual_ss
        worst = max(worst, abs(total - result.total_ss) / max(result.total_ss, 1e-300))
    report("sequential SS partition (100 designs)", worst < 1e-8, f"worst rel err {worst:.2e}")


def test_chi_square_2x2_closed_form():
    from test_stats import cat_dataset, counts_to_pairs
    from seqbox.stats import contingency

    rng = random.Random(23)
    worst = 0.0
    for _ in range(100):
        a, b, c, d = (rng.randint(1, 40) for _ in range(4))
        ds = cat_dataset(counts_to_pairs([[a, b], [c, d]]))
        got = contingency(ds, None, "u", "v").chi_square
        n = a + b + c + d
        closed = n * (a * d - b * c) ** 2 / ((a + b) * (c + d) * (a + c) * (b + d))
        worst = max(worst, abs(got - closed))
    report("chi-square 2x2 closed form (100 tables)", worst <= 1e-9, f"worst abs err {worst:.2e}")


def _mp_t_two_sided(t, df):
    c = mp.gamma((df + 1) / mp.mpf(2)) / (mp.sqrt(df * mp.pi) * mp.gamma(df / mp.mpf(2)))
    return float(2 * mp.quad(lambda x: c * (1 + x * x / df) ** (-(df + 1) / 2), [abs(t), mp.inf]))


def _mp_chisq_tail(x, df):
    c = 1 / (mp.mpf(2) ** (df / mp.mpf(2)) * mp.gamma(df / mp.mpf(2)))
    return float(mp.quad(lambda u: c * u ** (df / mp.mpf(2) - 1) * mp.exp(-u / 2), [x, mp.inf]))


def _mp_f_tail(f, d1, d2):
    c = (
        mp.gamma((d1 + d2) / mp.mpf(2))
        / (mp.gamma(d1 / mp.mpf(2)) * mp.gamma(d2 / mp.mpf(2)))
        * (mp.mpf(d1) / d2) ** (d1 / mp.mpf(2))
    )
    return float(
        mp.quad(
            lambda u: c * u ** (d1 / mp.mpf(2) - 1) * (1 + d1 * u / d2) ** (-(d1 + d2) / mp.mpf(2)),
            [f, mp.inf],
        )
    )


def test_special_cdf_against_quadrature():
    mp.mp.dps = 25
    worst = 0.0
    for df in (1, 2, 3, 5, 8, 12, 20, 40, 80, 200):
        for s in (0.5, 1.0, 1.7, 2.8, 4.5):
            worst = max(worst, abs(special_cdf("t", s, float(df)) - _mp_t_two_sided(s, df)))
    for df in (1, 2, 3, 5, 8, 12, 20, 40, 80, 160):
        for m in (0.4, 0.9, 1.3, 2.0, 3.2):
            worst = max(
                worst, abs(special_cdf("chisq", df * m, float(df)) - _mp_chisq_tail(df * m, df))
            )
    for d1, d2 in ((1, 4), (2, 10), (3, 7), (5, 20), (8, 15), (10, 10), (1, 30), (4, 60), (20, 40), (7, 3)):
        for s in (0.3, 0.8, 1.5, 2.5, 5.0):
            worst = max(
                worst, abs(special_cdf("f", s, (float(d1), float(d2))) - _mp_f_tail(s, d1, d2))
            )
    report(
        "special_cdf vs quadrature oracle (50 points x 3 kinds)",
        worst <= 1e-6,
        f"worst abs err {worst:.2e}",
    )


# ---------------------------------------------------------------------------
# 6. Planted-effect detection

def wait_selection(ds):
    waits = [ev.id for ev, _ in ds.iter_occurrences() if ev.event_type == "wait"]
    return selection_from_occurrences(ds, waits)


def test_planted_effect_detection():
    t0 = time.perf_counter()

    # planted Monday x1.3: the report's unit is one EventBox's same-type
    # occurrences, so the ANOVA runs over a single event type
    ds = generate_synthetic(
        SyntheticConfig(
            n_sequences=3200,
            seed=99,
            planted_effects=(PlantedEffect(day_of_week="Mon", multiplier=1.3),),
        )
    )
    sel = wait_selection(ds)
    assert len(sel.occurrence_ids) >= 5000
    planted_p = anova(ds, sel, "duration", ["day_of_week"]).term("day_of_week").p
    planted_ok = planted_p < 0.01

    flags = 0
    for seed in range(200):
        null_ds = generate_synthetic(SyntheticConfig(n_sequences=60, seed=seed))
        p = anova(null_ds, wait_selection(null_ds), "duration", ["day_of_week"]).term("day_of_week").p
        if p < 0.05:
            flags += 1
    rate = flags / 200
    elapsed = time.perf_counter() - t0
    report(
        "planted-effect detection + null calibration",
        planted_ok and 0.02 <= rate <= 0.09 and elapsed < 60.0,
        f"planted p={planted_p:.2e}, null rate={rate:.3f}, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 7. Query correctness


def test_query_round_trip_and_brute_force():
    from hypothesis import given, settings, seed as hseed

    # 1000 generated ASTs: format -> parse structural equality
    rng = random.Random(29)
    count = 0

    @settings(max_examples=1000, deadline=None, database=None)
    @hseed(29)
    @given(asts())
    def round_trip(ast):
        nonlocal count
        count += 1
        assert parse_query(format_query(ast), QUERY_SCHEMA) == ast

    round_trip()
    assert count >= 1000

    # evaluation vs brute force on 100 random datasets
    @settings(max_examples=100, deadline=None, database=None)
    @hseed(31)
    @given(asts())
    def matches_brute_force(ast):
        ds = query_dataset(random.Random(rng.randint(0, 10**6)), n=20)
        clusters = cluster(ds, min(3, len({s.signature for s in ds.sequences})))
        assert evaluate_query(ast, ds, clusters).sequence_ids == brute_force(ast, ds, clusters)

    matches_brute_force()

    # the verbatim example string evaluates on a fixture
    ds = query_dataset(random.Random(77), n=30)
    clusters = cluster(ds, 2)
    ast = parse_query("(Cluster ID = C1) AND (age > 50)", QUERY_SCHEMA)
    got = evaluate_query(ast, ds, clusters).sequence_ids
    want = {
        seq.id
        for seq in ds.sequences
        if clusters.labels[seq.id] == "C1"
        and seq.attrs.get("age") is not None
        and seq.attrs["age"] > 50
    }
    assert got == want
    report("query round trip + brute-force equivalence + verbatim fixture", True)


# ---------------------------------------------------------------------------
# 8. Scale sanity


def test_scale_sanity():
    t0 = time.perf_counter()
    ds = generate_synthetic(
        SyntheticConfig(n_sequences=10_000, seed=17, extra_visit_rate=2.5)
    )
    assert ds.n_sequences == 10_000
    assert ds.n_events >= 90_000
    cluster(ds, 15)
    align(
        ds,
        AnchorSpec(
            (("arrival", "hard"), ("wait", "soft"), ("consult", "soft"), ("complete", "hard"))
        ),
    )
    sel = selection_all(ds)
    t_box = time.perf_counter()
    build_eventbox(ds, sel, "wait", EventBoxConfig(b="day_of_week"))
    box_elapsed = time.perf_counter() - t_box
    total = time.perf_counter() - t0
    report(
        "scale sanity (10k sequences / ~100k events)",
        total < 10.0 and box_elapsed < 1.0,
        f"total {total:.2f}s, eventbox {box_elapsed:.3f}s, events={ds.n_events}",
    )


# ---------------------------------------------------------------------------
# 9. Replay determinism


def test_replay_determinism(tmp_path):
    config = {
        "synthetic": {"n_sequences": 80, "seed": 23},
        "actions": [
            {"action": "substitute_aggregate", "params": {"source_types": ["wait", "consult"], "new_type": "care"}},
            {"action": "cluster", "params": {"k": 3}},
            {"action": "align", "params": {"anchors": [{"event_type": "care", "strength": "hard"}]}},
            {"action": "sort", "params": {"event_type": "care"}},
            {"action": "select_query", "params": {"query": "Cluster ID = C1"}},
        ],
        "outputs": [
            {"kind": "report_json", "path": "report.json"},
            {"kind": "eventbox_json", "path": "box.json", "params": {"event_type": "care"}},
            {"kind": "eventbox_svg", "path": "box.svg", "params": {"event_type": "care"}},
            {"kind": "dataset", "path": "dataset.json"},
        ],
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config), encoding="utf-8")
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert cli_main(["--config", str(cfg_path), "--out", str(out)]) == 0
        outs.append(out)
    files_identical = all(
        (outs[0] / o["path"]).read_bytes() == (outs[1] / o["path"]).read_bytes()
        for o in config["outputs"]
    )

    # service-style replay of the same action log
    states = []
    for _ in range(2):
        session = Session(session_id="replay")
        apply_action(session, "synthetic", config["synthetic"])
        for step in config["actions"]:
            apply_action(session, step["action"], step["params"])
        states.append(canonical_state(session))
    report(
        "replay determinism (CLI artifacts + action log)",
        files_identical and states[0] == states[1],
    )

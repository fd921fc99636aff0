"""EventBox construction: quartile summaries, Tukey outlier partition, axis
histograms with stacking, breakdown, merge, and density grids.

An EventBox summarizes N same-type event occurrences across up to five
attribute roles: primary horizontal and vertical (point positions), secondary
horizontal and vertical (histogram stacking), and breakdown (partitioning).
All numbers are recomputed from raw values on every build; child summaries
are never combined arithmetically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence as Seq

from .errors import ConfigError, EmptyInputError
from .model import (
    Dataset,
    KIND_CATEGORICAL,
    KIND_NUMERICAL,
    SelectionSet,
    WEEKDAYS,
    resolve_on,
)

MISSING_LABEL = "(missing)"
OTHER_LABEL = "Other"

#: Container height grows 1 unit per occurrence up to this count, then by the
#: square root of the excess, so huge boxes stay drawable.
HEIGHT_COMPRESSION_THRESHOLD = 500

TIME_OF_DAY_ATTR = "start_time_of_day"
MINUTES_PER_DAY = 1440.0


@dataclass(frozen=True)
class EventBoxConfig:
    """The five attribute roles plus binning and outlier options."""

    p_h: str = "duration"
    p_v: str | None = "start_time_of_day"
    s_h: str | None = None
    s_v: str | None = None
    b: str | None = None
    bins_h: int = 24
    bins_v: int = 24
    show_outliers: bool = True
    whisker: float = 1.5
    top_k: int | None = None

    def __post_init__(self):
        roles = [r for r in (self.p_h, self.p_v, self.s_h, self.s_v, self.b) if r]
        if len(set(roles)) != len(roles):
            raise ConfigError("the five attribute roles must name distinct attributes")
        if self.bins_h < 1 or self.bins_v < 1:
            raise ConfigError("bin counts must be at least 1")
        if self.whisker <= 0:
            raise ConfigError("whisker multiplier must be positive")

    def compatible_with(self, other: "EventBoxConfig") -> bool:
        """Everything but the breakdown attribute must match for a merge."""
        return replace(self, b=None) == replace(other, b=None)


@dataclass(frozen=True)
class FiveNumberSummary:
    min: float
    q1: float
    q2: float
    q3: float
    max: float
    n: int


@dataclass(frozen=True)
class HistogramBar:
    label: str
    total: int
    stacks: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class Histogram:
    axis: str  # "h" or "v"
    kind: str  # "numeric" or "categorical"
    edges: tuple[float, ...]  # bin edges for numeric axes, empty otherwise
    bars: tuple[HistogramBar, ...]
    missing: int


@dataclass(frozen=True)
class DensityGrid:
    cols: int
    rows: int
    counts: tuple[tuple[int, ...], ...]  # [row][col]
    intensities: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class EventBox:
    event_type: str
    occurrence_ids: tuple[str, ...]
    config: EventBoxConfig
    summary: FiveNumberSummary
    fences: tuple[float, float]
    outlier_ids: frozenset[str]
    points: tuple[tuple, ...]  # (occurrence_id, x, y, color_key)
    hist_h: Histogram
    hist_v: Histogram | None
    container: tuple[float, float]  # (width, height)
    missing_counts: dict
    breakdown_value: str | None = None
    _dataset: Dataset = field(repr=False, compare=False, default=None)

    @property
    def n(self) -> int:
        return len(self.occurrence_ids)

    def to_obj(self) -> dict:
        return {
            "event_type": self.event_type,
            "n": self.n,
            "occurrence_ids": list(self.occurrence_ids),
            "config": {
                "p_h": self.config.p_h,
                "p_v": self.config.p_v,
                "s_h": self.config.s_h,
                "s_v": self.config.s_v,
                "b": self.config.b,
                "bins_h": self.config.bins_h,
                "bins_v": self.config.bins_v,
                "show_outliers": self.config.show_outliers,
                "whisker": self.config.whisker,
                "top_k": self.config.top_k,
            },
            "summary": {
                "min": self.summary.min,
                "q1": self.summary.q1,
                "q2": self.summary.q2,
                "q3": self.summary.q3,
                "max": self.summary.max,
                "n": self.summary.n,
            },
            "fences": {"lower": self.fences[0], "upper": self.fences[1]},
            "outlier_ids": sorted(self.outlier_ids),
            "points": [list(p) for p in self.points],
            "hist_h": _hist_obj(self.hist_h),
            "hist_v": _hist_obj(self.hist_v) if self.hist_v else None,
            "container": {"width": self.container[0], "height": self.container[1]},
            "missing_counts": dict(sorted(self.missing_counts.items())),
            "breakdown_value": self.breakdown_value,
        }


def _hist_obj(h: Histogram) -> dict:
    return {
        "axis": h.axis,
        "kind": h.kind,
        "edges": list(h.edges),
        "bars": [
            {"label": b.label, "total": b.total, "stacks": [list(s) for s in b.stacks]}
            for b in h.bars
        ],
        "missing": h.missing,
    }


# ---------------------------------------------------------------------------
# Quartiles and fences

def quartiles(values: Seq[float]) -> FiveNumberSummary:
    """Five-number summary with linear interpolation between order statistics.

    For quantile q the position is p = q * (n - 1) on the sorted values and
    the result is v[floor(p)] + frac(p) * (v[floor(p) + 1] - v[floor(p)]).
    """
    if len(values) == 0:
        raise EmptyInputError("cannot summarize zero values")
    vs = sorted(values)
    return FiveNumberSummary(
        min=float(vs[0]),
        q1=_quantile(vs, 0.25),
        q2=_quantile(vs, 0.50),
        q3=_quantile(vs, 0.75),
        max=float(vs[-1]),
        n=len(vs),
    )


def _quantile(vs: list[float], q: float) -> float:
    pos = q * (len(vs) - 1)
    lo = math.floor(pos)
    frac = pos - lo
    if frac == 0:
        return float(vs[lo])
    return vs[lo] + frac * (vs[lo + 1] - vs[lo])


def tukey_partition(
    values: Iterable[tuple[str, float]], w: float = 1.5
) -> tuple[set[str], set[str], tuple[float, float]]:
    """Split (id, value) pairs into inliers and outliers by Tukey fences.

    Fences are [q1 - w*(q3 - q1), q3 + w*(q3 - q1)] over ALL values; the
    outside test is strict, so boundary values are inliers.
    """
    pairs = list(values)
    if not pairs:
        raise EmptyInputError("cannot partition zero values")
    if w <= 0:
        raise ConfigError("whisker multiplier must be positive")
    summary = quartiles([v for _, v in pairs])
    iqr = summary.q3 - summary.q1
    lo, hi = summary.q1 - w * iqr, summary.q3 + w * iqr
    inliers, outliers = set(), set()
    for oid, v in pairs:
        (outliers if (v < lo or v > hi) else inliers).add(oid)
    return inliers, outliers, (lo, hi)


# ---------------------------------------------------------------------------
# Category handling

def natural_category_order(values: Iterable[str], counts: dict | None = None) -> list[str]:
    """Weekdays in calendar order, quintile labels in label order, anything
    else by descending frequency (ties alphabetical). ``(missing)`` goes last."""
    uniq = list(dict.fromkeys(values))
    missing = [v for v in uniq if v == MISSING_LABEL]
    rest = [v for v in uniq if v != MISSING_LABEL]
    if set(rest) <= set(WEEKDAYS):
        rest = [d for d in WEEKDAYS if d in rest]
    elif all(len(v) == 2 and v[0] == "Q" and v[1].isdigit() for v in rest):
        rest = sorted(rest)
    elif counts:
        rest = sorted(rest, key=lambda v: (-counts.get(v, 0), v))
    else:
        rest = sorted(rest)
    return rest + missing


def _quintile_labels(values: list[float]) -> dict[float, str]:
    """Map raw numeric values to quintile labels Q1..Q5 of their own sample."""
    summary_points = [_quantile(sorted(values), q) for q in (0.2, 0.4, 0.6, 0.8)]

    def label(v: float) -> str:
        for i, edge in enumerate(summary_points, start=1):
            if v <= edge:
                return f"Q{i}"
        return "Q5"

    return {v: label(v) for v in set(values)}


# ---------------------------------------------------------------------------
# Build

def build_eventbox(
    dataset: Dataset,
    selection: SelectionSet,
    event_type: str,
    config: EventBoxConfig | None = None,
) -> EventBox:
    """Summarize the selected occurrences of one event type.

    Occurrences whose primary horizontal value is missing are left out of the
    box entirely (and counted); occurrences missing other role attributes are
    excluded only from the affected marks.
    """
    config = config or EventBoxConfig()
    wanted = selection.occurrence_ids
    occs = [
        (ev, seq)
        for ev, seq in dataset.iter_occurrences()
        if ev.event_type == event_type and ev.id in wanted
    ]
    return _build_from_occs(dataset, occs, event_type, config)


def _build_from_occs(
    dataset: Dataset,
    occs: list,
    event_type: str,
    config: EventBoxConfig,
    breakdown_value: str | None = None,
) -> EventBox:
    if config.p_h and dataset.schema.knows(config.p_h):
        if dataset.schema.kind_of(config.p_h) != KIND_NUMERICAL:
            raise ConfigError(f"primary horizontal attribute {config.p_h!r} is not numeric")
    missing_counts = {"p_h": 0, "p_v": 0, "s_h": 0, "s_v": 0, "b": 0}

    rows = []  # (ev, seq, x)
    for ev, seq in occs:
        x = resolve_on(dataset, ev, seq, config.p_h)
        if x is None:
            missing_counts["p_h"] += 1
            continue
        rows.append((ev, seq, float(x)))
    if not rows:
        raise EmptyInputError(f"no occurrences of {event_type!r} with a usable {config.p_h!r}")

    xs = [x for _, _, x in rows]
    summary = quartiles(xs)
    _, outliers, fences = tukey_partition(
        [(ev.id, x) for ev, _, x in rows], config.whisker
    )

    def role_values(role_attr: str | None, counter_key: str) -> list:
        if role_attr is None:
            return [None] * len(rows)
        out = []
        for ev, seq, _ in rows:
            v = resolve_on(dataset, ev, seq, role_attr)
            if v is None:
                missing_counts[counter_key] += 1
            out.append(v)
        return out

    ys = role_values(config.p_v, "p_v")
    s_h_vals = role_values(config.s_h, "s_h")
    s_v_vals = role_values(config.s_v, "s_v")
    b_vals = role_values(config.b, "b")

    b_labels = _as_categories(dataset, config.b, b_vals)
    points = tuple(
        (ev.id, x, y, b_labels[i] if config.b else None)
        for i, ((ev, _, x), y) in enumerate(zip(rows, ys))
        if y is not None
    )

    hist_h = _numeric_histogram(
        "h", xs, 0.0, max(xs), config.bins_h,
        _stack_keys(dataset, config.s_h, s_h_vals), config.top_k,
    )
    hist_v = _build_hist_v(dataset, config, ys, _stack_keys(dataset, config.s_v, s_v_vals))

    n = len(rows)
    height = float(n) if n <= HEIGHT_COMPRESSION_THRESHOLD else (
        HEIGHT_COMPRESSION_THRESHOLD + math.sqrt(n - HEIGHT_COMPRESSION_THRESHOLD)
    )
    return EventBox(
        event_type=event_type,
        occurrence_ids=tuple(ev.id for ev, _, _ in rows),
        config=config,
        summary=summary,
        fences=fences,
        outlier_ids=frozenset(outliers),
        points=points,
        hist_h=hist_h,
        hist_v=hist_v,
        container=(max(xs), height),
        missing_counts=missing_counts,
        breakdown_value=breakdown_value,
        _dataset=dataset,
    )


def _as_categories(dataset: Dataset, attr: str | None, values: list) -> list:
    """Raw role values as category labels; numeric roles are quintile-binned."""
    if attr is None:
        return values
    if dataset.schema.kind_of(attr) == KIND_NUMERICAL:
        present = [v for v in values if v is not None]
        if not present:
            return [None if v is None else str(v) for v in values]
        labels = _quintile_labels([float(v) for v in present])
        return [None if v is None else labels[float(v)] for v in values]
    return [None if v is None else str(v) for v in values]


def _stack_keys(dataset: Dataset, attr: str | None, values: list) -> list | None:
    if attr is None:
        return None
    cats = _as_categories(dataset, attr, values)
    return [MISSING_LABEL if c is None else c for c in cats]


def _apply_top_k(labels: list[str], top_k: int | None) -> list[str]:
    """Pool everything beyond the top_k most frequent labels into Other.

    The missing marker is never pooled; it stays its own label.
    """
    if top_k is None:
        return labels
    counts: dict[str, int] = {}
    for lab in labels:
        if lab != MISSING_LABEL:
            counts[lab] = counts.get(lab, 0) + 1
    keep = set(sorted(counts, key=lambda v: (-counts[v], v))[:top_k])
    return [
        lab if lab == MISSING_LABEL or lab in keep else OTHER_LABEL for lab in labels
    ]


def _numeric_histogram(
    axis: str,
    values: list[float],
    lo: float,
    hi: float,
    bins: int,
    stacks: list[str] | None,
    top_k: int | None,
) -> Histogram:
    """Equal-width histogram over [lo, hi]; the last bin is right-closed.

    Values below lo land in the first bin. ``stacks`` runs parallel to
    ``values`` when stacking is on.
    """
    if hi <= lo:
        edges = [lo, hi if hi > lo else lo]
        idx = [0] * len(values)
        bins = 1
    else:
        width = (hi - lo) / bins
        edges = [lo + i * width for i in range(bins)] + [hi]
        idx = [min(int((v - lo) / width), bins - 1) if v > lo else 0 for v in values]
    if stacks is not None:
        stacks = _apply_top_k(stacks, top_k)
    totals = [0] * bins
    stack_counts: list[dict[str, int]] = [dict() for _ in range(bins)]
    for j, i in enumerate(idx):
        totals[i] += 1
        if stacks is not None:
            key = stacks[j]
            stack_counts[i][key] = stack_counts[i].get(key, 0) + 1
    all_keys: dict[str, int] = {}
    for sc in stack_counts:
        for k, c in sc.items():
            all_keys[k] = all_keys.get(k, 0) + c
    key_order = natural_category_order(all_keys, all_keys)
    bars = tuple(
        HistogramBar(
            label=f"[{edges[i]:g}, {edges[i + 1]:g})" if i < bins - 1 else f"[{edges[i]:g}, {edges[i + 1]:g}]",
            total=totals[i],
            stacks=tuple(
                (k, stack_counts[i][k]) for k in key_order if k in stack_counts[i]
            ),
        )
        for i in range(bins)
    )
    return Histogram(axis=axis, kind="numeric", edges=tuple(edges), bars=bars, missing=0)


def _categorical_histogram(
    axis: str,
    values: list,  # category label or None
    stacks: list[str] | None,
    top_k: int | None,
) -> Histogram:
    labels = [v for v in values if v is not None]
    missing = len(values) - len(labels)
    labels = _apply_top_k(labels, top_k)
    if stacks is not None:
        stacks = _apply_top_k(stacks, top_k)
    counts: dict[str, int] = {}
    stack_counts: dict[str, dict[str, int]] = {}
    pos = 0
    for i, v in enumerate(values):
        if v is None:
            continue
        lab = labels[pos]
        pos += 1
        counts[lab] = counts.get(lab, 0) + 1
        if stacks is not None:
            sc = stack_counts.setdefault(lab, {})
            sc[stacks[i]] = sc.get(stacks[i], 0) + 1
    order = natural_category_order(counts, counts)
    all_stack_keys: dict[str, int] = {}
    for sc in stack_counts.values():
        for k, c in sc.items():
            all_stack_keys[k] = all_stack_keys.get(k, 0) + c
    stack_order = natural_category_order(all_stack_keys, all_stack_keys)
    bars = tuple(
        HistogramBar(
            label=lab,
            total=counts[lab],
            stacks=tuple(
                (k, stack_counts[lab][k]) for k in stack_order if k in stack_counts.get(lab, {})
            ),
        )
        for lab in order
    )
    return Histogram(axis=axis, kind="categorical", edges=(), bars=bars, missing=missing)


def _build_hist_v(
    dataset: Dataset, config: EventBoxConfig, ys: list, stacks: list | None
) -> Histogram | None:
    if config.p_v is None:
        return None
    if config.p_v == TIME_OF_DAY_ATTR:
        present = [float(y) for y in ys if y is not None]
        hist = _numeric_histogram(
            "v", present, 0.0, MINUTES_PER_DAY, config.bins_v,
            _drop_missing_rows(stacks, ys), config.top_k,
        )
        return replace(hist, missing=len(ys) - len(present))
    if dataset.schema.kind_of(config.p_v) == KIND_CATEGORICAL:
        return _categorical_histogram("v", [None if y is None else str(y) for y in ys], stacks, config.top_k)
    present = [float(y) for y in ys if y is not None]
    if not present:
        return Histogram(axis="v", kind="numeric", edges=(), bars=(), missing=len(ys))
    hist = _numeric_histogram(
        "v", present, min(present), max(present), config.bins_v,
        _drop_missing_rows(stacks, ys), config.top_k,
    )
    return replace(hist, missing=len(ys) - len(present))


def _drop_missing_rows(stacks: list | None, ys: list) -> list | None:
    if stacks is None:
        return None
    return [s for s, y in zip(stacks, ys) if y is not None]


# ---------------------------------------------------------------------------
# Breakdown / merge / density

def breakdown(box: EventBox) -> list[EventBox]:
    """One child EventBox per distinct breakdown value, partitioning the parent.

    Children recompute everything from raw values. Ordering is the natural
    category order (weekday order for day_of_week, else frequency descending)
    with a ``(missing)`` child last when the breakdown value is absent.
    """
    if box.config.b is None:
        raise ConfigError("breakdown attribute is not set")
    dataset = box._dataset
    id_set = set(box.occurrence_ids)
    occs = [
        (ev, seq)
        for ev, seq in dataset.iter_occurrences()
        if ev.id in id_set
    ]
    b_vals = [resolve_on(dataset, ev, seq, box.config.b) for ev, seq in occs]
    labels = _as_categories(dataset, box.config.b, b_vals)
    labels = [MISSING_LABEL if v is None else v for v in labels]
    by_label: dict[str, list] = {}
    counts: dict[str, int] = {}
    for (ev, seq), lab in zip(occs, labels):
        by_label.setdefault(lab, []).append((ev, seq))
        counts[lab] = counts.get(lab, 0) + 1
    order = natural_category_order(by_label, counts)
    return [
        _build_from_occs(dataset, by_label[lab], box.event_type, box.config, breakdown_value=lab)
        for lab in order
    ]


def merge(boxes: list[EventBox]) -> EventBox:
    """Union of disjoint EventBoxes; all summaries recomputed from raw values."""
    if not boxes:
        raise EmptyInputError("nothing to merge")
    first = boxes[0]
    seen: set[str] = set()
    for box in boxes:
        if not first.config.compatible_with(box.config):
            raise ConfigError("cannot merge EventBoxes with different configurations")
        if box._dataset is not first._dataset:
            raise ConfigError("cannot merge EventBoxes built from different datasets")
        overlap = seen & set(box.occurrence_ids)
        if overlap:
            raise ConfigError(f"overlapping occurrences in merge: {sorted(overlap)[:5]}")
        seen.update(box.occurrence_ids)
    dataset = first._dataset
    types = sorted({b.event_type for b in boxes})
    event_type = types[0] if len(types) == 1 else "+".join(types)
    occs = [(ev, seq) for ev, seq in dataset.iter_occurrences() if ev.id in seen]
    return _build_from_occs(dataset, occs, event_type, first.config)


def density_grid(box: EventBox, cols: int, rows: int) -> DensityGrid:
    """Bin the box's points into a cols-by-rows grid of normalized intensities.

    The x domain is [0, max p_h]; the y domain is the observed point range
    (categorical verticals get one row per category).
    """
    if cols < 1 or rows < 1:
        raise ConfigError("grid must be at least 1x1")
    if not box.points:
        raise EmptyInputError("no points to grid")
    max_x = box.container[0]
    ys = [p[2] for p in box.points]
    categorical = any(isinstance(y, str) for y in ys)
    if categorical:
        order = natural_category_order([str(y) for y in ys])
        row_of = {lab: i for i, lab in enumerate(order)}
        rows = len(order)
    else:
        lo_y, hi_y = min(ys), max(ys)
    counts = [[0] * cols for _ in range(rows)]
    for _, x, y, _ in box.points:
        ci = 0 if max_x <= 0 else min(int(x / max_x * cols), cols - 1)
        if categorical:
            ri = row_of[str(y)]
        elif hi_y <= lo_y:
            ri = 0
        else:
            ri = min(int((y - lo_y) / (hi_y - lo_y) * rows), rows - 1)
        counts[ri][ci] += 1
    peak = max(max(row) for row in counts)
    intensities = tuple(
        tuple((c / peak) if peak else 0.0 for c in row) for row in counts
    )
    return DensityGrid(
        cols=cols,
        rows=rows,
        counts=tuple(tuple(row) for row in counts),
        intensities=intensities,
    )

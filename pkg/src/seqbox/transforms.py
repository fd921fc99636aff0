"""User-driven dataset transformations: substitution with aggregation,
hard/soft anchor alignment, and event-based sorting.

All three are pure: they take an immutable dataset (or view) and return a
new value. Alignment inserts GAP cells (``None``) to give rows a uniform
width; gaps are visual padding only and never carry duration.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from statistics import fmean
from typing import Iterable

from .errors import ConfigError
from .model import (
    Dataset,
    EventOccurrence,
    KIND_CATEGORICAL,
    KIND_NUMERICAL,
    LEVEL_EVENT,
)

#: Padding cell marker inside aligned rows.
GAP = None

HARD = "hard"
SOFT = "soft"

NUMERIC_RULES = ("sum", "mean", "first", "last", "span")
CATEGORICAL_RULES = ("first", "last", "mode", "join")


@dataclass(frozen=True)
class MergePolicy:
    """Per-attribute merge rules used when a run of events collapses.

    Unlisted attributes fall back to ``mean`` (numerical), ``mode``
    (categorical), or ``first`` (temporal). ``span`` is max minus min;
    ``join`` is the sorted unique values joined with ``+``.
    """

    rules: dict = None

    def __post_init__(self):
        object.__setattr__(self, "rules", dict(self.rules or {}))

    def rule_for(self, name: str, kind: str) -> str:
        rule = self.rules.get(name)
        if rule is None:
            return "mean" if kind == KIND_NUMERICAL else ("mode" if kind == KIND_CATEGORICAL else "first")
        allowed = NUMERIC_RULES if kind == KIND_NUMERICAL else (
            CATEGORICAL_RULES if kind == KIND_CATEGORICAL else ("first", "last")
        )
        if rule not in allowed:
            raise ConfigError(f"merge rule {rule!r} not valid for {kind} attribute {name!r}")
        return rule


@dataclass(frozen=True)
class AnchorSpec:
    """Ordered anchor list; order is the expected left-to-right event order."""

    anchors: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.anchors:
            raise ConfigError("need at least one anchor")
        seen = set()
        for etype, strength in self.anchors:
            if strength not in (HARD, SOFT):
                raise ConfigError(f"anchor strength must be hard or soft, got {strength!r}")
            if etype in seen:
                raise ConfigError(f"duplicate anchor event type {etype!r}")
            seen.add(etype)

    @property
    def hard_types(self) -> tuple[str, ...]:
        return tuple(t for t, s in self.anchors if s == HARD)


@dataclass(frozen=True)
class AlignedRow:
    sequence_id: str
    cells: tuple[str | None, ...]  # occurrence ids, GAP for padding


@dataclass(frozen=True)
class AlignedView:
    """Gap-padded matrix of occurrence ids, one row per sequence."""

    dataset_version: int
    rows: tuple[AlignedRow, ...]
    column_count: int
    anchor_columns: dict  # event type -> column index

    def row_for(self, sequence_id: str) -> AlignedRow:
        for row in self.rows:
            if row.sequence_id == sequence_id:
                return row
        raise KeyError(sequence_id)


# ---------------------------------------------------------------------------
# Substitution and aggregation

def substitute_aggregate(
    dataset: Dataset,
    source_types: Iterable[str],
    new_type: str,
    policy: MergePolicy | None = None,
) -> Dataset:
    """Retype all occurrences of ``source_types`` to ``new_type`` and collapse
    each maximal run of consecutive ``new_type`` occurrences into one.

    The collapsed occurrence spans first start to last end; attributes merge
    per ``policy``. Returns a new dataset version.
    """
    sources = set(source_types)
    if not sources:
        raise ConfigError("source event types must not be empty")
    policy = policy or MergePolicy({})
    if new_type not in sources and new_type in dataset.event_types:
        raise ConfigError(f"event type {new_type!r} already exists in the dataset")

    event_specs = dataset.schema.at_level(LEVEL_EVENT)
    # resolve all rules up front so a bad policy fails before any work
    rules = {s.name: (policy.rule_for(s.name, s.kind), s.kind) for s in event_specs}

    new_sequences = []
    for seq in dataset.sequences:
        out: list[EventOccurrence] = []
        run: list[EventOccurrence] = []
        for ev in seq.events:
            if ev.event_type in sources:
                run.append(ev)
                continue
            if run:
                out.append(_collapse_run(run, new_type, rules))
                run = []
            out.append(ev)
        if run:
            out.append(_collapse_run(run, new_type, rules))
        new_sequences.append(replace(seq, events=tuple(out)))

    return dataset.with_transformation(
        "substitute_aggregate",
        {"source_types": sorted(sources), "new_type": new_type, "rules": {n: r for n, (r, _) in rules.items()}},
        tuple(new_sequences),
    )


def _collapse_run(run: list[EventOccurrence], new_type: str, rules: dict) -> EventOccurrence:
    first, last = run[0], run[-1]
    if len(run) == 1:
        return replace(first, event_type=new_type)
    attrs = {name: _merge_values([ev.attrs.get(name) for ev in run], rule, kind)
             for name, (rule, kind) in rules.items()}
    return EventOccurrence(
        id=f"{first.id}~{last.id}",
        sequence_id=first.sequence_id,
        event_type=new_type,
        start=first.start,
        end=last.end,
        attrs=attrs,
    )


def _merge_values(values: list, rule: str, kind: str):
    present = [v for v in values if v is not None]
    if not present:
        return None
    if rule == "first":
        return present[0]
    if rule == "last":
        return present[-1]
    if kind == KIND_NUMERICAL:
        if rule == "sum":
            return float(sum(present))
        if rule == "mean":
            return fmean(present)
        if rule == "span":
            return float(max(present) - min(present))
    if rule == "mode":
        counts: dict = {}
        for v in present:
            counts[v] = counts.get(v, 0) + 1
        best = max(counts.values())
        for v in present:  # first-seen wins ties
            if counts[v] == best:
                return v
    if rule == "join":
        return "+".join(sorted(set(present)))
    raise ConfigError(f"cannot apply rule {rule!r} to kind {kind!r}")


# ---------------------------------------------------------------------------
# Alignment

def align(dataset: Dataset, anchors: AnchorSpec) -> AlignedView:
    """Two-pass gap alignment.

    Hard anchors are matched first (greedy, leftmost occurrence after the
    previous hard match) and receive one global column each; the stretches
    between hard columns are then aligned recursively on the soft anchors
    listed between those hard anchors. Removing GAP cells from any row gives
    back the original occurrence order.
    """
    plan = _build_plan(anchors)
    row_inputs = [
        (seq.id, [(ev.id, ev.event_type) for ev in seq.events]) for seq in dataset.sequences
    ]
    cells_per_row, columns, anchor_cols = _align_rows(
        [cells for _, cells in row_inputs], plan
    )
    rows = tuple(
        AlignedRow(sequence_id=sid, cells=tuple(cells))
        for (sid, _), cells in zip(row_inputs, cells_per_row)
    )
    return AlignedView(
        dataset_version=dataset.version,
        rows=rows,
        column_count=columns,
        anchor_columns=anchor_cols,
    )


@dataclass(frozen=True)
class _Plan:
    """Anchor types at this level plus a sub-plan for each gap between them.

    ``segments`` has one entry per gap: before the first anchor, between
    consecutive anchors, and after the last one.
    """

    anchor_types: tuple[str, ...]
    segments: tuple["_Plan | None", ...]


def _build_plan(spec: AnchorSpec) -> _Plan:
    hard = [t for t, s in spec.anchors if s == HARD]
    if not hard:
        # soft-only spec: treat the softs as the single alignment tier
        softs = tuple(t for t, _ in spec.anchors)
        return _Plan(softs, (None,) * (len(softs) + 1))
    segments: list[_Plan | None] = []
    pending_soft: list[str] = []
    for etype, strength in spec.anchors:
        if strength == HARD:
            segments.append(_soft_plan(pending_soft))
            pending_soft = []
        else:
            pending_soft.append(etype)
    segments.append(_soft_plan(pending_soft))
    return _Plan(tuple(hard), tuple(segments))


def _soft_plan(softs: list[str]) -> _Plan | None:
    if not softs:
        return None
    return _Plan(tuple(softs), (None,) * (len(softs) + 1))


def _align_rows(rows: list[list], plan: _Plan):
    """Align rows of (occurrence_id, event_type) cells against one plan tier.

    Returns (list of padded id-cell lists, total width, anchor column map).
    """
    n_anchors = len(plan.anchor_types)
    matched: list[list] = []  # per row: anchor cells (id or GAP)
    segmented: list[list[list]] = []  # per row: n_anchors + 1 segments
    for cells in rows:
        anchor_cells = []
        segments: list[list] = [[] for _ in range(n_anchors + 1)]
        pos = 0
        open_segment = 0
        for k, anchor_type in enumerate(plan.anchor_types):
            hit = None
            for i in range(pos, len(cells)):
                if cells[i][1] == anchor_type:
                    hit = i
                    break
            if hit is None:
                # unmatched anchor: consume nothing; events stay in the
                # segment preceding this anchor's column
                anchor_cells.append(GAP)
                continue
            segments[open_segment].extend(cells[pos:hit])
            anchor_cells.append(cells[hit])
            pos = hit + 1
            open_segment = k + 1
        segments[open_segment].extend(cells[pos:])
        matched.append(anchor_cells)
        segmented.append(segments)

    # resolve each segment block, recursing where a sub-plan exists
    padded_segments: list[list[list]] = [[] for _ in rows]
    segment_widths: list[int] = []
    sub_anchor_cols: list[dict] = []
    for s in range(n_anchors + 1):
        block = [segmented[r][s] for r in range(len(rows))]
        sub_plan = plan.segments[s]
        if sub_plan is not None:
            padded, width, cols = _align_rows(block, sub_plan)
        else:
            width = max((len(b) for b in block), default=0)
            padded = [ _ids(b) + [GAP] * (width - len(b)) for b in block]
            cols = {}
        for r in range(len(rows)):
            padded_segments[r].append(padded[r])
        segment_widths.append(width)
        sub_anchor_cols.append(cols)

    anchor_columns: dict = {}
    offset = 0
    for s in range(n_anchors + 1):
        for etype, col in sub_anchor_cols[s].items():
            anchor_columns[etype] = offset + col
        offset += segment_widths[s]
        if s < n_anchors:
            anchor_columns[plan.anchor_types[s]] = offset
            offset += 1
    total_width = offset

    out_rows = []
    for r in range(len(rows)):
        out: list = []
        for s in range(n_anchors + 1):
            out.extend(padded_segments[r][s])
            if s < n_anchors:
                cell = matched[r][s]
                out.append(cell[0] if cell is not GAP else GAP)
        out_rows.append(out)
    return out_rows, total_width, anchor_columns


def _ids(cells: list) -> list:
    return [c[0] for c in cells]


# ---------------------------------------------------------------------------
# Sorting

def sort_by_event(view: AlignedView, dataset: Dataset, sort_type: str) -> AlignedView:
    """Stable row sort by the event-type suffix starting at ``sort_type``.

    Each row's key is the list of event-type symbols (gaps dropped) from the
    first ``sort_type`` cell to the row's end, compared lexicographically in
    alphabetical symbol order. Rows without the event keep their relative
    order after all rows that have it.
    """
    keyed = []
    for row in view.rows:
        types = [
            dataset.occurrence(c).event_type if c is not GAP else GAP for c in row.cells
        ]
        key: tuple = (1,)  # rows without the event sort after all that have it
        for i, t in enumerate(types):
            if t == sort_type:
                key = (0, tuple(s for s in types[i:] if s is not GAP))
                break
        keyed.append((key, row))
    # sorted() is stable, so equal keys (including all (1,) rows) keep their
    # prior relative order
    keyed.sort(key=lambda item: item[0])
    return replace(view, rows=tuple(row for _, row in keyed))

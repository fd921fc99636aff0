"""Session state and the shared action vocabulary.

Both the HTTP service and the batch CLI drive analysis through
:func:`apply_action`, so a recorded action log replays identically through
either front end. Mutating actions bump the session's state version and are
appended to the log; read actions (eventbox builds, reports, panels) never
touch state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import eventbox as eb
from . import grouping, query, stats, transforms
from .errors import ConfigError, StateError
from .ingest import IngestConfig, ColumnMap, QualityReport, load_dataset
from .model import (
    Dataset,
    KIND_CATEGORICAL,
    LEVEL_SEQUENCE,
    SelectionSet,
    canonical_json,
    dataset_to_obj,
    resolve_on,
    selection_all,
    selection_combine,
    selection_from_occurrences,
    selection_from_sequences,
)
from .synthetic import PlantedEffect, SyntheticConfig, generate_synthetic

MUTATING_ACTIONS = frozenset(
    {
        "load",
        "synthetic",
        "substitute_aggregate",
        "align",
        "sort",
        "cluster",
        "import_labels",
        "select_query",
        "select_ids",
        "select_combine",
        "reset_selection",
        "undo",
    }
)
READ_ACTIONS = frozenset({"build_eventbox", "breakdown", "merge", "report"})


@dataclass
class Session:
    """One analysis session: append-only dataset versions plus view state."""

    session_id: str
    datasets: list[Dataset] = field(default_factory=list)
    clustering: grouping.ClusterAssignment | None = None
    clustering_version: int = -1
    aligned_view: transforms.AlignedView | None = None
    selection: SelectionSet | None = None  # None means "everything"
    state_version: int = 0
    action_log: list[dict] = field(default_factory=list)
    quality_report: QualityReport | None = None

    @property
    def dataset(self) -> Dataset:
        if not self.datasets:
            raise StateError("no dataset loaded yet")
        return self.datasets[-1]

    def effective_selection(self) -> SelectionSet:
        if self.selection is not None:
            return self.selection
        return selection_all(self.dataset)

    def active_clustering(self) -> grouping.ClusterAssignment | None:
        if self.clustering is not None and self.clustering_version == self.dataset.version:
            return self.clustering
        return None


def apply_action(session: Session, action: str, params: dict | None = None) -> dict:
    """Run one action against a session and return its result payload.

    Mutating actions append to the action log and bump ``state_version``;
    read actions leave the session untouched. Every payload echoes the state
    version so clients can detect staleness.
    """
    params = dict(params or {})
    handler = _HANDLERS.get(action)
    if handler is None:
        raise ConfigError(f"unknown action {action!r}")
    payload = handler(session, params) or {}
    if action in MUTATING_ACTIONS:
        session.state_version += 1
        session.action_log.append({"action": action, "params": params})
    payload["state_version"] = session.state_version
    return payload


def _set_dataset(session: Session, dataset: Dataset) -> None:
    session.datasets.append(dataset)
    session.selection = None
    session.aligned_view = None


def _act_load(session: Session, params: dict) -> dict:
    columns = params.get("columns") or {}
    config = IngestConfig(
        events_path=params["events_path"],
        sequence_attrs_path=params.get("sequence_attrs_path"),
        delimiter=params.get("delimiter", ","),
        columns=ColumnMap(
            sequence_id=columns.get("sequence_id", "sequence_id"),
            event_type=columns.get("event_type", "event_type"),
            start=columns.get("start", "start"),
            end=columns.get("end", "end" if "duration" not in columns else None),
            duration=columns.get("duration"),
        ),
        timestamp_format=params.get("timestamp_format", "%Y-%m-%d %H:%M:%S"),
        timezone=params.get("timezone", "UTC"),
        kind_overrides=params.get("kind_overrides", {}),
    )
    dataset, report = load_dataset(config)
    if session.datasets:
        raise StateError("session already has a dataset; start a new session")
    _set_dataset(session, dataset)
    session.quality_report = report
    return {"dataset": _dataset_summary(dataset), "quality": report.to_obj()}


def _act_synthetic(session: Session, params: dict) -> dict:
    if session.datasets:
        raise StateError("session already has a dataset; start a new session")
    effects = tuple(
        PlantedEffect(
            day_of_week=e["day_of_week"],
            multiplier=e["multiplier"],
            event_type=e.get("event_type"),
        )
        for e in params.get("planted_effects", [])
    )
    config = SyntheticConfig(
        n_sequences=params["n_sequences"],
        seed=params["seed"],
        event_alphabet=tuple(params.get("event_alphabet", ())) or SyntheticConfig.event_alphabet,
        planted_effects=effects,
    )
    dataset = generate_synthetic(config)
    _set_dataset(session, dataset)
    return {"dataset": _dataset_summary(dataset)}


def _act_substitute_aggregate(session: Session, params: dict) -> dict:
    policy = transforms.MergePolicy(params.get("merge_rules", {}))
    dataset = transforms.substitute_aggregate(
        session.dataset, set(params["source_types"]), params["new_type"], policy
    )
    _set_dataset(session, dataset)
    return {"dataset": _dataset_summary(dataset)}


def _act_align(session: Session, params: dict) -> dict:
    spec = transforms.AnchorSpec(
        tuple((a["event_type"], a["strength"]) for a in params["anchors"])
    )
    session.aligned_view = transforms.align(session.dataset, spec)
    return {"aligned_view": _view_summary(session.aligned_view)}


def _act_sort(session: Session, params: dict) -> dict:
    if session.aligned_view is None or session.aligned_view.dataset_version != session.dataset.version:
        raise StateError("sorting needs a current aligned view; run align first")
    session.aligned_view = transforms.sort_by_event(
        session.aligned_view, session.dataset, params["event_type"]
    )
    return {"aligned_view": _view_summary(session.aligned_view)}


def _act_cluster(session: Session, params: dict) -> dict:
    session.clustering = grouping.cluster(session.dataset, params["k"])
    session.clustering_version = session.dataset.version
    return {"clusters": _cluster_summary(session.clustering)}


def _act_import_labels(session: Session, params: dict) -> dict:
    session.clustering = grouping.import_labels(session.dataset, params["path"])
    session.clustering_version = session.dataset.version
    return {"clusters": _cluster_summary(session.clustering)}


def _act_select_query(session: Session, params: dict) -> dict:
    ast = query.parse_query(params["query"], session.dataset.schema)
    session.selection = query.evaluate_query(
        ast, session.dataset, session.active_clustering()
    )
    return {"selection": _selection_summary(session.selection)}


def _act_select_ids(session: Session, params: dict) -> dict:
    dataset = session.dataset
    occurrence_ids = params.get("occurrence_ids") or []
    sequence_ids = params.get("sequence_ids") or []
    origin = params.get("origin", "ids")
    if occurrence_ids and sequence_ids:
        a = selection_from_occurrences(dataset, occurrence_ids, origin)
        b = selection_from_sequences(dataset, sequence_ids, origin)
        session.selection = selection_combine(dataset, a, b, "union")
    elif occurrence_ids:
        session.selection = selection_from_occurrences(dataset, occurrence_ids, origin)
    else:
        session.selection = selection_from_sequences(dataset, sequence_ids, origin)
    return {"selection": _selection_summary(session.selection)}


def _act_select_combine(session: Session, params: dict) -> dict:
    dataset = session.dataset
    current = session.effective_selection()
    if "query" in params:
        ast = query.parse_query(params["query"], dataset.schema)
        other = query.evaluate_query(ast, dataset, session.active_clustering())
    else:
        occ = params.get("occurrence_ids") or []
        if occ:
            other = selection_from_occurrences(dataset, occ, "ids")
        else:
            other = selection_from_sequences(dataset, params.get("sequence_ids") or [], "ids")
    session.selection = selection_combine(dataset, current, other, params["op"])
    return {"selection": _selection_summary(session.selection)}


def _act_reset_selection(session: Session, params: dict) -> dict:
    session.selection = None
    return {"selection": None}


def _act_undo(session: Session, params: dict) -> dict:
    if len(session.datasets) < 2:
        raise StateError("nothing to undo")
    session.datasets.pop()
    session.selection = None
    if session.aligned_view is not None and (
        session.aligned_view.dataset_version != session.dataset.version
    ):
        session.aligned_view = None
    if session.clustering_version > session.dataset.version:
        session.clustering = None
        session.clustering_version = -1
    return {"dataset": _dataset_summary(session.dataset)}


def _eventbox_config(params: dict) -> eb.EventBoxConfig:
    kwargs = {}
    for key in (
        "p_h", "p_v", "s_h", "s_v", "b", "bins_h", "bins_v",
        "show_outliers", "whisker", "top_k",
    ):
        if key in params and params[key] is not None:
            kwargs[key] = params[key]
    if params.get("p_v", "unset") is None:
        kwargs["p_v"] = None
    return eb.EventBoxConfig(**kwargs)


def build_box(session: Session, params: dict) -> eb.EventBox:
    config = _eventbox_config(params)
    return eb.build_eventbox(
        session.dataset,
        session.effective_selection(),
        params["event_type"],
        config,
    )


def eventbox_payload(session: Session, params: dict) -> dict:
    """EventBox JSON object, with a density grid when the params ask for one."""
    box = build_box(session, params)
    obj = box.to_obj()
    if params.get("density_cols") or params.get("density_rows"):
        grid = eb.density_grid(
            box, int(params.get("density_cols", 24)), int(params.get("density_rows", 24))
        )
        obj["density"] = {
            "cols": grid.cols,
            "rows": grid.rows,
            "counts": [list(r) for r in grid.counts],
            "intensities": [list(r) for r in grid.intensities],
        }
    return obj


def _act_build_eventbox(session: Session, params: dict) -> dict:
    return {"eventbox": eventbox_payload(session, params)}


def _act_breakdown(session: Session, params: dict) -> dict:
    box = build_box(session, params)
    return {"eventboxes": [child.to_obj() for child in eb.breakdown(box)]}


def _act_merge(session: Session, params: dict) -> dict:
    boxes = [build_box(session, p) for p in params["boxes"]]
    return {"eventbox": eb.merge(boxes).to_obj()}


def report_config(params: dict) -> stats.ReportConfig:
    kwargs = {}
    if "continuous" in params:
        kwargs["continuous"] = tuple(params["continuous"])
    if "categorical" in params:
        kwargs["categorical"] = tuple(params["categorical"])
    if "response" in params:
        kwargs["response"] = params["response"]
    if "max_order" in params:
        kwargs["max_order"] = params["max_order"]
    if "alpha" in params:
        kwargs["alpha"] = params["alpha"]
    return stats.ReportConfig(**kwargs)


def build_report(session: Session, params: dict) -> stats.StatReport:
    return stats.generate_report(
        session.dataset,
        session.effective_selection(),
        report_config(params),
        session.active_clustering(),
    )


def _act_report(session: Session, params: dict) -> dict:
    report = build_report(session, params)
    return {"report": report.to_obj()}


_HANDLERS = {
    "load": _act_load,
    "synthetic": _act_synthetic,
    "substitute_aggregate": _act_substitute_aggregate,
    "align": _act_align,
    "sort": _act_sort,
    "cluster": _act_cluster,
    "import_labels": _act_import_labels,
    "select_query": _act_select_query,
    "select_ids": _act_select_ids,
    "select_combine": _act_select_combine,
    "reset_selection": _act_reset_selection,
    "undo": _act_undo,
    "build_eventbox": _act_build_eventbox,
    "breakdown": _act_breakdown,
    "merge": _act_merge,
    "report": _act_report,
}


# ---------------------------------------------------------------------------
# Summaries and panel payloads

def _dataset_summary(dataset: Dataset) -> dict:
    return {
        "version": dataset.version,
        "n_sequences": dataset.n_sequences,
        "n_events": dataset.n_events,
        "event_types": list(dataset.event_types),
        "provenance": list(dataset.provenance),
    }


def _view_summary(view: transforms.AlignedView) -> dict:
    return {
        "dataset_version": view.dataset_version,
        "column_count": view.column_count,
        "n_rows": len(view.rows),
        "anchor_columns": dict(sorted(view.anchor_columns.items())),
    }


def _cluster_summary(assignment: grouping.ClusterAssignment) -> dict:
    return {
        "k": assignment.k,
        "method": assignment.method,
        "sizes": dict(sorted(assignment.sizes.items())),
    }


def _selection_summary(selection: SelectionSet) -> dict:
    return {
        "n_sequences": len(selection.sequence_ids),
        "n_occurrences": len(selection.occurrence_ids),
        "origin": selection.origin,
        "dataset_version": selection.dataset_version,
    }


def session_state(session: Session) -> dict:
    state: dict = {"state_version": session.state_version, "session_id": session.session_id}
    if session.datasets:
        state["dataset"] = _dataset_summary(session.dataset)
        state["selection"] = (
            _selection_summary(session.selection) if session.selection else None
        )
        clustering = session.active_clustering()
        state["clusters"] = _cluster_summary(clustering) if clustering else None
        state["aligned_view"] = (
            _view_summary(session.aligned_view)
            if session.aligned_view is not None
            and session.aligned_view.dataset_version == session.dataset.version
            else None
        )
    else:
        state["dataset"] = None
    return state


def canonical_state(session: Session) -> str:
    """Deterministic serialization of the full session state for replay checks."""
    obj = {
        "dataset": dataset_to_obj(session.dataset) if session.datasets else None,
        "selection": {
            "sequence_ids": sorted(session.selection.sequence_ids),
            "occurrence_ids": sorted(session.selection.occurrence_ids),
        }
        if session.selection
        else None,
        "clusters": dict(sorted(session.active_clustering().labels.items()))
        if session.active_clustering()
        else None,
        "aligned_view": {
            "rows": [
                {"sequence_id": r.sequence_id, "cells": list(r.cells)}
                for r in session.aligned_view.rows
            ],
            "columns": session.aligned_view.column_count,
            "anchors": dict(sorted(session.aligned_view.anchor_columns.items())),
        }
        if session.aligned_view is not None
        else None,
    }
    return canonical_json(obj)


def panel_events(session: Session) -> dict:
    dataset = session.dataset
    selection = session.selection
    selected_occ = selection.occurrence_ids if selection else None
    totals: dict[str, int] = {}
    seq_with: dict[str, set] = {}
    selected: dict[str, int] = {}
    for ev, seq in dataset.iter_occurrences():
        totals[ev.event_type] = totals.get(ev.event_type, 0) + 1
        seq_with.setdefault(ev.event_type, set()).add(seq.id)
        if selected_occ is not None and ev.id in selected_occ:
            selected[ev.event_type] = selected.get(ev.event_type, 0) + 1
    total = dataset.n_events
    return {
        "total_events": total,
        "total_sequences": dataset.n_sequences,
        "event_types": [
            {
                "event_type": etype,
                "count": totals[etype],
                "proportion": totals[etype] / total,
                "n_sequences": len(seq_with[etype]),
                "selected_count": (
                    selected.get(etype, 0) if selected_occ is not None else totals[etype]
                ),
            }
            for etype in dataset.event_types
        ],
    }


def panel_clusters(session: Session) -> dict:
    clustering = session.active_clustering()
    if clustering is None:
        return {"clusters": None}
    dataset = session.dataset
    selection = session.selection
    selected_seq = selection.sequence_ids if selection else None
    by_label: dict[str, list] = {}
    for seq in dataset.sequences:
        by_label.setdefault(clustering.labels[seq.id], []).append(seq)
    out = []
    for label in sorted(by_label, key=lambda lab: (len(lab), lab)):
        members = by_label[label]
        sig_counts: dict = {}
        for seq in members:
            sig_counts[seq.signature] = sig_counts.get(seq.signature, 0) + 1
        top = sorted(sig_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:3]
        out.append(
            {
                "label": label,
                "n_sequences": len(members),
                "n_selected": (
                    sum(1 for s in members if s.id in selected_seq)
                    if selected_seq is not None
                    else len(members)
                ),
                "top_signatures": [
                    {"signature": list(sig), "count": count} for sig, count in top
                ],
            }
        )
    return {"clusters": out, "k": clustering.k, "method": clustering.method}


def panel_unique(session: Session) -> dict:
    dataset = session.dataset
    selection = session.selection
    selected_seq = selection.sequence_ids if selection else None
    uniques = grouping.unique_sequences(dataset)
    return {
        "uniques": [
            {
                "signature": list(u.signature),
                "count": u.count,
                "n_selected": (
                    len(u.member_ids & selected_seq)
                    if selected_seq is not None
                    else u.count
                ),
                "member_ids": sorted(u.member_ids),
            }
            for u in uniques
        ]
    }


def panel_individual(session: Session) -> dict:
    dataset = session.dataset
    selection = session.selection
    selected_seq = selection.sequence_ids if selection else None
    payload: dict = {
        "sequences": [
            {
                "id": seq.id,
                "signature": list(seq.signature),
                "n_events": len(seq.events),
                "selected": (seq.id in selected_seq) if selected_seq is not None else True,
            }
            for seq in dataset.sequences
        ]
    }
    view = session.aligned_view
    if view is not None and view.dataset_version == dataset.version:
        payload["aligned_view"] = {
            "column_count": view.column_count,
            "anchor_columns": dict(sorted(view.anchor_columns.items())),
            "rows": [
                {"sequence_id": r.sequence_id, "cells": list(r.cells)} for r in view.rows
            ],
        }
    return payload


def panel_attributes(session: Session) -> dict:
    """Stacked-bar data: categorical value counts for the selection vs all."""
    dataset = session.dataset
    selection = session.selection
    selected_occ = selection.occurrence_ids if selection else None
    names = [
        s.name for s in dataset.schema.attributes if s.kind == KIND_CATEGORICAL
    ] + ["day_of_week"]
    out = []
    for name in names:
        level = dataset.schema.level_of(name)
        totals: dict[str, int] = {}
        chosen: dict[str, int] = {}
        if level == LEVEL_SEQUENCE:
            selected_seq = selection.sequence_ids if selection else None
            for seq in dataset.sequences:
                v = seq.attrs.get(name)
                label = eb.MISSING_LABEL if v is None else str(v)
                totals[label] = totals.get(label, 0) + 1
                if selected_seq is None or seq.id in selected_seq:
                    chosen[label] = chosen.get(label, 0) + 1
        else:
            for ev, seq in dataset.iter_occurrences():
                v = resolve_on(dataset, ev, seq, name)
                label = eb.MISSING_LABEL if v is None else str(v)
                totals[label] = totals.get(label, 0) + 1
                if selected_occ is None or ev.id in selected_occ:
                    chosen[label] = chosen.get(label, 0) + 1
        order = eb.natural_category_order(totals, totals)
        total_n = sum(totals.values())
        selected_n = sum(chosen.values())
        out.append(
            {
                "name": name,
                "level": level,
                "values": [
                    {
                        "value": label,
                        "total_count": totals[label],
                        "selected_count": chosen.get(label, 0),
                        "total_fraction": totals[label] / total_n if total_n else 0.0,
                        "selected_fraction": (
                            chosen.get(label, 0) / selected_n if selected_n else 0.0
                        ),
                    }
                    for label in order
                ],
            }
        )
    return {"attributes": out}


PANELS = {
    "events": panel_events,
    "clusters": panel_clusters,
    "unique": panel_unique,
    "individual": panel_individual,
    "attributes": panel_attributes,
}

/** View models for the coordinated panels.
 *
 * Pure payload -> display-row functions; no statistics happen here, only
 * formatting and bar-length arithmetic on numbers the service already
 * computed.
 */

import type {
  AttributesPanelPayload,
  ClustersPanelPayload,
  EventsPanelPayload,
  UniquePanelPayload,
} from "./types.js";
import { colorForType } from "./eventboxView.js";

export interface EventRow {
  eventType: string;
  color: string;
  count: number;
  proportionLabel: string;
  nSequences: number;
  selectedCount: number;
  barFraction: number;
}

export function eventRows(payload: EventsPanelPayload): EventRow[] {
  const peak = Math.max(...payload.event_types.map((e) => e.count), 1);
  return payload.event_types.map((entry) => ({
    eventType: entry.event_type,
    color: colorForType(entry.event_type),
    count: entry.count,
    proportionLabel: `${(entry.proportion * 100).toFixed(1)}%`,
    nSequences: entry.n_sequences,
    selectedCount: entry.selected_count,
    barFraction: entry.count / peak,
  }));
}

export interface ClusterRow {
  label: string;
  size: number;
  selectedFraction: number;
  signatureLabel: string;
}

export function clusterRows(payload: ClustersPanelPayload): ClusterRow[] {
  if (!payload.clusters) return [];
  return payload.clusters.map((cluster) => ({
    label: cluster.label,
    size: cluster.n_sequences,
    selectedFraction: cluster.n_sequences
      ? cluster.n_selected / cluster.n_sequences
      : 0,
    signatureLabel: cluster.top_signatures
      .map((s) => `${s.signature.join("→")} (${s.count})`)
      .join(", "),
  }));
}

export interface UniqueRow {
  signatureLabel: string;
  count: number;
  selected: number;
  memberIds: string[];
}

export function uniqueRows(payload: UniquePanelPayload): UniqueRow[] {
  return payload.uniques.map((u) => ({
    signatureLabel: u.signature.join("→"),
    count: u.count,
    selected: u.n_selected,
    memberIds: u.member_ids,
  }));
}

export interface AttributeBarSegment {
  value: string;
  fraction: number; // of the bar being drawn
  count: number;
}

export interface AttributeBars {
  name: string;
  level: string;
  selectedBar: AttributeBarSegment[];
  totalBar: AttributeBarSegment[];
}

/**
 * Stacked bars comparing the selection against the whole dataset.
 * mode "relative" normalizes each bar to its own total; "absolute" scales the
 * selection bar against the dataset bar.
 */
export function attributeBars(
  payload: AttributesPanelPayload,
  mode: "absolute" | "relative",
): AttributeBars[] {
  return payload.attributes.map((attr) => {
    const totalN = attr.values.reduce((acc, v) => acc + v.total_count, 0) || 1;
    const selectedN = attr.values.reduce((acc, v) => acc + v.selected_count, 0) || 1;
    const denomSelected = mode === "relative" ? selectedN : totalN;
    return {
      name: attr.name,
      level: attr.level,
      selectedBar: attr.values.map((v) => ({
        value: v.value,
        count: v.selected_count,
        fraction: v.selected_count / denomSelected,
      })),
      totalBar: attr.values.map((v) => ({
        value: v.value,
        count: v.total_count,
        fraction: v.total_count / totalN,
      })),
    };
  });
}

/** Payload types mirroring the service's JSON responses. */

export interface FiveNumberSummary {
  min: number;
  q1: number;
  q2: number;
  q3: number;
  max: number;
  n: number;
}

export interface HistogramBar {
  label: string;
  total: number;
  stacks: Array<[string, number]>;
}

export interface HistogramPayload {
  axis: "h" | "v";
  kind: "numeric" | "categorical";
  edges: number[];
  bars: HistogramBar[];
  missing: number;
}

/** points rows are [occurrence_id, x, y, color_key] */
export type PointRow = [string, number, number | string, string | null];

export interface EventBoxPayload {
  event_type: string;
  n: number;
  occurrence_ids: string[];
  config: {
    p_h: string;
    p_v: string | null;
    s_h: string | null;
    s_v: string | null;
    b: string | null;
    bins_h: number;
    bins_v: number;
    show_outliers: boolean;
    whisker: number;
    top_k: number | null;
  };
  summary: FiveNumberSummary;
  fences: { lower: number; upper: number };
  outlier_ids: string[];
  points: PointRow[];
  hist_h: HistogramPayload;
  hist_v: HistogramPayload | null;
  container: { width: number; height: number };
  missing_counts: Record<string, number>;
  breakdown_value: string | null;
  density?: {
    cols: number;
    rows: number;
    counts: number[][];
    intensities: number[][];
  };
}

export interface EventTypeSummary {
  event_type: string;
  count: number;
  proportion: number;
  n_sequences: number;
  selected_count: number;
}

export interface EventsPanelPayload {
  state_version: number;
  total_events: number;
  total_sequences: number;
  event_types: EventTypeSummary[];
}

export interface ClusterSummary {
  label: string;
  n_sequences: number;
  n_selected: number;
  top_signatures: Array<{ signature: string[]; count: number }>;
}

export interface ClustersPanelPayload {
  state_version: number;
  clusters: ClusterSummary[] | null;
  k?: number;
  method?: string;
}

export interface UniquePanelPayload {
  state_version: number;
  uniques: Array<{
    signature: string[];
    count: number;
    n_selected: number;
    member_ids: string[];
  }>;
}

export interface AlignedViewPayload {
  column_count: number;
  anchor_columns: Record<string, number>;
  rows: Array<{ sequence_id: string; cells: Array<string | null> }>;
}

export interface IndividualPanelPayload {
  state_version: number;
  sequences: Array<{
    id: string;
    signature: string[];
    n_events: number;
    selected: boolean;
  }>;
  aligned_view?: AlignedViewPayload;
}

export interface AttributeValueRow {
  value: string;
  total_count: number;
  selected_count: number;
  total_fraction: number;
  selected_fraction: number;
}

export interface AttributesPanelPayload {
  state_version: number;
  attributes: Array<{
    name: string;
    level: string;
    values: AttributeValueRow[];
  }>;
}

export interface SessionState {
  state_version: number;
  session_id: string;
  dataset: {
    version: number;
    n_sequences: number;
    n_events: number;
    event_types: string[];
  } | null;
  selection?: {
    n_sequences: number;
    n_occurrences: number;
    origin: string;
  } | null;
  clusters?: { k: number; sizes: Record<string, number> } | null;
}

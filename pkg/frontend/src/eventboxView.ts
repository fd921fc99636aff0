/** EventBox rendering geometry.
 *
 * Everything here is a pure function of the service payload: the UI computes
 * layout only, never statistics. Horizontal positions are affine images of
 * payload values, x = value * drawnWidth / axisMax, where axisMax is the
 * container width (or the upper fence when outliers are hidden).
 */

import type { EventBoxPayload, HistogramPayload, PointRow } from "./types.js";

export const TYPE_PALETTE = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];
export const STACK_PALETTE = [
  "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
  "#e6ab02", "#a6761d", "#666666", "#80b1d3", "#fb8072",
  "#b3de69", "#fccde5",
];
const BAND_FILLS = ["#ffffff", "#c6dbef", "#9ecae1", "#c6dbef", "#ffffff"];
const OUTLIER_FILL = "#d9d9d9";

export interface LayoutOptions {
  width: number; // drawn plot width in px
  maxHeight: number; // cap on container height in px
  histH: number; // horizontal-histogram strip height
  histVWidth: number; // vertical-histogram strip width
}

export const DEFAULT_LAYOUT: LayoutOptions = {
  width: 640,
  maxHeight: 320,
  histH: 80,
  histVWidth: 80,
};

export interface QuartileLine {
  value: number;
  x: number;
  kind: "min" | "q1" | "q2" | "q3" | "max";
}

export interface Band {
  x0: number;
  x1: number;
  fill: string;
}

export interface PointMark {
  id: string;
  cx: number;
  cy: number;
  color: string;
  outlier: boolean;
}

export interface BarSegment {
  x: number;
  y: number;
  w: number;
  h: number;
  color: string;
  key: string;
  barLabel: string;
}

export interface EventBoxLayout {
  axisMax: number; // value mapped to the right edge
  plotWidth: number;
  plotHeight: number;
  typeColor: string;
  quartiles: QuartileLine[];
  bands: Band[];
  points: PointMark[];
  histH: BarSegment[];
  histV: BarSegment[];
  colorOf: Map<string, string>;
}

export function colorForType(eventType: string): string {
  let total = 0;
  for (let i = 0; i < eventType.length; i++) total += eventType.charCodeAt(i);
  return TYPE_PALETTE[total % TYPE_PALETTE.length];
}

function stackColors(keys: string[]): Map<string, string> {
  const sorted = [...keys].sort();
  return new Map(sorted.map((k, i) => [k, STACK_PALETTE[i % STACK_PALETTE.length]]));
}

/** Scale a payload value to a horizontal pixel offset. */
export function xScale(value: number, axisMax: number, plotWidth: number): number {
  if (axisMax <= 0) return 0;
  return (Math.min(Math.max(value, 0), axisMax) / axisMax) * plotWidth;
}

export function computeLayout(
  payload: EventBoxPayload,
  options: LayoutOptions = DEFAULT_LAYOUT,
): EventBoxLayout {
  const show = payload.config.show_outliers;
  // hidden outliers truncate the horizontal extent at the upper fence
  const axisMax = show
    ? payload.container.width
    : Math.min(payload.container.width, Math.max(payload.fences.upper, payload.summary.q3));
  const plotWidth = options.width;
  const plotHeight = Math.max(24, Math.min(payload.container.height, options.maxHeight));
  const sx = (v: number) => xScale(v, axisMax, plotWidth);

  const summary = payload.summary;
  const quartiles: QuartileLine[] = (
    [
      ["min", summary.min],
      ["q1", summary.q1],
      ["q2", summary.q2],
      ["q3", summary.q3],
      ["max", summary.max],
    ] as Array<[QuartileLine["kind"], number]>
  )
    .filter(([, value]) => show || value <= axisMax)
    .map(([kind, value]) => ({ kind, value, x: sx(value) }));

  const hasOutliers = payload.outlier_ids.length > 0;
  const bands: Band[] = [];
  const qs = [summary.min, summary.q1, summary.q2, summary.q3, summary.max];
  for (let i = 0; i < 4; i++) {
    const a = hasOutliers ? Math.max(qs[i], payload.fences.lower) : qs[i];
    const b = Math.min(hasOutliers ? Math.min(qs[i + 1], payload.fences.upper) : qs[i + 1], axisMax);
    if (b > a) bands.push({ x0: sx(a), x1: sx(b), fill: BAND_FILLS[i + 1] });
  }
  if (hasOutliers && show) {
    if (summary.min < payload.fences.lower) {
      bands.push({ x0: sx(summary.min), x1: sx(payload.fences.lower), fill: OUTLIER_FILL });
    }
    if (summary.max > payload.fences.upper) {
      bands.push({ x0: sx(payload.fences.upper), x1: sx(summary.max), fill: OUTLIER_FILL });
    }
  }

  const outliers = new Set(payload.outlier_ids);
  const numericYs = payload.points
    .map((p) => p[2])
    .filter((y): y is number => typeof y === "number");
  const yLo = numericYs.length ? Math.min(...numericYs) : 0;
  const yHi = numericYs.length ? Math.max(...numericYs) : 1;
  const categories: string[] = [];
  for (const p of payload.points) {
    if (typeof p[2] === "string" && !categories.includes(p[2])) categories.push(p[2]);
  }
  const colorKeys = [
    ...new Set(payload.points.map((p) => p[3]).filter((k): k is string => k !== null)),
  ];
  const colorOf = stackColors(colorKeys);

  const points: PointMark[] = [];
  for (const [id, x, y, key] of payload.points as PointRow[]) {
    const isOutlier = outliers.has(id);
    if (isOutlier && !show) continue; // hidden outliers are not drawn
    let frac: number;
    if (typeof y === "string") {
      frac = (categories.indexOf(y) + 0.5) / Math.max(categories.length, 1);
    } else if (yHi > yLo) {
      frac = (y - yLo) / (yHi - yLo); // vertical axis runs top to bottom
    } else {
      frac = 0.5;
    }
    points.push({
      id,
      cx: sx(x),
      cy: frac * plotHeight,
      color: key !== null ? colorOf.get(key) ?? "#444444" : "#444444",
      outlier: isOutlier,
    });
  }

  return {
    axisMax,
    plotWidth,
    plotHeight,
    typeColor: colorForType(payload.event_type),
    quartiles,
    bands,
    points,
    histH: layoutHistH(payload.hist_h, axisMax, plotWidth, options.histH),
    histV: payload.hist_v
      ? layoutHistV(payload.hist_v, plotHeight, options.histVWidth)
      : [],
    colorOf,
  };
}

function layoutHistH(
  hist: HistogramPayload,
  axisMax: number,
  plotWidth: number,
  stripHeight: number,
): BarSegment[] {
  const bars = hist.bars;
  if (!bars.length) return [];
  const peak = Math.max(...bars.map((b) => b.total), 1);
  const keys = [...new Set(bars.flatMap((b) => b.stacks.map(([k]) => k)))];
  const colors = stackColors(keys);
  const segments: BarSegment[] = [];
  bars.forEach((bar, i) => {
    let xa: number;
    let xb: number;
    if (hist.kind === "numeric" && hist.edges.length === bars.length + 1) {
      xa = xScale(hist.edges[i], axisMax, plotWidth);
      xb = xScale(hist.edges[i + 1], axisMax, plotWidth);
    } else {
      xa = (i / bars.length) * plotWidth;
      xb = ((i + 1) / bars.length) * plotWidth;
    }
    if (xb - xa <= 0) return;
    const pieces: Array<[string, number]> = bar.stacks.length
      ? bar.stacks
      : bar.total
        ? [["", bar.total]]
        : [];
    let top = stripHeight;
    for (const [key, count] of pieces) {
      const h = (count / peak) * stripHeight;
      segments.push({
        x: xa + 1,
        y: top - h,
        w: Math.max(xb - xa - 2, 1),
        h,
        color: key ? colors.get(key) ?? "#888888" : "#888888",
        key,
        barLabel: bar.label,
      });
      top -= h;
    }
  });
  return segments;
}

function layoutHistV(
  hist: HistogramPayload,
  plotHeight: number,
  stripWidth: number,
): BarSegment[] {
  const bars = hist.bars;
  if (!bars.length) return [];
  const peak = Math.max(...bars.map((b) => b.total), 1);
  const keys = [...new Set(bars.flatMap((b) => b.stacks.map(([k]) => k)))];
  const colors = stackColors(keys);
  const segments: BarSegment[] = [];
  bars.forEach((bar, i) => {
    const ya = (i / bars.length) * plotHeight;
    const yb = ((i + 1) / bars.length) * plotHeight;
    const pieces: Array<[string, number]> = bar.stacks.length
      ? bar.stacks
      : bar.total
        ? [["", bar.total]]
        : [];
    let right = stripWidth;
    for (const [key, count] of pieces) {
      const w = (count / peak) * stripWidth;
      segments.push({
        x: right - w,
        y: ya + 1,
        w,
        h: Math.max(yb - ya - 2, 1),
        color: key ? colors.get(key) ?? "#888888" : "#888888",
        key,
        barLabel: bar.label,
      });
      right -= w;
    }
  });
  return segments;
}

const fmt = (v: number) => v.toFixed(2);

/** Render the layout to an SVG string (framework-free, snapshot-testable). */
export function renderSvg(
  payload: EventBoxPayload,
  options: LayoutOptions = DEFAULT_LAYOUT,
): string {
  const layout = computeLayout(payload, options);
  const margin = 36;
  const x0 = margin + options.histVWidth + 10;
  const y0 = margin + options.histH + 10;
  const totalW = x0 + layout.plotWidth + margin;
  const totalH = y0 + layout.plotHeight + margin;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${fmt(totalW)}" height="${fmt(totalH)}" viewBox="0 0 ${fmt(totalW)} ${fmt(totalH)}">`,
    `<text x="${fmt(x0)}" y="${fmt(margin - 12)}" font-family="sans-serif" font-size="13" fill="#333">${escapeXml(payload.event_type)} (n=${payload.n})</text>`,
  ];
  for (const band of layout.bands) {
    parts.push(
      `<rect class="band" x="${fmt(x0 + band.x0)}" y="${fmt(y0)}" width="${fmt(band.x1 - band.x0)}" height="${fmt(layout.plotHeight)}" fill="${band.fill}"/>`,
    );
  }
  parts.push(
    `<rect class="container" x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(layout.plotWidth)}" height="${fmt(layout.plotHeight)}" fill="none" stroke="${layout.typeColor}" stroke-width="2"/>`,
  );
  for (const line of layout.quartiles) {
    parts.push(
      `<line class="quartile quartile-${line.kind}" x1="${fmt(x0 + line.x)}" y1="${fmt(y0)}" x2="${fmt(x0 + line.x)}" y2="${fmt(y0 + layout.plotHeight)}" stroke="#555" stroke-width="1.5"/>`,
    );
  }
  for (const seg of layout.histH) {
    parts.push(
      `<rect class="hist-h" data-bar="${escapeXml(seg.barLabel)}" x="${fmt(x0 + seg.x)}" y="${fmt(margin + seg.y)}" width="${fmt(seg.w)}" height="${fmt(seg.h)}" fill="${seg.color}"/>`,
    );
  }
  for (const seg of layout.histV) {
    parts.push(
      `<rect class="hist-v" data-bar="${escapeXml(seg.barLabel)}" x="${fmt(margin + seg.x)}" y="${fmt(y0 + seg.y)}" width="${fmt(seg.w)}" height="${fmt(seg.h)}" fill="${seg.color}"/>`,
    );
  }
  for (const point of layout.points) {
    parts.push(
      `<circle class="point${point.outlier ? " outlier" : ""}" data-id="${escapeXml(point.id)}" cx="${fmt(x0 + point.cx)}" cy="${fmt(y0 + point.cy)}" r="2.5" fill="${point.color}" fill-opacity="0.7"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

/** Occurrence ids whose point lands inside a histogram bar, for bar clicks. */
export function barOccurrences(
  payload: EventBoxPayload,
  axis: "h" | "v",
  barIndex: number,
): string[] {
  const hist = axis === "h" ? payload.hist_h : payload.hist_v;
  if (!hist || barIndex < 0 || barIndex >= hist.bars.length) return [];
  const ids: string[] = [];
  if (hist.kind === "numeric" && hist.edges.length === hist.bars.length + 1) {
    const lo = hist.edges[barIndex];
    const hi = hist.edges[barIndex + 1];
    const last = barIndex === hist.bars.length - 1;
    for (const [id, x, y] of payload.points) {
      const v = axis === "h" ? x : y;
      if (typeof v !== "number") continue;
      if ((v >= lo || (barIndex === 0 && v < lo)) && (v < hi || (last && v <= hi))) {
        ids.push(id);
      }
    }
  } else {
    const label = hist.bars[barIndex].label;
    for (const [id, , y] of payload.points) {
      if (axis === "v" && String(y) === label) ids.push(id);
    }
  }
  return ids;
}

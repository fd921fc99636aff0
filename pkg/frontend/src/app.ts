/** DOM wiring for the coordinated panels.
 *
 * All data comes from service payloads; a panel never renders a payload whose
 * state_version is older than the latest one seen. At most one mutating
 * action is in flight at a time, and every completed mutation triggers a full
 * panel refresh.
 */

import { ApiClient, ApiError } from "./api.js";
import { barOccurrences, renderSvg } from "./eventboxView.js";
import { lassoSelect, type Vertex } from "./lasso.js";
import { attributeBars, clusterRows, eventRows, uniqueRows } from "./panels.js";
import type { EventBoxPayload } from "./types.js";

const api = new ApiClient("");

interface PanelState {
  stateVersion: number;
  eventType: string | null;
  breakdown: string | null;
  showOutliers: boolean;
  attributeMode: "absolute" | "relative";
  box: EventBoxPayload | null;
  mutating: boolean;
}

const state: PanelState = {
  stateVersion: -1,
  eventType: null,
  breakdown: null,
  showOutliers: true,
  attributeMode: "absolute",
  box: null,
  mutating: false,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string, isError = false) {
  const node = el("status");
  node.textContent = text;
  node.className = isError ? "error" : "";
}

/** Run one mutating action; refuses to overlap in-flight mutations. */
async function mutate(action: string, params: Record<string, unknown> = {}) {
  if (state.mutating) return;
  state.mutating = true;
  setStatus(`${action}...`);
  try {
    const out = await api.action(action, params, state.stateVersion);
    state.stateVersion = out.state_version;
    setStatus(`${action} ok (v${out.state_version})`);
    await refreshAll();
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      // someone else moved the session; re-sync and retry is the user's call
      await refreshAll();
    }
    setStatus(String(error), true);
  } finally {
    state.mutating = false;
  }
}

async function refreshAll() {
  const snapshot = await api.state();
  state.stateVersion = snapshot.state_version;
  if (!snapshot.dataset) return;
  el("dataset-info").textContent =
    `${snapshot.dataset.n_sequences} sequences, ${snapshot.dataset.n_events} events` +
    (snapshot.selection
      ? ` | selected: ${snapshot.selection.n_sequences} seq / ${snapshot.selection.n_occurrences} occ (${snapshot.selection.origin})`
      : " | no selection (everything)");
  if (!state.eventType && snapshot.dataset.event_types.length) {
    state.eventType = snapshot.dataset.event_types[0];
  }
  await Promise.all([
    renderEvents(),
    renderClusters(),
    renderUnique(),
    renderIndividual(),
    renderAttributes(),
    renderEventBox(),
  ]);
}

function guard<T extends { state_version: number }>(payload: T): T | null {
  // never render stale data
  return payload.state_version === state.stateVersion ? payload : null;
}

async function renderEvents() {
  const payload = guard(await api.panel("events"));
  if (!payload) return;
  const rows = eventRows(payload);
  const host = el("events-panel");
  host.innerHTML = `<h3>Events (${payload.total_events})</h3>`;
  for (const row of rows) {
    const div = document.createElement("div");
    div.className = "row clickable" + (row.eventType === state.eventType ? " active" : "");
    div.innerHTML =
      `<span class="swatch" style="background:${row.color}"></span>` +
      `<span class="grow">${row.eventType}</span>` +
      `<span>${row.count} (${row.proportionLabel}) in ${row.nSequences} seq</span>` +
      `<span class="bar" style="width:${(row.barFraction * 90).toFixed(0)}px;background:${row.color}"></span>`;
    div.onclick = () => {
      state.eventType = row.eventType;
      void renderEventBox();
      void renderEvents();
    };
    host.appendChild(div);
  }
}

async function renderClusters() {
  const payload = guard(await api.panel("clusters"));
  if (!payload) return;
  const host = el("clusters-panel");
  if (!payload.clusters) {
    host.innerHTML = `<h3>Clusters</h3><div class="hint">run clustering
      <button id="cluster-btn">cluster signatures (k=8)</button></div>`;
    el("cluster-btn").onclick = () => void mutate("cluster", { k: 8 });
    return;
  }
  host.innerHTML = "<h3>Clusters</h3>";
  for (const row of clusterRows(payload)) {
    const div = document.createElement("div");
    div.className = "row clickable";
    div.innerHTML =
      `<span class="grow"><b>${row.label}</b> (${row.size})</span>` +
      `<span class="hint">${row.signatureLabel}</span>` +
      `<span class="bar" style="width:${(row.selectedFraction * 70).toFixed(0)}px;background:#4e79a7"></span>`;
    div.onclick = () => void mutate("select_query", { query: `Cluster ID = ${row.label}` });
    host.appendChild(div);
  }
}

async function renderUnique() {
  const payload = guard(await api.panel("unique"));
  if (!payload) return;
  const host = el("unique-panel");
  host.innerHTML = "<h3>Unique sequences</h3>";
  for (const row of uniqueRows(payload).slice(0, 40)) {
    const div = document.createElement("div");
    div.className = "row clickable";
    div.innerHTML =
      `<span class="grow mono">${row.signatureLabel}</span>` +
      `<span>${row.selected}/${row.count}</span>`;
    div.onclick = () => void mutate("select_ids", { sequence_ids: row.memberIds });
    host.appendChild(div);
  }
}

async function renderIndividual() {
  const payload = guard(await api.panel("individual"));
  if (!payload) return;
  const host = el("individual-panel");
  host.innerHTML = "<h3>Individual sequences</h3>";
  const view = payload.aligned_view;
  const rows = payload.sequences.slice(0, 60);
  if (view) {
    const byId = new Map(view.rows.map((r) => [r.sequence_id, r.cells]));
    for (const seq of rows) {
      const cells = byId.get(seq.id) ?? [];
      const div = document.createElement("div");
      div.className = "row mono" + (seq.selected ? " selected" : "");
      div.textContent = `${seq.id}  ${cells.map((c) => (c === null ? "·" : "■")).join("")}`;
      host.appendChild(div);
    }
  } else {
    for (const seq of rows) {
      const div = document.createElement("div");
      div.className = "row mono" + (seq.selected ? " selected" : "");
      div.textContent = `${seq.id}  ${seq.signature.join("→")}`;
      host.appendChild(div);
    }
  }
}

async function renderAttributes() {
  const payload = guard(await api.panel("attributes"));
  if (!payload) return;
  const host = el("attributes-panel");
  host.innerHTML =
    `<h3>Attribute analysis <button id="attr-mode">${state.attributeMode}</button></h3>`;
  el("attr-mode").onclick = () => {
    state.attributeMode = state.attributeMode === "absolute" ? "relative" : "absolute";
    void renderAttributes();
  };
  for (const attr of attributeBars(payload, state.attributeMode)) {
    const div = document.createElement("div");
    div.className = "attr";
    const bar = (segments: typeof attr.totalBar, label: string) =>
      `<div class="stack-label">${label}</div><div class="stack">` +
      segments
        .map(
          (s, i) =>
            `<span title="${attr.name}=${s.value}: ${s.count}" style="width:${(s.fraction * 240).toFixed(1)}px;background:${["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f"][i % 8]}"></span>`,
        )
        .join("") +
      "</div>";
    div.innerHTML =
      `<div><b>${attr.name}</b> <span class="hint">(${attr.level})</span></div>` +
      bar(attr.selectedBar, "selection") +
      bar(attr.totalBar, "all");
    div.querySelectorAll<HTMLSpanElement>(".stack span").forEach((span, idx) => {
      const values = [...attr.selectedBar, ...attr.totalBar];
      const value = values[idx % attr.selectedBar.length]?.value;
      span.onclick = () => {
        if (value !== undefined) {
          void mutate("select_query", { query: `${quoteIdent(attr.name)} = '${value}'` });
        }
      };
    });
    host.appendChild(div);
  }
}

function quoteIdent(name: string): string {
  return /^[A-Za-z_][A-Za-z0-9_]*$/.test(name) ? name : `"${name}"`;
}

async function renderEventBox() {
  if (!state.eventType) return;
  const params: Record<string, string | number | boolean> = {
    event_type: state.eventType,
    show_outliers: state.showOutliers,
  };
  const breakdownAttr = (el<HTMLSelectElement>("breakdown-select")).value;
  const host = el("eventbox-panel");
  try {
    if (breakdownAttr) {
      const out = await api.action<{ eventboxes: EventBoxPayload[] }>("breakdown", {
        ...params,
        b: breakdownAttr,
      });
      if (out.state_version !== state.stateVersion) return;
      state.box = null;
      host.innerHTML = "";
      for (const child of out.eventboxes) {
        const cell = document.createElement("div");
        cell.className = "breakdown-cell";
        cell.innerHTML =
          `<div class="hint">${breakdownAttr} = ${child.breakdown_value}</div>` +
          renderSvg(child, { width: 400, maxHeight: 90, histH: 36, histVWidth: 36 });
        host.appendChild(cell);
      }
      return;
    }
    const out = await api.eventbox(params);
    if (out.state_version !== state.stateVersion) return;
    state.box = out.eventbox;
    host.innerHTML = renderSvg(out.eventbox);
    wireEventBoxInteractions(host, out.eventbox);
  } catch (error) {
    host.innerHTML = `<div class="error">${String(error)}</div>`;
  }
}

function wireEventBoxInteractions(host: HTMLElement, box: EventBoxPayload) {
  const svg = host.querySelector("svg");
  if (!svg) return;
  // histogram bar clicks select the points the bar represents
  svg.querySelectorAll<SVGRectElement>("rect.hist-h").forEach((rect) => {
    rect.style.cursor = "pointer";
    rect.addEventListener("click", () => {
      const label = rect.getAttribute("data-bar") ?? "";
      const index = box.hist_h.bars.findIndex((b) => b.label === label);
      const ids = barOccurrences(box, "h", index);
      if (ids.length) void mutate("select_ids", { occurrence_ids: ids });
    });
  });
  // freehand lasso over the scatter points
  let polygon: Vertex[] = [];
  let drawing = false;
  svg.addEventListener("pointerdown", (event) => {
    drawing = true;
    polygon = [svgPoint(svg, event)];
  });
  svg.addEventListener("pointermove", (event) => {
    if (drawing) polygon.push(svgPoint(svg, event));
  });
  svg.addEventListener("pointerup", () => {
    drawing = false;
    if (polygon.length < 3) return;
    const marks = [...svg.querySelectorAll<SVGCircleElement>("circle.point")].map(
      (c): [string, number, number] => [
        c.getAttribute("data-id") ?? "",
        Number(c.getAttribute("cx")),
        Number(c.getAttribute("cy")),
      ],
    );
    const ids = [...lassoSelect(marks, polygon)];
    if (ids.length) void mutate("select_ids", { occurrence_ids: ids });
  });
}

function svgPoint(svg: SVGSVGElement, event: PointerEvent): Vertex {
  const rect = svg.getBoundingClientRect();
  return [event.clientX - rect.left, event.clientY - rect.top];
}

async function showReport() {
  el("report-panel").textContent = await api.reportMarkdown();
}

async function boot() {
  await api.createSession();
  el("load-btn").onclick = () =>
    void mutate("synthetic", {
      n_sequences: 400,
      seed: 7,
      planted_effects: [{ day_of_week: "Mon", multiplier: 1.3 }],
    });
  el("report-btn").onclick = () => void showReport();
  el<HTMLInputElement>("outliers-toggle").onchange = (event) => {
    state.showOutliers = (event.target as HTMLInputElement).checked;
    void renderEventBox();
  };
  el<HTMLSelectElement>("breakdown-select").onchange = () => void renderEventBox();
  el("query-form").onsubmit = (event) => {
    event.preventDefault();
    const text = el<HTMLInputElement>("query-input").value.trim();
    if (text) void mutate("select_query", { query: text });
  };
  el("reset-btn").onclick = () => void mutate("reset_selection");
  // state_version polling keeps panels coordinated even across tabs
  setInterval(async () => {
    if (state.mutating || !api.sessionId) return;
    try {
      const snapshot = await api.state();
      if (snapshot.state_version !== state.stateVersion) await refreshAll();
    } catch {
      /* service not up yet */
    }
  }, 1500);
  setStatus("ready; load a dataset");
}

if (typeof document !== "undefined") {
  void boot();
}

/** Thin typed client for the session HTTP API. */

import type {
  AttributesPanelPayload,
  ClustersPanelPayload,
  EventBoxPayload,
  EventsPanelPayload,
  IndividualPanelPayload,
  SessionState,
  UniquePanelPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    public sessionId: string | null = null,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload.error ?? "HTTPError", payload.detail ?? "");
    }
    return payload as T;
  }

  async createSession(): Promise<string> {
    const out = await this.request<{ session_id: string }>("POST", "/sessions", {});
    this.sessionId = out.session_id;
    return out.session_id;
  }

  /** Every user gesture funnels through exactly one action call. */
  action<T = Record<string, unknown>>(
    action: string,
    params: Record<string, unknown> = {},
    expectedStateVersion?: number,
  ): Promise<T & { state_version: number }> {
    return this.request("POST", `/sessions/${this.sessionId}/actions`, {
      action,
      params,
      expected_state_version: expectedStateVersion,
    });
  }

  state(): Promise<SessionState> {
    return this.request("GET", `/sessions/${this.sessionId}/state`);
  }

  eventbox(params: Record<string, string | number | boolean>): Promise<{
    eventbox: EventBoxPayload;
    state_version: number;
  }> {
    const query = new URLSearchParams(
      Object.entries(params).map(([k, v]) => [k, String(v)]),
    );
    return this.request("GET", `/sessions/${this.sessionId}/eventbox?${query}`);
  }

  panel(name: "events"): Promise<EventsPanelPayload>;
  panel(name: "clusters"): Promise<ClustersPanelPayload>;
  panel(name: "unique"): Promise<UniquePanelPayload>;
  panel(name: "individual"): Promise<IndividualPanelPayload>;
  panel(name: "attributes"): Promise<AttributesPanelPayload>;
  panel(name: string): Promise<unknown> {
    return this.request("GET", `/sessions/${this.sessionId}/panels/${name}`);
  }

  reportMarkdown(): Promise<string> {
    return fetch(`${this.base}/sessions/${this.sessionId}/report?format=md`).then((r) =>
      r.text(),
    );
  }
}

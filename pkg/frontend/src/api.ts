// Thin JSON client for the session service; every method returns parsed
// payloads and throws ApiError with the server's machine-readable detail.

import type { RunPayload, SessionRecord } from "./types";

export class ApiError extends Error {
  status: number;
  detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface RunRequestBody {
  instruction: string;
  seed?: number;
  controller?: string;
  mc_budget?: number;
  overrides?: Record<string, unknown>;
}

export class ServiceClient {
  baseUrl: string;
  fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      throw new ApiError(resp.status, body?.detail ?? body);
    }
    return body as T;
  }

  createSession(): Promise<{ session_id: string }> {
    return this.request("/sessions", { method: "POST" });
  }

  getSession(sid: string): Promise<SessionRecord> {
    return this.request(`/sessions/${sid}`);
  }

  submitRun(sid: string, body: RunRequestBody): Promise<{ run_id: string }> {
    return this.request(`/sessions/${sid}/runs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getRun(sid: string, rid: string): Promise<RunPayload> {
    return this.request(`/sessions/${sid}/runs/${rid}`);
  }
}

/** Thin typed client for the staging service.  Every UI fact comes from
 * these payloads; the client never recomputes dialog behavior. */

import type {
  ArtifactsPayload, DialogSummary, Engine, Outcome, RejectedValue,
  SessionView,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

/** A respond() that was rejected with 422; the session did not advance. */
export class ValueRejected extends Error {
  constructor(readonly payload: RejectedValue) {
    super(payload.error);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(this.base + path, init);
    } catch (e) {
      throw new ServiceError(0, `service unreachable: ${e}`);
    }
    const body = await res.json().catch(() => ({}));
    if (res.status === 422) throw new ValueRejected(body as RejectedValue);
    if (!res.ok) {
      throw new ServiceError(res.status, (body as { error?: string }).error
        ?? `request failed with ${res.status}`);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request("/healthz");
  }

  async listDialogs(): Promise<DialogSummary[]> {
    const body = await this.request<{ dialogs: DialogSummary[] }>("/dialogs");
    return body.dialogs;
  }

  registerDialog(source: string): Promise<DialogSummary> {
    return this.post("/dialogs", { source });
  }

  createSession(dialogId: string, engine: Engine): Promise<SessionView> {
    return this.post<{ session_id: string; outcome: Outcome }>(
      "/sessions", { dialog_id: dialogId, engine },
    ).then((r) => ({
      session_id: r.session_id, engine, transcript: [], outcome: r.outcome,
    }));
  }

  async respond(sessionId: string, engine: Engine, value: string): Promise<SessionView> {
    const r = await this.post<{
      session_id: string; transcript: [string, string][]; outcome: Outcome;
    }>(`/sessions/${sessionId}/responses`, { value });
    return { session_id: r.session_id, engine, transcript: r.transcript,
             outcome: r.outcome };
  }

  artifacts(dialogId: string): Promise<ArtifactsPayload> {
    return this.request(`/dialogs/${dialogId}/artifacts`);
  }
}

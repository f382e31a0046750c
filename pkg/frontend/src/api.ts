import type {
  AnswerPayload,
  CreateSessionBody,
  GateId,
  RecordExport,
  SessionView,
} from "./types.js";

/** Non-2xx response from the session API; `detail` is the server's message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = typeof body?.detail === "string" ? body.detail : `HTTP ${response.status}`;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export class SessionApi {
  constructor(readonly baseUrl: string) {}

  health(): Promise<{ status: string }> {
    return request(`${this.baseUrl}/health`);
  }

  listSessions(): Promise<SessionView[]> {
    return request(`${this.baseUrl}/sessions`);
  }

  createSession(body: CreateSessionBody): Promise<SessionView> {
    return request(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return request(`${this.baseUrl}/sessions/${id}`);
  }

  submitAnswer(id: string, gate: GateId, answer: AnswerPayload): Promise<SessionView> {
    return request(`${this.baseUrl}/sessions/${id}/answers`, {
      method: "POST",
      body: JSON.stringify({ gate, answer }),
    });
  }

  exportRecord(id: string): Promise<RecordExport> {
    return request(`${this.baseUrl}/sessions/${id}/record`);
  }

  fork(id: string, upTo: GateId, title?: string): Promise<SessionView> {
    return request(`${this.baseUrl}/sessions/${id}/fork`, {
      method: "POST",
      body: JSON.stringify(title === undefined ? { up_to: upTo } : { up_to: upTo, title }),
    });
  }
}

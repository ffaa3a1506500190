import {
  CategoryCount,
  SessionCreated,
  SessionLog,
  SessionState,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, "network_error", String(err));
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(
        response.status,
        (body as { code?: string }).code ?? "error",
        (body as { message?: string }).message ?? response.statusText,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload ?? {}),
    });
  }

  createSession(body: { dataset?: string; mode?: string } = {}): Promise<SessionCreated> {
    return this.post("/sessions", body);
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request(`/sessions/${sessionId}`);
  }

  next(sessionId: string): Promise<SessionState> {
    return this.post(`/sessions/${sessionId}/next`);
  }

  teach(sessionId: string, label: string): Promise<SessionState> {
    return this.post(`/sessions/${sessionId}/teach`, { label });
  }

  correct(sessionId: string, label: string): Promise<SessionState> {
    return this.post(`/sessions/${sessionId}/correct`, { label });
  }

  categories(sessionId: string): Promise<CategoryCount[]> {
    return this.request(`/sessions/${sessionId}/categories`);
  }

  log(sessionId: string): Promise<SessionLog> {
    return this.request(`/sessions/${sessionId}/log`);
  }
}

import type { EvidenceItemInput, QueuePayload, SessionView } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin api-v1 client. The fetch function is injectable so tests replay
 * recorded payloads without a network. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message = typeof body.error === "string" ? body.error : response.statusText;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  getQueue(): Promise<QueuePayload> {
    return this.request<QueuePayload>("/cases");
  }

  getSession(caseId: string): Promise<SessionView> {
    return this.request<SessionView>(`/cases/${encodeURIComponent(caseId)}`);
  }

  submitEvidence(caseId: string, items: EvidenceItemInput[]): Promise<SessionView> {
    return this.request<SessionView>(`/cases/${encodeURIComponent(caseId)}/evidence`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ evidence_items: items }),
    });
  }
}

import type {
  DashboardPayload,
  NextResponse,
  RankingReport,
  SessionInfo,
  SubmitPayload,
  SubmitResponse,
} from "./types";

export function tokenFromUrl(search: string = window.location.search): string | null {
  return new URLSearchParams(search).get("token");
}

async function request<T>(method: string, path: string, token: string, body?: unknown): Promise<T> {
  const response = await fetch(`${path}?token=${encodeURIComponent(token)}`, {
    method,
    headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
    body: body !== undefined ? JSON.stringify(body) : undefined,
  });
  if (!response.ok) {
    const detail = await response.text();
    throw new Error(`${method} ${path} failed (${response.status}): ${detail}`);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly token: string) {}

  session(): Promise<SessionInfo> {
    return request("GET", "/api/session", this.token);
  }

  nextItem(): Promise<NextResponse> {
    return request("GET", "/api/next", this.token);
  }

  submit(payload: SubmitPayload): Promise<SubmitResponse> {
    return request("POST", "/api/submit", this.token, payload);
  }

  dashboard(): Promise<DashboardPayload> {
    return request("GET", "/api/dashboard", this.token);
  }

  revealResults(): Promise<RankingReport> {
    return request("POST", "/api/results", this.token, {});
  }

  redistribute(fromUser: string, toUser: string, documents: number[]): Promise<unknown> {
    return request("POST", "/api/redistribute", this.token, {
      from_user: fromUser,
      to_user: toUser,
      documents,
    });
  }

  exportUrl(): string {
    return `/api/export?token=${encodeURIComponent(this.token)}`;
  }
}

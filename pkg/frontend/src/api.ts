// Thin client for the daemon's local /v1 API. The dashboard has no
// privileged channel: everything goes through these public routes.

import type { EventRecord, Mode, PeerInfo, ShareEntry, ShareResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(resp: Response): Promise<ApiError> {
  let code = `http_${resp.status}`;
  let message = resp.statusText;
  try {
    const body = await resp.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(resp.status, code, message);
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  async listShares(): Promise<ShareEntry[]> {
    return (await this.request<{ shares: ShareEntry[] }>("GET", "/v1/shares")).shares;
  }

  async createShare(path: string, mode: Mode): Promise<ShareResponse> {
    return this.request("POST", "/v1/shares", { path, mode });
  }

  async setMode(shareId: string, mode: Mode): Promise<ShareResponse> {
    return this.request("PATCH", `/v1/shares/${shareId}`, { mode });
  }

  async removeShare(shareId: string): Promise<ShareEntry> {
    const body = await this.request<{ share: ShareEntry }>(
      "DELETE",
      `/v1/shares/${shareId}?confirm=true`,
    );
    return body.share;
  }

  async listPeers(): Promise<PeerInfo[]> {
    return (await this.request<{ peers: PeerInfo[] }>("GET", "/v1/peers")).peers;
  }

  async listEvents(since: number, limit?: number): Promise<EventRecord[]> {
    const query = limit === undefined ? `since=${since}` : `since=${since}&limit=${limit}`;
    return (await this.request<{ events: EventRecord[] }>("GET", `/v1/events?${query}`)).events;
  }
}

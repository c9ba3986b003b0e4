/** Thin client for the detection service's JSON API. */

import type { DetectResponse, ModelInfo, Settings } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let code = "http_error";
  let message = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
    else if (body.detail) message = JSON.stringify(body.detail);
  } catch {
    /* non-JSON error body; keep defaults */
  }
  throw new ApiError(resp.status, code, message);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    readonly token: string | null = null,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private headers(): HeadersInit {
    return this.token ? { Authorization: `Bearer ${this.token}` } : {};
  }

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      ...init,
      headers: { ...this.headers(), ...(init.headers ?? {}) },
    });
    await raiseForStatus(resp);
    return resp;
  }

  async getHealth(): Promise<{ status: string; uptime_s: number }> {
    return (await this.request("/api/health")).json();
  }

  async getModels(): Promise<ModelInfo[]> {
    return (await this.request("/api/models")).json();
  }

  async getSettings(): Promise<Settings> {
    return (await this.request("/api/settings")).json();
  }

  async putSettings(settings: Settings): Promise<Settings> {
    const resp = await this.request("/api/settings", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(settings),
    });
    return resp.json();
  }

  async detect(image: Blob, filename: string): Promise<DetectResponse> {
    const form = new FormData();
    form.append("image", image, filename);
    return (await this.request("/api/detect", { method: "POST", body: form })).json();
  }
}

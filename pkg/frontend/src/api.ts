// Thin typed client for the control API; every UI action is one call here.

import type {
  GridResponse,
  MetricsResponse,
  StateResponse,
  TxResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`api error ${status}`);
  }
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) throw new ApiError(resp.status, body);
    return body as T;
  }

  getGrid(): Promise<GridResponse> {
    return this.request<GridResponse>("/v1/grid");
  }

  step(): Promise<{ period: number; stepped_to: number }> {
    return this.request("/v1/step", { method: "POST" });
  }

  setMode(mode: "paused" | "auto", intervalSeconds?: number): Promise<unknown> {
    return this.request("/v1/mode", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ mode, interval_seconds: intervalSeconds }),
    });
  }

  submitTransaction(
    contract: string,
    op: string,
    args: Record<string, unknown>,
  ): Promise<TxResponse> {
    return this.request<TxResponse>("/v1/transactions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ contract, op, args }),
    });
  }

  getTransaction(txId: string): Promise<TxResponse> {
    return this.request<TxResponse>(`/v1/transactions/${encodeURIComponent(txId)}`);
  }

  readState(key: string, r = 1): Promise<StateResponse> {
    return this.request<StateResponse>(
      `/v1/state/${encodeURIComponent(key)}?r=${r}`,
    );
  }

  getMetrics(): Promise<MetricsResponse> {
    return this.request<MetricsResponse>("/v1/metrics");
  }

  /** Subscribe to server-sent events; returns an unsubscribe function. */
  subscribe(
    onEvent: (event: string, data: Record<string, unknown>) => void,
    onStateChange?: (connected: boolean) => void,
  ): () => void {
    const source = new EventSource(this.base + "/v1/events");
    const forward = (name: string) => (ev: MessageEvent) =>
      onEvent(name, safeParse(ev.data));
    for (const name of ["hello", "period", "tx_committed"]) {
      source.addEventListener(name, forward(name) as EventListener);
    }
    source.onopen = () => onStateChange?.(true);
    source.onerror = () => onStateChange?.(false); // EventSource retries itself
    return () => source.close();
  }
}

function safeParse(text: string): Record<string, unknown> {
  try {
    return JSON.parse(text);
  } catch {
    return {};
  }
}

// Thin typed client for the control API; every UI action is one call here.
export class ApiError extends Error {
    status;
    body;
    constructor(status, body) {
        super(`api error ${status}`);
        this.status = status;
        this.body = body;
    }
}
export class ApiClient {
    base;
    constructor(base = "") {
        this.base = base;
    }
    async request(path, init) {
        const resp = await fetch(this.base + path, init);
        const body = await resp.json().catch(() => null);
        if (!resp.ok)
            throw new ApiError(resp.status, body);
        return body;
    }
    getGrid() {
        return this.request("/v1/grid");
    }
    step() {
        return this.request("/v1/step", { method: "POST" });
    }
    setMode(mode, intervalSeconds) {
        return this.request("/v1/mode", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ mode, interval_seconds: intervalSeconds }),
        });
    }
    submitTransaction(contract, op, args) {
        return this.request("/v1/transactions", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ contract, op, args }),
        });
    }
    getTransaction(txId) {
        return this.request(`/v1/transactions/${encodeURIComponent(txId)}`);
    }
    readState(key, r = 1) {
        return this.request(`/v1/state/${encodeURIComponent(key)}?r=${r}`);
    }
    getMetrics() {
        return this.request("/v1/metrics");
    }
    /** Subscribe to server-sent events; returns an unsubscribe function. */
    subscribe(onEvent, onStateChange) {
        const source = new EventSource(this.base + "/v1/events");
        const forward = (name) => (ev) => onEvent(name, safeParse(ev.data));
        for (const name of ["hello", "period", "tx_committed"]) {
            source.addEventListener(name, forward(name));
        }
        source.onopen = () => onStateChange?.(true);
        source.onerror = () => onStateChange?.(false); // EventSource retries itself
        return () => source.close();
    }
}
function safeParse(text) {
    try {
        return JSON.parse(text);
    }
    catch {
        return {};
    }
}

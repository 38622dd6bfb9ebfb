/** Typed client for the dptuner session service. */
export class ApiError extends Error {
    constructor(status, detail) {
        super(`HTTP ${status}: ${detail}`);
        this.status = status;
    }
}
async function parseOrThrow(resp) {
    if (!resp.ok) {
        let detail = resp.statusText;
        try {
            const body = (await resp.json());
            if (body.detail)
                detail = body.detail;
        }
        catch {
            /* non-JSON error body */
        }
        throw new ApiError(resp.status, detail);
    }
    return (await resp.json());
}
export class ApiClient {
    constructor(base = "") {
        this.base = base;
    }
    listDatasets() {
        return fetch(`${this.base}/datasets`).then((r) => parseOrThrow(r));
    }
    createSession(body) {
        return fetch(`${this.base}/sessions`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        }).then((r) => parseOrThrow(r));
    }
    getSession(id) {
        return fetch(`${this.base}/sessions/${id}`).then((r) => parseOrThrow(r));
    }
    submitQuery(id, query) {
        return fetch(`${this.base}/sessions/${id}/queries`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(query),
        }).then((r) => parseOrThrow(r));
    }
    async closeSession(id) {
        const resp = await fetch(`${this.base}/sessions/${id}`, { method: "DELETE" });
        if (!resp.ok && resp.status !== 204) {
            throw new ApiError(resp.status, resp.statusText);
        }
    }
}

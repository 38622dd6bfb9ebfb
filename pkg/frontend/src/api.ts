/** Typed client for the dptuner session service. */

export interface DatasetInfo {
  id: string;
  schema: string[];
  pairs: number;
  positives: number;
  stability: number;
}

export interface SessionStatus {
  id: string;
  state: "open" | "exhausted" | "closed";
  B: number;
  delta: number;
  spent: number;
  remaining: number;
  answered: number;
  denied: number;
  dataset?: string;
  mode: { mode: string; tail_rule?: string };
  mechanisms: unknown[];
}

export interface WireAtom {
  attr: string;
  transform?: string;
  sim?: string;
  theta?: number;
  isNull?: boolean;
}

export interface WireFormula {
  shape: "disjunction" | "conjunction" | "dnf";
  atoms: WireAtom[] | WireAtom[][];
}

export interface WireQuery {
  type: "LC" | "LCC" | "LCT";
  target: { kind: "pairs"; filter: string } | { kind: "baseTable"; dataset: string };
  formula?: WireFormula;
  formulas?: WireFormula[];
  alpha: number;
  beta?: number;
  c?: number;
  direction?: ">" | "<" | ">=" | "<=";
  k?: number;
  order?: "largest" | "smallest";
  translator?: { name: string; f?: number; m?: number };
}

export interface QueryResponse {
  status: "answered" | "denied";
  answer: number | boolean | { indices: number[]; formulas: WireFormula[] } | null;
  spent_total: number;
  estimate_checked: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  listDatasets(): Promise<DatasetInfo[]> {
    return fetch(`${this.base}/datasets`).then((r) => parseOrThrow<DatasetInfo[]>(r));
  }

  createSession(body: {
    dataset: string;
    B?: number;
    delta?: number;
    beta?: number;
    seed?: number;
    mode?: { mode: string; lambda_grid?: string | number[]; tail_rule?: string };
  }): Promise<SessionStatus> {
    return fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => parseOrThrow<SessionStatus>(r));
  }

  getSession(id: string): Promise<SessionStatus> {
    return fetch(`${this.base}/sessions/${id}`).then((r) => parseOrThrow<SessionStatus>(r));
  }

  submitQuery(id: string, query: WireQuery): Promise<QueryResponse> {
    return fetch(`${this.base}/sessions/${id}/queries`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(query),
    }).then((r) => parseOrThrow<QueryResponse>(r));
  }

  async closeSession(id: string): Promise<void> {
    const resp = await fetch(`${this.base}/sessions/${id}`, { method: "DELETE" });
    if (!resp.ok && resp.status !== 204) {
      throw new ApiError(resp.status, resp.statusText);
    }
  }
}

/**
 * Session view state: what the console knows, derived strictly from what
 * the wire carried. History is append-only; a refresh rebuilds the header
 * figures from GET /sessions/{id} without touching history rows.
 */

import type { QueryResponse, SessionStatus, WireAtom, WireFormula, WireQuery } from "./api.js";
import { BETA_DEFAULT, draftCost, type TranslatorName } from "./epsilon.js";

export interface HistoryRow {
  index: number;
  summary: string;
  alpha: number;
  status: "answered" | "denied";
  answerText: string;
  spentAfter: number;
  spendDelta: number;
}

export interface SessionView {
  id: string;
  dataset: string;
  B: number;
  delta: number;
  spent: number;
  remaining: number;
  answered: number;
  denied: number;
  state: string;
  accountant: string;
  history: HistoryRow[];
}

export function fromStatus(status: SessionStatus): SessionView {
  return {
    id: status.id,
    dataset: status.dataset ?? "",
    B: status.B,
    delta: status.delta,
    spent: status.spent,
    remaining: status.remaining,
    answered: status.answered,
    denied: status.denied,
    state: status.state,
    accountant: status.mode.mode,
    history: [],
  };
}

export function refreshFromStatus(view: SessionView, status: SessionStatus): SessionView {
  return { ...fromStatus(status), history: view.history };
}

function answerText(resp: QueryResponse): string {
  if (resp.status === "denied") return "denied";
  const a = resp.answer;
  if (typeof a === "number") return a.toFixed(2);
  if (typeof a === "boolean") return a ? "true" : "false";
  if (a && typeof a === "object") {
    return `top ${a.indices.length}: [${a.indices.join(", ")}]`;
  }
  return "";
}

/** Fold one engine response into the view. Denials leave spend and the
 * gauge untouched; answers advance spend exactly as the server reports. */
export function applyResponse(
  view: SessionView,
  summary: string,
  alpha: number,
  resp: QueryResponse,
): SessionView {
  const denied = resp.status === "denied";
  const spentAfter = resp.spent_total;
  const row: HistoryRow = {
    index: view.history.length + 1,
    summary,
    alpha,
    status: resp.status,
    answerText: answerText(resp),
    spentAfter,
    spendDelta: denied ? 0 : spentAfter - view.spent,
  };
  return {
    ...view,
    spent: denied ? view.spent : spentAfter,
    remaining: denied ? view.remaining : Math.max(view.B - spentAfter, 0),
    answered: view.answered + (denied ? 0 : 1),
    denied: view.denied + (denied ? 1 : 0),
    history: [...view.history, row],
  };
}

// ---------------------------------------------------------------- drafts --

export interface DraftAtom {
  attr: string;
  transform: string;
  sim: string;
  theta: number;
}

export interface QueryDraft {
  type: "LC" | "LCC" | "LCT";
  targetFilter: "all" | "positives" | "negatives";
  shape: "disjunction" | "conjunction";
  atoms: DraftAtom[];
  /** tolerance in t units; alpha = t * pairCount */
  t: number;
  beta?: number;
  c?: number;
  direction?: ">" | "<" | ">=" | "<=";
  /** LCT null-profiling: k attributes with the fewest/most NULLs */
  k?: number;
  order?: "largest" | "smallest";
  translator?: TranslatorName;
  f?: number;
  m?: number;
}

export function draftAlpha(draft: QueryDraft, pairCount: number): number {
  return draft.t * pairCount;
}

/** Inline validation; a non-empty result blocks submission. */
export function validateDraft(draft: QueryDraft, schema: string[], pairCount: number): string[] {
  const errors: string[] = [];
  if (!(draft.t > 0)) errors.push("tolerance t must be positive");
  if (draftAlpha(draft, pairCount) <= 0) errors.push("alpha must be positive");
  const beta = draft.beta ?? BETA_DEFAULT;
  if (!(beta > 0 && beta < 1)) errors.push("beta must be in (0,1)");
  if (draft.type !== "LCT") {
    if (draft.atoms.length === 0) errors.push("add at least one predicate");
    for (const atom of draft.atoms) {
      if (!schema.includes(atom.attr)) errors.push(`unknown attribute ${atom.attr}`);
      if (!(atom.theta >= 0 && atom.theta <= 1)) {
        errors.push(`theta must be in [0,1], got ${atom.theta}`);
      }
    }
  }
  if (draft.type === "LCC") {
    if (draft.c === undefined || !Number.isFinite(draft.c)) {
      errors.push("comparison threshold c required");
    }
    if (beta >= 0.5) errors.push("comparison queries need beta < 1/2");
  }
  if (draft.type === "LCT") {
    const k = draft.k ?? 1;
    if (!(k >= 1 && k <= schema.length)) {
      errors.push(`k must be between 1 and ${schema.length}`);
    }
  }
  return errors;
}

function atomToWire(atom: DraftAtom): WireAtom {
  return { attr: atom.attr, transform: atom.transform, sim: atom.sim, theta: atom.theta };
}

export function draftToWire(draft: QueryDraft, schema: string[], pairCount: number): WireQuery {
  const alpha = draftAlpha(draft, pairCount);
  const base = {
    alpha,
    ...(draft.beta !== undefined ? { beta: draft.beta } : {}),
  };
  if (draft.type === "LCT") {
    const formulas: WireFormula[] = schema.map((attr) => ({
      shape: "disjunction",
      atoms: [{ attr, isNull: true }],
    }));
    return {
      type: "LCT",
      target: { kind: "baseTable", dataset: "d1" },
      formulas,
      k: draft.k ?? 1,
      order: draft.order ?? "smallest",
      ...base,
    };
  }
  const formula: WireFormula = {
    shape: draft.shape,
    atoms: draft.atoms.map(atomToWire),
  };
  if (draft.type === "LC") {
    return {
      type: "LC",
      target: { kind: "pairs", filter: draft.targetFilter },
      formula,
      ...base,
    };
  }
  return {
    type: "LCC",
    target: { kind: "pairs", filter: draft.targetFilter },
    formula,
    c: draft.c ?? 0,
    direction: draft.direction ?? ">",
    ...(draft.translator && draft.translator !== "default"
      ? { translator: { name: draft.translator, f: draft.f, m: draft.m } }
      : {}),
    ...base,
  };
}

export function draftEpsilon(draft: QueryDraft, schema: string[], pairCount: number) {
  return draftCost(
    draft.type,
    draftAlpha(draft, pairCount),
    draft.beta ?? BETA_DEFAULT,
    {
      translator: draft.translator,
      f: draft.f,
      m: draft.m,
      L: schema.length,
      k: draft.k ?? 1,
    },
  );
}

/** True when the draft's worst case exceeds the remaining budget. */
export function wouldBeDenied(
  draft: QueryDraft,
  view: SessionView,
  schema: string[],
  pairCount: number,
): boolean {
  if (view.accountant !== "sequential") return false; // only exact for additive accounting
  return view.spent + draftEpsilon(draft, schema, pairCount).worstCase > view.B + 1e-12;
}

export function draftSummary(draft: QueryDraft, pairCount: number): string {
  const alpha = draftAlpha(draft, pairCount).toFixed(1);
  if (draft.type === "LCT") {
    return `LCT nulls k=${draft.k ?? 1} ${draft.order ?? "smallest"} (a=${alpha})`;
  }
  const atoms = draft.atoms
    .map((a) => `${a.sim}(${a.transform}(${a.attr}))>${a.theta}`)
    .join(draft.shape === "conjunction" ? " AND " : " OR ");
  if (draft.type === "LC") {
    return `LC ${draft.targetFilter} ${atoms} (a=${alpha})`;
  }
  return `LCC ${draft.targetFilter} ${atoms} ${draft.direction ?? ">"} ${draft.c} (a=${alpha})`;
}

/** DOM wiring for the session console. All figures shown are either
 * client-side closed forms (the epsilon preview) or server-reported. */

import { ApiClient, ApiError, type DatasetInfo } from "./api.js";
import {
  applyResponse,
  draftAlpha,
  draftEpsilon,
  draftSummary,
  draftToWire,
  fromStatus,
  refreshFromStatus,
  validateDraft,
  wouldBeDenied,
  type DraftAtom,
  type QueryDraft,
  type SessionView,
} from "./state.js";
import {
  renderEpsilonPreview,
  renderErrors,
  renderGauge,
  renderHistory,
} from "./render.js";

const TRANSFORMS = ["lowercase", "qgram2", "qgram3", "spaceTokenize"];
const SIMS = ["levenshtein", "jaro", "smithWaterman", "cosine", "jaccard", "overlap", "absDiffLen"];

const api = new ApiClient("");

interface ConsoleState {
  datasets: DatasetInfo[];
  dataset?: DatasetInfo;
  view?: SessionView;
  draft: QueryDraft;
}

const state: ConsoleState = {
  datasets: [],
  draft: {
    type: "LC",
    targetFilter: "positives",
    shape: "disjunction",
    atoms: [],
    t: 0.08,
    direction: ">",
    c: 10,
    k: 2,
    order: "smallest",
    translator: "default",
    f: 0.05,
    m: 5,
  },
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readNumber(id: string, fallback: number): number {
  const value = Number((el<HTMLInputElement>(id)).value);
  return Number.isFinite(value) ? value : fallback;
}

function renderSessionPanel(): void {
  const view = state.view;
  el("gauge-panel").innerHTML = view ? renderGauge(view) : `<p class="empty">no session</p>`;
  el("history-panel").innerHTML = view ? renderHistory(view) : "";
}

function renderPreview(): void {
  const ds = state.dataset;
  if (!ds) {
    el("eps-panel").innerHTML = "";
    return;
  }
  const schema = ds.schema;
  const errors = validateDraft(state.draft, schema, ds.pairs);
  if (errors.length > 0) {
    el("eps-panel").innerHTML = renderErrors(errors);
    return;
  }
  const cost = draftEpsilon(state.draft, schema, ds.pairs);
  const denied = state.view ? wouldBeDenied(state.draft, state.view, schema, ds.pairs) : false;
  el("eps-panel").innerHTML = renderEpsilonPreview(
    cost,
    draftAlpha(state.draft, ds.pairs),
    denied,
  );
}

function renderAtoms(): void {
  const list = state.draft.atoms
    .map(
      (a, i) =>
        `<span class="chip">${a.sim}(${a.transform}(${a.attr}))&gt;${a.theta}` +
        ` <button data-action="remove-atom" data-index="${i}">x</button></span>`,
    )
    .join(" ");
  el("atom-chips").innerHTML = list || `<span class="empty">no predicates</span>`;
}

function fillSelect(id: string, options: string[]): void {
  el<HTMLSelectElement>(id).innerHTML = options
    .map((o) => `<option value="${o}">${o}</option>`)
    .join("");
}

function syncDraftFromInputs(): void {
  const d = state.draft;
  d.type = el<HTMLSelectElement>("q-type").value as QueryDraft["type"];
  d.targetFilter = el<HTMLSelectElement>("q-target").value as QueryDraft["targetFilter"];
  d.shape = el<HTMLSelectElement>("q-shape").value as QueryDraft["shape"];
  d.t = readNumber("q-tolerance", 0.08);
  el("t-label").textContent = d.t.toFixed(2);
  d.c = readNumber("q-threshold", 10);
  d.direction = el<HTMLSelectElement>("q-direction").value as QueryDraft["direction"];
  d.k = readNumber("q-k", 2);
  d.order = el<HTMLSelectElement>("q-order").value as QueryDraft["order"];
  d.translator = el<HTMLSelectElement>("q-translator").value as QueryDraft["translator"];
  document.body.dataset.queryType = d.type;
  renderPreview();
}

async function connect(): Promise<void> {
  state.datasets = await api.listDatasets();
  fillSelect("ds-select", state.datasets.map((d) => d.id));
  onDatasetChange();
}

function onDatasetChange(): void {
  const id = el<HTMLSelectElement>("ds-select").value;
  state.dataset = state.datasets.find((d) => d.id === id);
  if (state.dataset) {
    fillSelect("atom-attr", state.dataset.schema);
    fillSelect("atom-transform", TRANSFORMS);
    fillSelect("atom-sim", SIMS);
    el("ds-facts").textContent =
      `${state.dataset.pairs} labeled pairs, ${state.dataset.positives} positives`;
  }
  renderPreview();
}

async function createSession(): Promise<void> {
  const ds = state.dataset;
  if (!ds) return;
  const B = readNumber("s-budget", 0.5);
  const mode = el<HTMLSelectElement>("s-mode").value;
  const status = await api.createSession({
    dataset: ds.id,
    B,
    mode: mode === "sequential" ? { mode: "sequential" } : undefined,
  });
  state.view = fromStatus(status);
  renderSessionPanel();
  renderPreview();
}

function addAtom(): void {
  const atom: DraftAtom = {
    attr: el<HTMLSelectElement>("atom-attr").value,
    transform: el<HTMLSelectElement>("atom-transform").value,
    sim: el<HTMLSelectElement>("atom-sim").value,
    theta: readNumber("atom-theta", 0.7),
  };
  state.draft.atoms.push(atom);
  renderAtoms();
  renderPreview();
}

async function submitDraft(): Promise<void> {
  const ds = state.dataset;
  const view = state.view;
  if (!ds || !view) return;
  const errors = validateDraft(state.draft, ds.schema, ds.pairs);
  if (errors.length > 0) {
    el("eps-panel").innerHTML = renderErrors(errors);
    return; // invalid drafts never reach the wire
  }
  const wire = draftToWire(state.draft, ds.schema, ds.pairs);
  try {
    const resp = await api.submitQuery(view.id, wire);
    state.view = applyResponse(
      view,
      draftSummary(state.draft, ds.pairs),
      draftAlpha(state.draft, ds.pairs),
      resp,
    );
  } catch (err) {
    if (err instanceof ApiError) {
      el("eps-panel").innerHTML = renderErrors([err.message]);
      return; // transport/validation failures surface without state damage
    }
    throw err;
  }
  renderSessionPanel();
  renderPreview();
}

async function refresh(): Promise<void> {
  if (!state.view) return;
  const status = await api.getSession(state.view.id);
  state.view = refreshFromStatus(state.view, status);
  renderSessionPanel();
}

export function boot(): void {
  el("btn-connect").addEventListener("click", () => void connect());
  el("ds-select").addEventListener("change", onDatasetChange);
  el("btn-create").addEventListener("click", () => void createSession());
  el("btn-add-atom").addEventListener("click", addAtom);
  el("btn-submit").addEventListener("click", () => void submitDraft());
  el("btn-refresh").addEventListener("click", () => void refresh());
  for (const id of [
    "q-type", "q-target", "q-shape", "q-tolerance", "q-threshold",
    "q-direction", "q-k", "q-order", "q-translator",
  ]) {
    el(id).addEventListener("input", syncDraftFromInputs);
    el(id).addEventListener("change", syncDraftFromInputs);
  }
  el("atom-chips").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.action === "remove-atom") {
      state.draft.atoms.splice(Number(target.dataset.index), 1);
      renderAtoms();
      renderPreview();
    }
  });
  renderAtoms();
  renderSessionPanel();
  void connect().catch(() => {
    el("gauge-panel").innerHTML = `<p class="empty">service unreachable; retry connect</p>`;
  });
}

if (typeof document !== "undefined" && document.getElementById("btn-connect")) {
  boot();
}

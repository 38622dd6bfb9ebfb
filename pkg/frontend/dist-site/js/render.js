/** Pure HTML-string renderers; main.ts owns the DOM and event wiring. */
export function escapeHtml(text) {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}
function fmt(x, digits = 4) {
    if (!Number.isFinite(x))
        return "inf";
    return x.toFixed(digits);
}
/** Just the budget bar; depends only on spent/B, so denials leave it
 * byte-identical. */
export function renderGaugeBar(view) {
    const frac = Number.isFinite(view.B) && view.B > 0 ? Math.min(view.spent / view.B, 1) : 0;
    const pct = (frac * 100).toFixed(1);
    const cls = frac >= 1 ? "gauge-bar exhausted" : "gauge-bar";
    return `
  <div class="gauge" data-spent="${fmt(view.spent)}">
    <div class="${cls}" style="width:${pct}%"></div>
    <div class="gauge-label">spent ${fmt(view.spent)} / ${fmt(view.B)} (${pct}%)</div>
  </div>`;
}
export function renderGauge(view) {
    return `${renderGaugeBar(view)}
  <dl class="session-facts">
    <dt>session</dt><dd>${escapeHtml(view.id)} (${escapeHtml(view.state)})</dd>
    <dt>dataset</dt><dd>${escapeHtml(view.dataset)}</dd>
    <dt>accountant</dt><dd>${escapeHtml(view.accountant)}</dd>
    <dt>delta</dt><dd>${view.delta.toExponential(2)}</dd>
    <dt>answered / denied</dt><dd>${view.answered} / ${view.denied}</dd>
    <dt>remaining</dt><dd>${fmt(view.remaining)}</dd>
  </dl>`;
}
export function renderHistory(view) {
    if (view.history.length === 0) {
        return `<p class="empty">no queries yet</p>`;
    }
    const rows = view.history
        .map((row) => {
        const cls = row.status === "denied" ? "denied" : "answered";
        return `<tr class="${cls}">
        <td>${row.index}</td>
        <td>${escapeHtml(row.summary)}</td>
        <td>${row.alpha.toFixed(1)}</td>
        <td>${row.status}</td>
        <td>${escapeHtml(row.answerText)}</td>
        <td>${row.status === "denied" ? "+0" : "+" + fmt(row.spendDelta)}</td>
        <td>${fmt(row.spentAfter)}</td>
      </tr>`;
    })
        .join("");
    return `<table class="history">
    <thead><tr><th>#</th><th>query</th><th>alpha</th><th>status</th>
    <th>answer</th><th>spend</th><th>total</th></tr></thead>
    <tbody>${rows}</tbody></table>`;
}
export function renderEpsilonPreview(cost, alpha, denied) {
    const range = Math.abs(cost.worstCase - cost.bestCase) < 1e-12
        ? `epsilon = ${fmt(cost.worstCase)}`
        : `epsilon = ${fmt(cost.bestCase)} .. ${fmt(cost.worstCase)} (worst case gates)`;
    const warning = denied
        ? `<span class="would-deny">would be denied at the current budget</span>`
        : "";
    return `<span class="eps-preview" data-worst="${fmt(cost.worstCase)}">
    alpha = ${alpha.toFixed(1)}; ${range}</span> ${warning}`;
}
export function renderErrors(errors) {
    if (errors.length === 0)
        return "";
    return `<ul class="errors">${errors
        .map((e) => `<li>${escapeHtml(e)}</li>`)
        .join("")}</ul>`;
}
export function renderAnswerChips(formulaTexts) {
    return formulaTexts
        .map((t) => `<span class="chip">${escapeHtml(t)}</span>`)
        .join(" ");
}

/**
 * Client-side tolerance-to-privacy closed forms.
 *
 * These duplicate the server's translation arithmetic on purpose: the
 * engineer sees the exact cost of a draft query before committing budget.
 * Every figure shown in the UI is either one of these deterministic
 * formulas or a value reported by the server; the client never samples
 * noise or touches data.
 */

export const BETA_DEFAULT = Math.exp(-15);

export interface LaplaceSpec {
  b: number;
  epsilon: number;
}

function checkTolerance(alpha: number, beta: number): void {
  if (!(alpha > 0) || !Number.isFinite(alpha)) {
    throw new Error(`alpha must be a positive real, got ${alpha}`);
  }
  if (!(beta > 0 && beta < 1)) {
    throw new Error(`beta must be in (0,1), got ${beta}`);
  }
}

/** Count query: b = alpha/ln(1/beta), eps = s/b. */
export function translateCount(
  alpha: number,
  beta: number = BETA_DEFAULT,
  sensitivity = 1,
): LaplaceSpec {
  checkTolerance(alpha, beta);
  const b = alpha / Math.log(1 / beta);
  return { b, epsilon: sensitivity / b };
}

/** Threshold comparison: b = alpha/ln(1/(2 beta)). */
export function translateComparison(
  alpha: number,
  beta: number = BETA_DEFAULT,
  sensitivity = 1,
): LaplaceSpec {
  checkTolerance(alpha, beta);
  if (beta >= 0.5) {
    throw new Error("comparison translation needs beta < 1/2");
  }
  const b = alpha / Math.log(1 / (2 * beta));
  return { b, epsilon: sensitivity / b };
}

/** Top-k over L formulas: b = alpha/(2(ln L + ln(k/beta))), eps = k s/b. */
export function translateTopK(
  alpha: number,
  formulaCount: number,
  k: number,
  beta: number = BETA_DEFAULT,
  sensitivity = 1,
): LaplaceSpec {
  checkTolerance(alpha, beta);
  if (!(k >= 1 && k <= formulaCount)) {
    throw new Error(`need 1 <= k <= L, got k=${k}, L=${formulaCount}`);
  }
  const b = alpha / (2 * (Math.log(formulaCount) + Math.log(k / beta)));
  return { b, epsilon: (k * sensitivity) / b };
}

/** Worst case of comparison-with-poking: prepaid poke plus escalation. */
export function comparisonPokingWorstCase(
  alpha: number,
  f: number,
  beta: number = BETA_DEFAULT,
  sensitivity = 1,
): number {
  if (!(f > 0 && f < 1)) {
    throw new Error(`poking fraction must be in (0,1), got ${f}`);
  }
  const poke = f * translateComparison(alpha, beta, sensitivity).epsilon;
  const escalation = translateComparison(alpha, beta / 2, sensitivity).epsilon;
  return poke + escalation;
}

/** Worst case of comparison-with-multi-poking: all m pokes spent. */
export function comparisonMultiPokingWorstCase(
  alpha: number,
  m: number,
  beta: number = BETA_DEFAULT,
  sensitivity = 1,
): number {
  checkTolerance(alpha, beta);
  if (m < 2) {
    throw new Error(`multi-poking needs m >= 2, got ${m}`);
  }
  return (Math.log(m / (2 * beta)) / alpha) * sensitivity;
}

export type TranslatorName = "default" | "LCM" | "LCMP" | "LCMMP";

export interface DraftCost {
  /** worst-case epsilon checked by the admission gate */
  worstCase: number;
  /** minimum epsilon actually charged if every poke decides early */
  bestCase: number;
}

/** Worst/best-case cost of a draft, matching the server's estimate gate. */
export function draftCost(
  type: "LC" | "LCC" | "LCT",
  alpha: number,
  beta: number = BETA_DEFAULT,
  opts: { translator?: TranslatorName; f?: number; m?: number; L?: number; k?: number } = {},
  sensitivity = 1,
): DraftCost {
  if (type === "LC") {
    const eps = translateCount(alpha, beta, sensitivity).epsilon;
    return { worstCase: eps, bestCase: eps };
  }
  if (type === "LCT") {
    const eps = translateTopK(alpha, opts.L ?? 1, opts.k ?? 1, beta, sensitivity).epsilon;
    return { worstCase: eps, bestCase: eps };
  }
  const translator = opts.translator ?? "default";
  if (translator === "LCMP") {
    const f = opts.f ?? 0.05;
    const worst = comparisonPokingWorstCase(alpha, f, beta, sensitivity);
    return { worstCase: worst, bestCase: f * translateComparison(alpha, beta, sensitivity).epsilon };
  }
  if (translator === "LCMMP") {
    const m = opts.m ?? 5;
    const worst = comparisonMultiPokingWorstCase(alpha, m, beta, sensitivity);
    return { worstCase: worst, bestCase: worst / m };
  }
  const eps = translateComparison(alpha, beta, sensitivity).epsilon;
  return { worstCase: eps, bestCase: eps };
}

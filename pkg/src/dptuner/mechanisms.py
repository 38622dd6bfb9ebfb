"""Tolerance-to-privacy translators built on Laplace noise.

Each mechanism takes an (alpha, beta) error tolerance and the exact query
answer(s), draws the minimal-scale Laplace noise that meets the tolerance,
and returns both the noisy output and a MechanismRecord describing every
Laplace component it could have used (worst case) and actually used
(executed path). Records are the accountant's unit of composition.

Closed forms, for sensitivity s and tolerance (alpha, beta):

  count (LM):        b = alpha/ln(1/beta),                eps = s/b
  comparison (LCM):  b = alpha/ln(1/(2 beta)),            eps = s/b
  top-k (LTM):       b = alpha/(2 (ln L + ln(k/beta))),   eps = k s/b

The poking variants (LCMP, LCMMP) spend a prepaid fraction first and only
escalate when the noisy margin is ambiguous, so their executed cost is
data dependent and usually far below the worst case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

# Failure probability used throughout unless a query overrides it.
BETA_DEFAULT = math.exp(-15)

MECHANISM_KINDS = ("LM", "LCM", "LTM", "LCMP", "LCMMP")
DIRECTIONS = (">", "<", ">=", "<=")


class MechanismError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerance:
    """(alpha, beta): answer is within alpha of truth except with prob beta."""

    alpha: float
    beta: float = BETA_DEFAULT

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise MechanismError(f"alpha must be a positive real, got {self.alpha}")
        if not (0 < self.beta < 1):
            raise MechanismError(f"beta must be in (0,1), got {self.beta}")


@dataclass(frozen=True)
class LaplaceSpec:
    """One Laplace noise component: scale b, charged privacy cost epsilon.

    copies > 1 marks i.i.d. draws sharing the scale (the top-k mechanism
    draws L of them while its charged cost is k/b).
    """

    b: float
    epsilon: float
    copies: int = 1

    def __post_init__(self):
        if self.b <= 0:
            raise MechanismError(f"noise scale must be positive, got {self.b}")
        if self.epsilon <= 0:
            raise MechanismError(f"epsilon must be positive, got {self.epsilon}")
        if self.copies < 1:
            raise MechanismError("copies must be >= 1")


@dataclass(frozen=True)
class MechanismRecord:
    kind: str
    worst_case_specs: tuple[LaplaceSpec, ...]
    executed_specs: tuple[LaplaceSpec, ...]
    ltm_components: int = 0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in MECHANISM_KINDS:
            raise MechanismError(f"unknown mechanism kind: {self.kind}")
        if not self.worst_case_specs:
            raise MechanismError("record needs at least one worst-case spec")

    def worst_case_epsilon(self) -> float:
        return sum(s.epsilon for s in self.worst_case_specs)

    def executed_epsilon(self) -> float:
        return sum(s.epsilon for s in self.executed_specs)

    def public_dict(self) -> dict:
        """Loggable view: scales and costs only, never noise or counts."""
        return {
            "kind": self.kind,
            "worst_case": [
                {"b": s.b, "epsilon": s.epsilon, "copies": s.copies}
                for s in self.worst_case_specs
            ],
            "executed": [
                {"b": s.b, "epsilon": s.epsilon, "copies": s.copies}
                for s in self.executed_specs
            ],
            "ltm_components": self.ltm_components,
            "metadata": dict(self.metadata),
        }


def sample_laplace(b: float, rng: np.random.Generator) -> float:
    if b <= 0:
        raise MechanismError(f"noise scale must be positive, got {b}")
    return float(rng.laplace(0.0, b))


def translate_lm(tol: Tolerance, sensitivity: int = 1) -> LaplaceSpec:
    """Noise scale is pinned by the tolerance; privacy cost scales with
    sensitivity: eps = sensitivity * ln(1/beta) / alpha."""
    b = tol.alpha / math.log(1.0 / tol.beta)
    return LaplaceSpec(b=b, epsilon=sensitivity / b)


def translate_lcm(tol: Tolerance, sensitivity: int = 1) -> LaplaceSpec:
    if tol.beta >= 0.5:
        raise MechanismError("comparison translation needs beta < 1/2")
    b = tol.alpha / math.log(1.0 / (2.0 * tol.beta))
    return LaplaceSpec(b=b, epsilon=sensitivity / b)


def translate_ltm(tol: Tolerance, formula_count: int, k: int, sensitivity: int = 1) -> LaplaceSpec:
    if not (1 <= k <= formula_count):
        raise MechanismError(f"need 1 <= k <= L, got k={k}, L={formula_count}")
    b = tol.alpha / (2.0 * (math.log(formula_count) + math.log(k / tol.beta)))
    return LaplaceSpec(b=b, epsilon=k * sensitivity / b, copies=formula_count)


def translate_lcmp(tol: Tolerance, f: float, sensitivity: int = 1) -> tuple[LaplaceSpec, LaplaceSpec]:
    """(poke spec, escalation spec); worst case runs both."""
    if not (0 < f < 1):
        raise MechanismError(f"poking fraction must be in (0,1), got {f}")
    eps_lcm = translate_lcm(tol, sensitivity).epsilon
    eps0 = f * eps_lcm
    poke = LaplaceSpec(b=sensitivity / eps0, epsilon=eps0)
    escalation = translate_lcm(Tolerance(tol.alpha, tol.beta / 2.0), sensitivity)
    return poke, escalation


def translate_lcmmp(tol: Tolerance, m: int, sensitivity: int = 1) -> LaplaceSpec:
    """Worst-case spec when all m pokes are spent."""
    if m < 2:
        raise MechanismError(f"multi-poking needs m >= 2, got {m}")
    eps_max = math.log(m / (2.0 * tol.beta)) / tol.alpha * sensitivity
    return LaplaceSpec(b=sensitivity / eps_max, epsilon=eps_max)


def derived_lcc_tolerance(tol: Tolerance) -> float:
    """alpha' achieved when a comparison is answered locally from a noisy
    count with (alpha, beta)-count tolerance: (1 - ln2/ln(1/beta)) alpha."""
    if tol.beta >= 0.5:
        raise MechanismError("derived comparison tolerance needs beta < 1/2")
    return (1.0 - math.log(2.0) / math.log(1.0 / tol.beta)) * tol.alpha


def derived_lct_tolerance(tol: Tolerance, formula_count: int, k: int) -> float:
    """alpha' achieved when top-k is answered locally from L noisy counts:
    (1 + 2 ln(L k)/ln(1/beta)) alpha."""
    if formula_count * k < 1:
        raise MechanismError("need L*k >= 1")
    return (1.0 + 2.0 * math.log(formula_count * k) / math.log(1.0 / tol.beta)) * tol.alpha


def _normalize_direction(count: float, threshold: float, direction: str) -> float:
    """Reduce every comparison to `value > 0` form via reflection."""
    if direction not in DIRECTIONS:
        raise MechanismError(f"unknown comparison direction: {direction}")
    if direction in (">", ">="):
        return count - threshold
    return threshold - count


def run_lm(
    count: float,
    tol: Tolerance,
    rng: np.random.Generator,
    sensitivity: int = 1,
) -> tuple[float, MechanismRecord]:
    spec = translate_lm(tol, sensitivity)
    answer = count + sample_laplace(spec.b, rng)
    record = MechanismRecord(
        kind="LM",
        worst_case_specs=(spec,),
        executed_specs=(spec,),
        metadata={"alpha": tol.alpha, "beta": tol.beta, "sensitivity": sensitivity},
    )
    return answer, record


def run_lcm(
    count: float,
    threshold: float,
    direction: str,
    tol: Tolerance,
    rng: np.random.Generator,
    sensitivity: int = 1,
) -> tuple[bool, MechanismRecord]:
    if not math.isfinite(threshold):
        raise MechanismError("comparison threshold must be finite")
    spec = translate_lcm(tol, sensitivity)
    x = _normalize_direction(count, threshold, direction)
    answer = (x + sample_laplace(spec.b, rng)) > 0
    record = MechanismRecord(
        kind="LCM",
        worst_case_specs=(spec,),
        executed_specs=(spec,),
        metadata={
            "alpha": tol.alpha,
            "beta": tol.beta,
            "direction": direction,
            "sensitivity": sensitivity,
        },
    )
    return answer, record


def run_ltm(
    counts: Sequence[float],
    k: int,
    order: str,
    tol: Tolerance,
    rng: np.random.Generator,
    sensitivity: int = 1,
) -> tuple[tuple[int, ...], MechanismRecord]:
    """Select the k formulas with the largest (or smallest) noisy counts.

    Returns the selected input indices, best first. Ties in the noisy
    ranking break toward the lowest input index.
    """
    if order not in ("largest", "smallest"):
        raise MechanismError(f"unknown top-k order: {order}")
    L = len(counts)
    spec = translate_ltm(tol, L, k, sensitivity)
    noisy = np.asarray(counts, dtype=float) + rng.laplace(0.0, spec.b, size=L)
    keys = -noisy if order == "largest" else noisy
    selected = tuple(int(i) for i in np.argsort(keys, kind="stable")[:k])
    record = MechanismRecord(
        kind="LTM",
        worst_case_specs=(spec,),
        executed_specs=(spec,),
        ltm_components=L,
        metadata={
            "alpha": tol.alpha,
            "beta": tol.beta,
            "k": k,
            "L": L,
            "order": order,
            "sensitivity": sensitivity,
        },
    )
    return selected, record


def run_lcmp(
    count: float,
    threshold: float,
    direction: str,
    tol: Tolerance,
    f: float,
    rng: np.random.Generator,
    sensitivity: int = 1,
) -> tuple[bool, MechanismRecord]:
    """Comparison with a single prepaid poke of fraction f.

    The poke decides immediately when the noisy margin clears
    alpha0 - alpha (alpha0 = ln(1/beta)/eps0); otherwise the plain
    comparison mechanism runs at beta/2 and both costs are spent.
    """
    poke, escalation = translate_lcmp(tol, f, sensitivity)
    x = _normalize_direction(count, threshold, direction)
    x0 = x + sample_laplace(poke.b, rng)
    alpha0 = math.log(1.0 / tol.beta) / poke.epsilon * sensitivity
    meta = {
        "alpha": tol.alpha,
        "beta": tol.beta,
        "f": f,
        "direction": direction,
        "sensitivity": sensitivity,
    }
    if x0 - alpha0 + tol.alpha >= 0:
        answer, executed, escalated = True, (poke,), False
    elif x0 + alpha0 - tol.alpha <= 0:
        answer, executed, escalated = False, (poke,), False
    else:
        answer = (x + sample_laplace(escalation.b, rng)) > 0
        executed, escalated = (poke, escalation), True
    meta["escalated"] = escalated
    record = MechanismRecord(
        kind="LCMP",
        worst_case_specs=(poke, escalation),
        executed_specs=executed,
        metadata=meta,
    )
    return answer, record


def noise_down(
    eta: float,
    eps: float,
    eps_prime: float,
    rng: np.random.Generator,
) -> float:
    """Resample correlated Laplace noise from scale 1/eps to scale 1/eps'.

    Given eta ~ Lap(1/eps) and eps' > eps, the returned noise is marginally
    Lap(1/eps') while the joint release of both noisy values still costs
    only eps' in total. Four-branch mixture: keep eta; jump across zero;
    shrink toward zero; push outward.
    """
    if eps <= 0 or eps_prime <= eps:
        raise MechanismError("noise_down needs eps' > eps > 0")
    delta = eps_prime - eps
    total = eps_prime + eps
    abs_eta = abs(eta)
    sign = math.copysign(1.0, eta) if eta != 0 else (1.0 if rng.random() < 0.5 else -1.0)
    w_keep = (eps / eps_prime) * math.exp(-delta * abs_eta)
    w_cross = delta / (2.0 * eps_prime)
    w_shrink = (total / (2.0 * eps_prime)) * (1.0 - math.exp(-delta * abs_eta))
    p = rng.random()
    if p <= w_keep:
        return eta
    if p <= w_keep + w_cross:
        # Density (eps'+eps) e^{(eps'+eps) z} on z <= 0; lands opposite eta.
        z = math.log(1.0 - rng.random()) / total
        return sign * z
    if p <= w_keep + w_cross + w_shrink:
        # Density prop. to e^{-(eps'-eps) z} on [0, |eta|].
        u = rng.random()
        z = -math.log(1.0 - u * (1.0 - math.exp(-delta * abs_eta))) / delta
        return sign * z
    # Density prop. to e^{-(eps'+eps) z} on z >= |eta|.
    z = abs_eta - math.log(1.0 - rng.random()) / total
    return sign * z


def run_lcmmp(
    count: float,
    threshold: float,
    direction: str,
    tol: Tolerance,
    m: int,
    rng: np.random.Generator,
    sensitivity: int = 1,
) -> tuple[bool, MechanismRecord]:
    """Comparison with m pokes of gradually increasing cost.

    Poke i works at eps_i = (i+1) eps_max/m with decision band
    alpha_i = ln(m/(2 beta))/eps_i; undecided pokes relax the budget and
    rewrite the noise in place via noise_down, so only the final scale
    Lap(1/eps_stop) is ever charged.
    """
    worst = translate_lcmmp(tol, m, sensitivity)
    eps_max = worst.epsilon
    x = _normalize_direction(count, threshold, direction)
    band_constant = math.log(m / (2.0 * tol.beta)) * sensitivity

    eps_i = eps_max / m
    eta = sample_laplace(sensitivity / eps_i, rng)
    answer: Optional[bool] = None
    stop = m - 1
    for i in range(m - 1):
        alpha_i = band_constant / eps_i
        x_i = x + eta
        if (x_i - alpha_i) / tol.alpha >= -1.0:
            answer, stop = True, i
            break
        if (x_i + alpha_i) / tol.alpha <= 1.0:
            answer, stop = False, i
            break
        eps_next = eps_i + eps_max / m
        eta = noise_down(eta, eps_i, eps_next, rng)
        eps_i = eps_next
    if answer is None:
        answer = (x + eta) > 0
    executed = LaplaceSpec(b=sensitivity / eps_i, epsilon=eps_i)
    record = MechanismRecord(
        kind="LCMMP",
        worst_case_specs=(worst,),
        executed_specs=(executed,),
        metadata={
            "alpha": tol.alpha,
            "beta": tol.beta,
            "m": m,
            "direction": direction,
            "stop_iteration": stop,
            "sensitivity": sensitivity,
        },
    )
    return answer, record

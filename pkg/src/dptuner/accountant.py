"""Privacy-loss composition over executed mechanisms.

Two modes:
  sequential — epsilons add; the delta contribution of pure Laplace
               mechanisms is zero, so the budget check is a plain sum.
  moments    — per-mechanism log moment-generating-function bounds add
               at every order, then a tail rule converts the total to a
               single (epsilon, delta) figure.

The Laplace moment at order lam (lam > 1) is

  mu(b, lam) = 1/(lam-1) * ln( lam e^{(lam-1)/b}/(2lam-1)
                               + (lam-1) e^{-lam/b}/(2lam-1) )

with mu(b, 1) = 1/b + e^{-1/b} - 1, and mu -> 1/b as lam -> inf.

Tail rules:
  rdpConversion (default) — eps(delta) = min_lam mu(lam) + ln(1/delta)/(lam-1),
      the standard Renyi-to-DP conversion; sound for any grid.
  paperLiteral — eps(delta) = min_lam (mu(lam) - ln delta)/lam. This bound
      decays toward zero as lam grows without limit, so it is only
      meaningful on a capped grid; it is kept for fidelity experiments
      that reproduce trend shapes, not as a guarantee.

estimate_loss composes the executed specs of the past with the worst-case
specs of the candidate mechanism (pre-execution gate); analyze_loss
composes executed specs only (post-execution, never larger).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .mechanisms import MechanismRecord

DEFAULT_LAMBDA_GRID = (1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0)

# Extension used by trend-reproduction sweeps under the paperLiteral rule,
# where the useful orders sit far beyond the default grid.
WIDE_LAMBDA_GRID = DEFAULT_LAMBDA_GRID + (
    96.0, 128.0, 192.0, 256.0, 384.0, 512.0, 768.0, 1024.0, 1536.0, 2048.0, 3072.0, 4096.0,
)

TAIL_RULES = ("rdpConversion", "paperLiteral")


class AccountantError(ValueError):
    pass


@dataclass(frozen=True)
class PrivacyParams:
    """Owner-specified budget: total epsilon bound B and delta."""

    B: float
    delta: float

    def __post_init__(self):
        if not self.B > 0:
            raise AccountantError(f"budget B must be positive, got {self.B}")
        if not (0 < self.delta < 1):
            raise AccountantError(f"delta must be in (0,1), got {self.delta}")


@dataclass(frozen=True)
class AccountantMode:
    mode: str = "moments"
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    tail_rule: str = "rdpConversion"

    def __post_init__(self):
        if self.mode not in ("sequential", "moments"):
            raise AccountantError(f"unknown accountant mode: {self.mode}")
        if self.tail_rule not in TAIL_RULES:
            raise AccountantError(f"unknown tail rule: {self.tail_rule}")
        if self.mode == "moments":
            if not self.lambda_grid:
                raise AccountantError("moments mode needs a non-empty lambda grid")
            if self.tail_rule == "rdpConversion" and any(l <= 1 for l in self.lambda_grid):
                raise AccountantError("rdpConversion needs every lambda > 1")
            if list(self.lambda_grid) != sorted(self.lambda_grid):
                raise AccountantError("lambda grid must be ascending")

    @classmethod
    def sequential(cls) -> "AccountantMode":
        return cls(mode="sequential")

    @classmethod
    def from_dict(cls, obj: dict) -> "AccountantMode":
        grid = obj.get("lambda_grid")
        if grid == "wide":
            grid = WIDE_LAMBDA_GRID
        elif grid is None:
            grid = DEFAULT_LAMBDA_GRID
        else:
            grid = tuple(float(x) for x in grid)
        return cls(
            mode=obj.get("mode", "moments"),
            lambda_grid=grid,
            tail_rule=obj.get("tail_rule", "rdpConversion"),
        )

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "lambda_grid": list(self.lambda_grid),
            "tail_rule": self.tail_rule,
        }


def mu_laplace(b: float, lam: float) -> float:
    """Log moment of one Laplace(b) release at order lam (computed in log
    space; stable for very large lam)."""
    if b <= 0:
        raise AccountantError(f"noise scale must be positive, got {b}")
    if lam < 1:
        raise AccountantError(f"moment order must be >= 1, got {lam}")
    if lam == 1:
        return 1.0 / b + math.exp(-1.0 / b) - 1.0
    log_denom = math.log(2.0 * lam - 1.0)
    term_a = math.log(lam) + (lam - 1.0) / b - log_denom
    term_b = math.log(lam - 1.0) - lam / b - log_denom
    return float(np.logaddexp(term_a, term_b)) / (lam - 1.0)


def mechanism_moment(record: MechanismRecord, lam: float, use_executed: bool = True) -> float:
    """Sum of Laplace moments over the record's chosen spec list; i.i.d.
    copies (top-k) contribute copies * mu each."""
    specs = record.executed_specs if use_executed else record.worst_case_specs
    return sum(spec.copies * mu_laplace(spec.b, lam) for spec in specs)


def sequential_loss(
    records: Iterable[MechanismRecord],
    preview: Optional[MechanismRecord] = None,
) -> float:
    total = sum(r.executed_epsilon() for r in records)
    if preview is not None:
        total += preview.worst_case_epsilon()
    return total


def moments_loss(
    records: Iterable[MechanismRecord],
    preview: Optional[MechanismRecord],
    delta: float,
    mode: AccountantMode,
) -> float:
    records = list(records)
    if not records and preview is None:
        return 0.0
    if not (0 < delta < 1):
        raise AccountantError(f"delta must be in (0,1), got {delta}")
    best = math.inf
    log_inv_delta = math.log(1.0 / delta)
    for lam in mode.lambda_grid:
        mu_total = sum(mechanism_moment(r, lam, use_executed=True) for r in records)
        if preview is not None:
            mu_total += mechanism_moment(preview, lam, use_executed=False)
        if mode.tail_rule == "paperLiteral":
            eps = (mu_total + log_inv_delta) / lam
        else:
            eps = mu_total + log_inv_delta / (lam - 1.0)
        best = min(best, eps)
    return best


def composed_loss(
    records: Iterable[MechanismRecord],
    preview: Optional[MechanismRecord],
    delta: float,
    mode: AccountantMode,
) -> float:
    if mode.mode == "sequential":
        return sequential_loss(records, preview)
    return moments_loss(records, preview, delta, mode)


def _moment_vector(record: MechanismRecord, grid: np.ndarray, use_executed: bool) -> np.ndarray:
    specs = record.executed_specs if use_executed else record.worst_case_specs
    out = np.zeros(len(grid))
    for spec in specs:
        out += spec.copies * _mu_laplace_grid(spec.b, grid)
    return out


def _mu_laplace_grid(b: float, grid: np.ndarray) -> np.ndarray:
    """mu_laplace evaluated over a whole grid at once."""
    out = np.empty(len(grid))
    gt1 = grid > 1
    lam = grid[gt1]
    log_denom = np.log(2.0 * lam - 1.0)
    term_a = np.log(lam) + (lam - 1.0) / b - log_denom
    term_b = np.log(lam - 1.0) - lam / b - log_denom
    out[gt1] = np.logaddexp(term_a, term_b) / (lam - 1.0)
    out[~gt1] = 1.0 / b + math.exp(-1.0 / b) - 1.0
    return out


def _tail(mu_total: np.ndarray, grid: np.ndarray, delta: float, tail_rule: str) -> float:
    log_inv_delta = math.log(1.0 / delta)
    if tail_rule == "paperLiteral":
        return float(np.min((mu_total + log_inv_delta) / grid))
    return float(np.min(mu_total + log_inv_delta / (grid - 1.0)))


@dataclass
class LossLedger:
    """Append-only mechanism log plus the running actual loss.

    The cumulative executed moment vector and epsilon sum are maintained
    incrementally so estimate/analyze stay O(grid) per call.
    """

    delta: float
    mode: AccountantMode
    records: list[MechanismRecord] = field(default_factory=list)
    current_loss: float = 0.0

    def __post_init__(self):
        self._grid = np.asarray(self.mode.lambda_grid, dtype=float)
        self._mu_exec = np.zeros(len(self._grid))
        self._eps_exec = 0.0

    def estimate_loss(self, next_record: Optional[MechanismRecord]) -> float:
        """Worst-case total if next_record were executed now."""
        if self.mode.mode == "sequential":
            extra = next_record.worst_case_epsilon() if next_record else 0.0
            return self._eps_exec + extra
        if not self.records and next_record is None:
            return 0.0
        mu = self._mu_exec
        if next_record is not None:
            mu = mu + _moment_vector(next_record, self._grid, use_executed=False)
        return _tail(mu, self._grid, self.delta, self.mode.tail_rule)

    def analyze_loss(self) -> float:
        """Actual total over executed paths only."""
        if self.mode.mode == "sequential":
            return self._eps_exec
        if not self.records:
            return 0.0
        return _tail(self._mu_exec, self._grid, self.delta, self.mode.tail_rule)

    def append(self, record: MechanismRecord) -> float:
        self.records.append(record)
        self._eps_exec += record.executed_epsilon()
        self._mu_exec += _moment_vector(record, self._grid, use_executed=True)
        loss = self.analyze_loss()
        # Actual loss can only grow as mechanisms accumulate.
        self.current_loss = max(self.current_loss, loss)
        return self.current_loss

    def to_json_lines(self) -> str:
        return "\n".join(json.dumps(r.public_dict(), sort_keys=True) for r in self.records)


def estimate_loss(
    ledger: LossLedger,
    next_record: Optional[MechanismRecord],
    delta: Optional[float] = None,
    mode: Optional[AccountantMode] = None,
) -> float:
    return composed_loss(
        ledger.records, next_record, delta if delta is not None else ledger.delta,
        mode if mode is not None else ledger.mode,
    )


def analyze_loss(
    ledger: LossLedger,
    delta: Optional[float] = None,
    mode: Optional[AccountantMode] = None,
) -> float:
    return composed_loss(
        ledger.records, None, delta if delta is not None else ledger.delta,
        mode if mode is not None else ledger.mode,
    )

"""Budget-gated session loop: translate, estimate, answer-or-deny, account.

A session binds data, a privacy budget (B, delta) and an accountant mode.
Each submitted query is translated to a mechanism, its worst-case loss is
composed with the ledger, and the mechanism only runs if the estimate fits
the budget. Denials change nothing. Responses expose mechanism outputs and
public accounting only — never true counts or raw noise.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .accountant import AccountantMode, LossLedger, PrivacyParams
from .data import Dataset, PairTable
from .formulas import Formula, FormulaError
from .mechanisms import (
    BETA_DEFAULT,
    MechanismError,
    Tolerance,
    run_lcm,
    run_lcmmp,
    run_lcmp,
    run_lm,
    run_ltm,
    translate_lcm,
    translate_lcmmp,
    translate_lcmp,
    translate_lm,
    translate_ltm,
    MechanismRecord,
    LaplaceSpec,
)
from .queries import QueryTarget, true_count

QUERY_TYPES = ("LC", "LCC", "LCT")
SESSION_STATES = ("open", "exhausted", "closed")


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class TranslatorChoice:
    """Which mechanism answers an LCC query: LCM (default), LCMP(f), LCMMP(m)."""

    name: str = "default"
    f: float = 0.05
    m: int = 5

    def __post_init__(self):
        if self.name not in ("default", "LCM", "LCMP", "LCMMP"):
            raise EngineError(f"unknown translator: {self.name}")

    @classmethod
    def from_dict(cls, obj) -> "TranslatorChoice":
        if obj is None or obj == "default":
            return cls()
        if isinstance(obj, str):
            return cls(name=obj)
        return cls(
            name=obj.get("name", "default"),
            f=float(obj.get("f", 0.05)),
            m=int(obj.get("m", 5)),
        )


@dataclass(frozen=True)
class QueryRequest:
    type: str
    target: QueryTarget
    tolerance: Tolerance
    formula: Optional[Formula] = None
    formulas: tuple[Formula, ...] = ()
    threshold: float = 0.0
    direction: str = ">"
    k: int = 1
    order: str = "largest"
    translator: TranslatorChoice = TranslatorChoice()

    def __post_init__(self):
        if self.type not in QUERY_TYPES:
            raise EngineError(f"unknown query type: {self.type}")
        if self.type in ("LC", "LCC") and self.formula is None:
            raise EngineError(f"{self.type} query needs a formula")
        if self.type == "LCT":
            if not self.formulas:
                raise EngineError("LCT query needs a formula list")
            if not (1 <= self.k <= len(self.formulas)):
                raise EngineError(f"need 1 <= k <= L, got k={self.k}, L={len(self.formulas)}")
        if self.type != "LCC" and self.translator.name != "default":
            raise EngineError("translator choice only applies to LCC queries")


@dataclass(frozen=True)
class EngineResponse:
    status: str  # "answered" | "denied"
    answer: Union[float, bool, tuple[int, ...], None]
    spent_total: float
    estimate_checked: float


@dataclass
class SessionData:
    pair_table: Optional[PairTable] = None
    datasets: dict[str, Dataset] = field(default_factory=dict)

    @property
    def schema(self):
        if self.pair_table is not None:
            return self.pair_table.schema
        if self.datasets:
            return next(iter(self.datasets.values())).schema
        raise EngineError("session has no data bound")


@dataclass
class Session:
    id: str
    data: SessionData
    privacy: PrivacyParams
    mode: AccountantMode
    seed: int
    default_beta: float = BETA_DEFAULT
    state: str = "open"
    answered: int = 0
    denied: int = 0
    ledger: LossLedger = None  # type: ignore[assignment]
    rng: np.random.Generator = None  # type: ignore[assignment]
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.ledger is None:
            self.ledger = LossLedger(delta=self.privacy.delta, mode=self.mode)
        if self.rng is None:
            self.rng = np.random.default_rng(self.seed)


def open_session(
    data: SessionData,
    privacy: PrivacyParams,
    mode: Optional[AccountantMode] = None,
    seed: int = 0,
    session_id: str = "local",
    default_beta: float = BETA_DEFAULT,
) -> Session:
    if mode is None:
        mode = AccountantMode()
    return Session(
        id=session_id,
        data=data,
        privacy=privacy,
        mode=mode,
        seed=seed,
        default_beta=default_beta,
    )


def _resolve_count(session: Session, formula: Formula, target: QueryTarget) -> int:
    return true_count(
        formula, target, pairs=session.data.pair_table, datasets=session.data.datasets
    )


def _sensitivity(session: Session, target: QueryTarget) -> int:
    if target.kind == "pairs" and session.data.pair_table is not None:
        return session.data.pair_table.stability
    return 1


def build_preview(req: QueryRequest, sensitivity: int) -> MechanismRecord:
    """Worst-case mechanism record for the estimate gate; data untouched."""
    tol = req.tolerance
    if req.type == "LC":
        spec = translate_lm(tol, sensitivity)
        return MechanismRecord("LM", (spec,), (), metadata={"preview": True})
    if req.type == "LCT":
        spec = translate_ltm(tol, len(req.formulas), req.k, sensitivity)
        return MechanismRecord(
            "LTM", (spec,), (), ltm_components=len(req.formulas), metadata={"preview": True}
        )
    name = req.translator.name
    if name in ("default", "LCM"):
        spec = translate_lcm(tol, sensitivity)
        return MechanismRecord("LCM", (spec,), (), metadata={"preview": True})
    if name == "LCMP":
        poke, escalation = translate_lcmp(tol, req.translator.f, sensitivity)
        return MechanismRecord("LCMP", (poke, escalation), (), metadata={"preview": True})
    spec = translate_lcmmp(tol, req.translator.m, sensitivity)
    return MechanismRecord("LCMMP", (spec,), (), metadata={"preview": True})


def _execute(session: Session, req: QueryRequest, sensitivity: int):
    tol = req.tolerance
    rng = session.rng
    if req.type == "LC":
        count = _resolve_count(session, req.formula, req.target)
        return run_lm(count, tol, rng, sensitivity)
    if req.type == "LCT":
        counts = [_resolve_count(session, f, req.target) for f in req.formulas]
        return run_ltm(counts, req.k, req.order, tol, rng, sensitivity)
    count = _resolve_count(session, req.formula, req.target)
    name = req.translator.name
    if name in ("default", "LCM"):
        return run_lcm(count, req.threshold, req.direction, tol, rng, sensitivity)
    if name == "LCMP":
        return run_lcmp(count, req.threshold, req.direction, tol, req.translator.f, rng, sensitivity)
    return run_lcmmp(count, req.threshold, req.direction, tol, req.translator.m, rng, sensitivity)


def submit(session: Session, req: QueryRequest) -> EngineResponse:
    """Gate, execute, account. Denied requests leave every observable
    unchanged (the estimate is data independent, so denial leaks nothing)."""
    with session._lock:
        if session.state == "closed":
            raise EngineError(f"session {session.id} is closed")
        sensitivity = _sensitivity(session, req.target)
        preview = build_preview(req, sensitivity)
        estimate = session.ledger.estimate_loss(preview)
        if estimate > session.privacy.B:
            session.denied += 1
            return EngineResponse(
                status="denied",
                answer=None,
                spent_total=session.ledger.current_loss,
                estimate_checked=estimate,
            )
        answer, record = _execute(session, req, sensitivity)
        spent = session.ledger.append(record)
        session.answered += 1
        if spent >= session.privacy.B:
            session.state = "exhausted"
        return EngineResponse(
            status="answered",
            answer=answer,
            spent_total=spent,
            estimate_checked=estimate,
        )


def session_status(session: Session) -> dict:
    """Read-only public report: budget, spend, counts, mechanism log."""
    spent = session.ledger.current_loss
    return {
        "id": session.id,
        "state": session.state,
        "B": session.privacy.B,
        "delta": session.privacy.delta,
        "mode": session.mode.to_dict(),
        "spent": spent,
        "remaining": max(session.privacy.B - spent, 0.0),
        "answered": session.answered,
        "denied": session.denied,
        "mechanisms": [r.public_dict() for r in session.ledger.records],
    }

"""Budget-gated differentially private query engine for tuning
entity-resolution blocking and matching rules over labeled pairs."""

from .accountant import AccountantMode, LossLedger, PrivacyParams
from .data import Dataset, PairTable, Schema, build_pair_table, load_dataset, load_labels
from .engine import (
    EngineResponse,
    QueryRequest,
    Session,
    SessionData,
    TranslatorChoice,
    open_session,
    session_status,
    submit,
)
from .formulas import Formula, NullPredicate, SimilarityPredicate
from .mechanisms import LaplaceSpec, MechanismRecord, Tolerance
from .queries import QualityReport, QueryTarget, quality_report, true_count

__all__ = [
    "AccountantMode",
    "Dataset",
    "EngineResponse",
    "Formula",
    "LaplaceSpec",
    "LossLedger",
    "MechanismRecord",
    "NullPredicate",
    "PairTable",
    "PrivacyParams",
    "QualityReport",
    "QueryRequest",
    "QueryTarget",
    "Schema",
    "Session",
    "SessionData",
    "SimilarityPredicate",
    "Tolerance",
    "TranslatorChoice",
    "build_pair_table",
    "load_dataset",
    "load_labels",
    "open_session",
    "quality_report",
    "session_status",
    "submit",
    "true_count",
]

__version__ = "0.1.0"

"""Ground-truth evaluation of counting queries and cleaning-quality metrics.

true_count is the exact (non-private) answer that noise mechanisms perturb.
Pair-atom results are memoized per PairTable as numpy boolean vectors, so
repeated counts over overlapping formulas (the common strategy workload)
stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset, PairTable, POSITIVE
from .formulas import Formula, FormulaError, NullPredicate, SimilarityPredicate

PAIR_FILTERS = ("all", "positives", "negatives")


@dataclass(frozen=True)
class QueryTarget:
    """What a count ranges over: a base table or the pair view (filtered).

    sensitivity equals the declared stability of the view (1 in every
    shipped configuration).
    """

    kind: str  # "baseTable" | "pairs"
    dataset_id: str = ""
    pair_filter: str = "all"

    def __post_init__(self):
        if self.kind not in ("baseTable", "pairs"):
            raise ValueError(f"unknown target kind: {self.kind}")
        if self.kind == "pairs" and self.pair_filter not in PAIR_FILTERS:
            raise ValueError(f"unknown pair filter: {self.pair_filter}")

    @classmethod
    def pairs(cls, pair_filter: str = "all") -> "QueryTarget":
        return cls("pairs", pair_filter=pair_filter)

    @classmethod
    def base_table(cls, dataset_id: str) -> "QueryTarget":
        return cls("baseTable", dataset_id=dataset_id)


def _similarity_vector(table: PairTable, atom: SimilarityPredicate) -> np.ndarray:
    """Per-pair similarity scores (NaN where an operand is NULL), cached by
    (attribute, transformation, function) so every threshold reuses them."""
    cache = table._caches.setdefault("sims", {})
    key = (atom.attribute, atom.transform.name, atom.sim)
    vec = cache.get(key)
    if vec is None:
        from .similarity import similarity

        schema = table.schema
        idx = schema.index(atom.attribute)
        vec = np.full(len(table.pairs), np.nan)
        for i, (left, right, _) in enumerate(table.pairs):
            lv, rv = left[idx], right[idx]
            if lv is not None and rv is not None:
                vec[i] = similarity(atom.sim, atom.transform, lv, rv)
        cache[key] = vec
    return vec


def _atom_vector(table: PairTable, atom: SimilarityPredicate) -> np.ndarray:
    cache = table._caches.setdefault("atoms", {})
    key = (atom.attribute, atom.transform.name, atom.sim, atom.theta)
    vec = cache.get(key)
    if vec is None:
        sims = _similarity_vector(table, atom)
        # NaN (NULL operand) compares false, matching the scalar NULL rule.
        with np.errstate(invalid="ignore"):
            vec = sims > atom.theta
        cache[key] = vec
    return vec


def formula_vector(table: PairTable, formula: Formula) -> np.ndarray:
    """Boolean satisfaction vector of a pair formula over all pairs."""
    if not formula.is_pairwise:
        raise FormulaError("pair target requires pair atoms")
    n = len(table.pairs)
    if formula.shape == "conjunction":
        acc = np.ones(n, dtype=bool)
        for atom in formula.clauses[0]:
            acc &= _atom_vector(table, atom)
        return acc
    if formula.shape == "disjunction":
        out = np.zeros(n, dtype=bool)
        for atom in formula.clauses[0]:
            out |= _atom_vector(table, atom)
        return out
    out = np.zeros(n, dtype=bool)
    for clause in formula.clauses:
        acc = np.ones(n, dtype=bool)
        for atom in clause:
            acc &= _atom_vector(table, atom)
        out |= acc
    return out


def label_mask(table: PairTable, pair_filter: str) -> np.ndarray:
    cache = table._caches.setdefault("labels", {})
    mask = cache.get(pair_filter)
    if mask is None:
        if pair_filter == "all":
            mask = np.ones(len(table.pairs), dtype=bool)
        else:
            want = POSITIVE if pair_filter == "positives" else "-"
            mask = np.fromiter(
                (lab == want for _, _, lab in table.pairs),
                dtype=bool,
                count=len(table.pairs),
            )
        cache[pair_filter] = mask
    return mask


def true_count(
    formula: Formula,
    target: QueryTarget,
    pairs: Optional[PairTable] = None,
    datasets: Optional[dict[str, Dataset]] = None,
) -> int:
    """Exact number of rows of the target satisfying the formula."""
    if target.kind == "pairs":
        if pairs is None:
            raise ValueError("no pair table bound for pairs target")
        if len(pairs.pairs) == 0:
            return 0
        vec = formula_vector(pairs, formula)
        return int((vec & label_mask(pairs, target.pair_filter)).sum())
    if not datasets or target.dataset_id not in (datasets or {}):
        raise ValueError(f"unknown dataset: {target.dataset_id!r}")
    ds = datasets[target.dataset_id]
    if not formula.is_single_record:
        raise FormulaError("base-table target requires single-record atoms")
    return sum(1 for row in ds.rows if formula.evaluate_record(ds.schema, row))


@dataclass(frozen=True)
class QualityReport:
    """Task-quality metrics of a formula on a labeled pair table.

    Blocking populates recall and cost; matching populates precision,
    recall and f1. precision_undefined flags the empty-selection case
    where precision is reported as 0 by convention.
    """

    recall: float
    cost: float = 0.0
    precision: float = 0.0
    f1: float = 0.0
    precision_undefined: bool = False


def quality_report(formula: Formula, pairs: PairTable, task: str) -> QualityReport:
    if task not in ("blocking", "matching"):
        raise ValueError(f"unknown task: {task}")
    if pairs.size == 0 or pairs.positives == 0:
        raise ValueError("quality report needs a non-empty pair table with positives")
    selected = formula_vector(pairs, formula)
    pos = label_mask(pairs, "positives")
    tp = int((selected & pos).sum())
    total_selected = int(selected.sum())
    recall = tp / pairs.positives
    if task == "blocking":
        return QualityReport(recall=recall, cost=total_selected / pairs.size)
    if total_selected == 0:
        return QualityReport(recall=0.0, precision=0.0, f1=0.0, precision_undefined=True)
    precision = tp / total_selected
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return QualityReport(recall=recall, precision=precision, f1=f1)


def cross_product_cost(formula: Formula, d1: Dataset, d2: Dataset) -> float:
    """Exact blocking cost over D1 x D2; only sensible for small datasets."""
    if len(d1) == 0 or len(d2) == 0:
        return 0.0
    hits = 0
    for left in d1.rows:
        for right in d2.rows:
            if formula.evaluate_pair(d1.schema, left, right):
                hits += 1
    return hits / (len(d1) * len(d2))

"""Robot cleaning engineers: sampled cleaner models driving the four
strategy families against a live session.

BS1/MS1 see noisy counts (LC only) and keep a local belief state about how
many matches/non-matches their current rule already covers. BS2/MS2 see
booleans only (one top-k profiling query, then threshold comparisons
against public constants). Strategies talk to the engine exclusively; the
ground truth is touched once, after the run, to score the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import PairTable
from .engine import QueryRequest, Session, TranslatorChoice, submit
from .formulas import Formula, NullPredicate, SimilarityPredicate
from .mechanisms import Tolerance
from .queries import QualityReport, QueryTarget, quality_report
from .similarity import Transformation

STRATEGIES = ("BS1", "BS2", "MS1", "MS2")
NOISE_TRUST = ("neutral", "optimistic", "pessimistic")

_TRANSFORM_POOL = ("qgram2", "qgram3", "spaceTokenize")
_SIMILARITY_POOL = (
    "levenshtein", "jaro", "smithWaterman", "cosine", "jaccard", "overlap", "absDiffLen",
)

MAX_PASSES = 4


@dataclass(frozen=True)
class CleanerModel:
    """One sampled engineer: which predicates they try, in what order, and
    how they judge noisy evidence. attribute_count == 0 means all attributes."""

    attribute_count: int                  # x1 (0 = every attribute)
    transformations: tuple[str, ...]      # x2
    similarities: tuple[str, ...]         # x3
    theta_low: float                      # x4
    theta_high: float                     # x5
    theta_count: int                      # x6
    theta_descending: bool                # x6 order
    order_seed: int                       # x7
    match_fraction: float                 # x8
    nonmatch_fraction: float              # x9
    relax_factor: int                     # x10
    noise_trust: str                      # x11


def sample_cleaner(strategy: str, rng: np.random.Generator) -> CleanerModel:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy}")
    n_transforms = int(rng.integers(1, 4))
    transforms = tuple(
        _TRANSFORM_POOL[i] for i in rng.permutation(len(_TRANSFORM_POOL))[:n_transforms]
    )
    n_sims = int(rng.integers(2, 7))
    sims = tuple(
        _SIMILARITY_POOL[i] for i in rng.permutation(len(_SIMILARITY_POOL))[:n_sims]
    )
    return CleanerModel(
        attribute_count=int(rng.choice((2, 3, 0))),
        transformations=transforms,
        similarities=sims,
        theta_low=float(rng.uniform(0.0, 0.5)),
        theta_high=float(rng.uniform(0.5, 1.0)),
        theta_count=int(rng.integers(2, 7)),
        theta_descending=bool(rng.random() < 0.5),
        order_seed=int(rng.integers(0, 2**31 - 1)),
        match_fraction=float(rng.uniform(0.2, 0.5)),
        nonmatch_fraction=float(rng.uniform(0.1, 0.2)),
        relax_factor=int(rng.choice((2, 3))),
        noise_trust=str(rng.choice(NOISE_TRUST)),
    )


@dataclass
class StrategyRun:
    strategy: str
    task: str
    model: CleanerModel
    alpha: float
    output: Optional[Formula]
    quality: Optional[QualityReport]
    queries_asked: int = 0
    queries_answered: int = 0
    queries_denied: int = 0
    spent: float = 0.0
    truncated: bool = False  # stopped early by a budget denial
    accepted: list = field(default_factory=list)


class _Denied(Exception):
    pass


class _Robot:
    """Shared machinery: query bookkeeping and the candidate schedule."""

    def __init__(self, model: CleanerModel, session: Session, task: str,
                 alpha: float, cost_cutoff: float, translator: TranslatorChoice):
        self.model = model
        self.session = session
        self.task = task
        self.alpha = alpha
        self.cost_cutoff = cost_cutoff
        self.translator = translator
        self.tol = Tolerance(alpha, session.default_beta)
        self.schema = session.data.schema
        self.pair_size, self.pos_total = session.data.pair_table.public_counts
        self.neg_total = self.pair_size - self.pos_total
        self.asked = self.answered = self.denied = 0
        self.spent = 0.0
        self.truncated = False
        self.accepted: list[SimilarityPredicate] = []

    def ask(self, req: QueryRequest):
        self.asked += 1
        resp = submit(self.session, req)
        self.spent = resp.spent_total
        if resp.status == "denied":
            self.denied += 1
            raise _Denied()
        self.answered += 1
        return resp.answer

    def adjust(self, value: float, count_kind: str) -> float:
        """Fold the engineer's trust style into a noisy count: optimistic
        cleaners bump match counts up and non-match counts down by alpha/5,
        pessimistic ones do the reverse."""
        trust = self.model.noise_trust
        if trust == "neutral":
            return value
        shift = self.alpha / 5.0
        if trust == "pessimistic":
            shift = -shift
        return value + shift if count_kind == "match" else value - shift

    def profile_attributes(self, use_topk: bool) -> list[str]:
        """Rank attributes by missing values (fewest first) and keep x1."""
        attrs = list(self.schema.attributes)
        want = self.model.attribute_count or len(attrs)
        want = min(want, len(attrs))
        if not self._has_base():
            # no base table bound: nothing to profile, take schema order
            return attrs[:want]
        formulas = [Formula.disjunction([NullPredicate(a)]) for a in attrs]
        target = QueryTarget.base_table(self._base_id())
        if use_topk:
            if want >= len(attrs):
                return attrs
            selected = self.ask(QueryRequest(
                type="LCT", target=target, tolerance=self.tol,
                formulas=tuple(formulas), k=want, order="smallest",
            ))
            return [attrs[i] for i in selected]
        noisy = []
        for a, f in zip(attrs, formulas):
            noisy.append((self.ask(QueryRequest(
                type="LC", target=target, tolerance=self.tol, formula=f,
            )), a))
        noisy.sort(key=lambda t: (t[0], attrs.index(t[1])))
        return [a for _, a in noisy[:want]]

    def _has_base(self) -> bool:
        return bool(self.session.data.datasets)

    def _base_id(self) -> str:
        return sorted(self.session.data.datasets)[0]

    def candidates(self, attrs: list[str]) -> list[SimilarityPredicate]:
        """Rule families in x7-shuffled order; each family scans its
        thresholds in the model's chosen direction."""
        m = self.model
        thetas = np.linspace(m.theta_low, m.theta_high, m.theta_count)
        if m.theta_descending:
            thetas = thetas[::-1]
        families = [
            (a, t, s)
            for a in attrs
            for t in m.transformations
            for s in m.similarities
        ]
        order = np.random.default_rng(m.order_seed).permutation(len(families))
        out = []
        for i in order:
            a, t, s = families[i]
            transform = Transformation.parse(t)
            for theta in thetas:
                out.append(SimilarityPredicate(a, transform, s, float(round(theta, 6))))
        return out


def _pairs_target(pair_filter: str) -> QueryTarget:
    return QueryTarget.pairs(pair_filter)


def _run_blocking_counts(robot: _Robot) -> list[SimilarityPredicate]:
    """BS1: two noisy counts per candidate, belief-tracked coverage."""
    m = robot.model
    attrs = robot.profile_attributes(use_topk=False)
    cands = robot.candidates(attrs)
    x8, x9 = m.match_fraction, m.nonmatch_fraction
    accepted = robot.accepted
    bel_pos = bel_neg = 0.0
    for _ in range(MAX_PASSES):
        changed = False
        for p in cands:
            if p in accepted:
                continue
            remaining_pos = robot.pos_total - bel_pos
            remaining_neg = robot.neg_total - bel_neg
            if remaining_pos < 1.0:
                return accepted
            trial = Formula.disjunction(accepted + [p])
            a_pos = robot.ask(QueryRequest(
                type="LC", target=_pairs_target("positives"), tolerance=robot.tol, formula=trial,
            ))
            a_neg = robot.ask(QueryRequest(
                type="LC", target=_pairs_target("negatives"), tolerance=robot.tol, formula=trial,
            ))
            new_pos = min(max(robot.adjust(a_pos, "match") - bel_pos, 0.0), remaining_pos)
            new_neg = min(max(robot.adjust(a_neg, "nonmatch") - bel_neg, 0.0), remaining_neg)
            covered_after = bel_pos + new_pos + bel_neg + new_neg
            if (
                new_pos >= x8 * remaining_pos
                and new_neg <= x9 * remaining_neg
                and covered_after < robot.cost_cutoff
            ):
                accepted.append(p)
                bel_pos += new_pos
                bel_neg += new_neg
                changed = True
        if not accepted:
            x8 = x8 / m.relax_factor
            x9 = min(x9 * m.relax_factor, 1.0)
        elif not changed:
            break
    return accepted


def _run_blocking_booleans(robot: _Robot) -> list[SimilarityPredicate]:
    """BS2: top-k profiling, then per-candidate threshold comparisons
    against public-count cutoffs."""
    m = robot.model
    attrs = robot.profile_attributes(use_topk=True)
    cands = robot.candidates(attrs)
    x8, x9 = m.match_fraction, m.nonmatch_fraction
    accepted = robot.accepted
    for _ in range(MAX_PASSES):
        changed = False
        for p in cands:
            if p in accepted:
                continue
            alone = Formula.disjunction([p])
            catches = robot.ask(QueryRequest(
                type="LCC", target=_pairs_target("positives"), tolerance=robot.tol,
                formula=alone, threshold=x8 * robot.pos_total, direction=">",
                translator=robot.translator,
            ))
            if not catches:
                continue
            few_negatives = robot.ask(QueryRequest(
                type="LCC", target=_pairs_target("negatives"), tolerance=robot.tol,
                formula=alone, threshold=x9 * robot.neg_total, direction="<",
                translator=robot.translator,
            ))
            if not few_negatives:
                continue
            trial = Formula.disjunction(accepted + [p])
            cheap = robot.ask(QueryRequest(
                type="LCC", target=_pairs_target("all"), tolerance=robot.tol,
                formula=trial, threshold=robot.cost_cutoff, direction="<",
                translator=robot.translator,
            ))
            if cheap:
                accepted.append(p)
                changed = True
        if not accepted:
            x8 = x8 / m.relax_factor
            x9 = min(x9 * m.relax_factor, 1.0)
        elif not changed:
            break
    return accepted


def _run_matching_counts(robot: _Robot) -> list[SimilarityPredicate]:
    """MS1: grow a conjunction; keep predicates that miss few of the
    believed-kept matches while pruning many believed-kept non-matches."""
    m = robot.model
    attrs = robot.profile_attributes(use_topk=False)
    cands = robot.candidates(attrs)
    x8, x9 = m.match_fraction, m.nonmatch_fraction
    accepted = robot.accepted
    bel_pos = float(robot.pos_total)
    bel_neg = float(robot.neg_total)
    for _ in range(MAX_PASSES):
        changed = False
        for p in cands:
            if p in accepted:
                continue
            if bel_neg < 1.0:
                return accepted
            trial = Formula.conjunction(accepted + [p])
            a_pos = robot.ask(QueryRequest(
                type="LC", target=_pairs_target("positives"), tolerance=robot.tol, formula=trial,
            ))
            a_neg = robot.ask(QueryRequest(
                type="LC", target=_pairs_target("negatives"), tolerance=robot.tol, formula=trial,
            ))
            kept_pos = min(max(robot.adjust(a_pos, "match"), 0.0), bel_pos)
            kept_neg = min(max(robot.adjust(a_neg, "nonmatch"), 0.0), bel_neg)
            missed = bel_pos - kept_pos
            pruned = bel_neg - kept_neg
            if missed <= x8 * bel_pos and pruned >= x9 * bel_neg:
                accepted.append(p)
                bel_pos, bel_neg = kept_pos, kept_neg
                changed = True
        if not accepted:
            x8 = min(x8 * m.relax_factor, 0.9)
            x9 = x9 / m.relax_factor
        elif not changed:
            break
    return accepted


def _run_matching_booleans(robot: _Robot) -> list[SimilarityPredicate]:
    """MS2: threshold comparisons on how much of the public totals the
    grown conjunction keeps."""
    m = robot.model
    attrs = robot.profile_attributes(use_topk=True)
    cands = robot.candidates(attrs)
    x8, x9 = m.match_fraction, m.nonmatch_fraction
    accepted = robot.accepted
    for _ in range(MAX_PASSES):
        changed = False
        for p in cands:
            if p in accepted:
                continue
            trial = Formula.conjunction(accepted + [p])
            keeps_matches = robot.ask(QueryRequest(
                type="LCC", target=_pairs_target("positives"), tolerance=robot.tol,
                formula=trial, threshold=(1.0 - x8) * robot.pos_total, direction=">",
                translator=robot.translator,
            ))
            if not keeps_matches:
                continue
            prunes = robot.ask(QueryRequest(
                type="LCC", target=_pairs_target("negatives"), tolerance=robot.tol,
                formula=trial, threshold=(1.0 - x9) * robot.neg_total, direction="<",
                translator=robot.translator,
            ))
            if prunes:
                accepted.append(p)
                changed = True
        if not accepted:
            x8 = min(x8 * m.relax_factor, 0.9)
            x9 = x9 / m.relax_factor
        elif not changed:
            break
    return accepted


_RUNNERS = {
    "BS1": _run_blocking_counts,
    "BS2": _run_blocking_booleans,
    "MS1": _run_matching_counts,
    "MS2": _run_matching_booleans,
}


def strategy_task(strategy: str) -> str:
    return "blocking" if strategy.startswith("B") else "matching"


def run_strategy(
    model: CleanerModel,
    session: Session,
    strategy: str,
    alpha: float,
    cost_cutoff: float = 55.0,
    translator: TranslatorChoice = TranslatorChoice(),
    ground_truth: Optional[PairTable] = None,
) -> StrategyRun:
    """Drive one robot to completion (or budget denial) and score it.

    ground_truth defaults to the session's own pair table and is used only
    after the loop finishes, to fill in the QualityReport.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy}")
    task = strategy_task(strategy)
    robot = _Robot(model, session, task, alpha, cost_cutoff, translator)
    try:
        _RUNNERS[strategy](robot)
    except _Denied:
        robot.truncated = True
    accepted = robot.accepted
    output: Optional[Formula] = None
    if accepted:
        output = (
            Formula.disjunction(accepted) if task == "blocking" else Formula.conjunction(accepted)
        )
    truth = ground_truth if ground_truth is not None else session.data.pair_table
    quality = _score(output, truth, task)
    return StrategyRun(
        strategy=strategy,
        task=task,
        model=model,
        alpha=alpha,
        output=output,
        quality=quality,
        queries_asked=robot.asked,
        queries_answered=robot.answered,
        queries_denied=robot.denied,
        spent=robot.spent,
        truncated=robot.truncated,
        accepted=accepted,
    )


def _score(output: Optional[Formula], truth: Optional[PairTable], task: str) -> Optional[QualityReport]:
    if truth is None:
        return None
    if output is None:
        # No rule produced: worthless blocking recall, worthless matcher.
        return QualityReport(recall=0.0, cost=0.0, precision=0.0, f1=0.0, precision_undefined=True)
    return quality_report(output, truth, task)

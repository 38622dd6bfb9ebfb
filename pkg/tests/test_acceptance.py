"""Acceptance suite: one test per shipping criterion, each printed as a
single pass/fail line. Statistical criteria run at their stated trial
counts and tolerances under fixed seeds; time-bounded criteria assert
their wall-clock budgets.
"""

from __future__ import annotations

import math
import re
import time
from contextlib import contextmanager

import numpy as np
import pytest

from dptuner.accountant import (
    AccountantMode,
    LossLedger,
    PrivacyParams,
    WIDE_LAMBDA_GRID,
    moments_loss,
    sequential_loss,
)
from dptuner.cleaners import sample_cleaner, run_strategy
from dptuner.cli import main as cli_main
from dptuner.engine import (
    QueryRequest,
    SessionData,
    TranslatorChoice,
    open_session,
    session_status,
    submit,
)
from dptuner.formulas import Formula, SimilarityPredicate
from dptuner.mechanisms import (
    LaplaceSpec,
    MechanismRecord,
    Tolerance,
    noise_down,
    run_lcm,
    run_lcmmp,
    run_lcmp,
    run_lm,
    run_ltm,
    sample_laplace,
)
from dptuner.queries import QueryTarget, quality_report, true_count
from dptuner.similarity import Transformation
from dptuner.synth import SynthConfig, generate_pair_table

from test_queries import oracle_count, oracle_quality, random_formula, random_table

BETA15 = math.exp(-15)
PAPER_MODE = AccountantMode(
    mode="moments", lambda_grid=WIDE_LAMBDA_GRID, tail_rule="paperLiteral"
)
T_GRID = (0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.64)
B_GRID = (0.004, 0.008, 0.02, 0.04, 0.1, 0.2, 0.5)


@contextmanager
def criterion(name: str):
    try:
        yield
    except Exception:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def spearman(xs, ys) -> float:
    from scipy.stats import spearmanr

    rho, _ = spearmanr(xs, ys)
    return float(rho)


# -------------------------------------------------------------------------
# Criterion 1: translation arithmetic anchors via the CLI, under 1 second.
# -------------------------------------------------------------------------

def _cli_epsilon(capsys, *args, field="epsilon") -> float:
    assert cli_main(list(args)) == 0
    out = capsys.readouterr().out
    match = re.search(rf"{field}=([0-9.]+)", out)
    assert match, out
    return float(match.group(1))


def test_translation_anchors(capsys):
    with criterion("translation anchors: LCC 2.23, LC 1.5, LTM 6.92 (<1s)"):
        start = time.perf_counter()
        lcc = _cli_epsilon(capsys, "translate", "LCC", "10", "1e-10")
        assert lcc == pytest.approx(2.23, abs=0.005)
        lc = _cli_epsilon(capsys, "translate", "LC", "10", str(BETA15))
        assert lc == pytest.approx(1.5, abs=1e-4)
        ltm = _cli_epsilon(capsys, "translate", "LCT", "10", str(BETA15), "--L", "5", "--k", "2")
        assert ltm == pytest.approx(6.92, abs=0.01)
        assert time.perf_counter() - start < 1.0


# -------------------------------------------------------------------------
# Criterion 2: Monte-Carlo tolerance soundness at adversarial margins.
# -------------------------------------------------------------------------

def test_tolerance_soundness_suite():
    with criterion("tolerance soundness: LM/LCM/LTM/LCMP/LCMMP <= 0.06 at margin 1.01a (<2min)"):
        start = time.perf_counter()
        beta = 0.05
        tol = Tolerance(10.0, beta)
        n = 10_000
        margin = 10.0 * 1.01
        rates = {}

        g = np.random.default_rng(101)
        rates["LM"] = (
            sum(abs(run_lm(500.0, tol, g)[0] - 500.0) >= 10.0 for _ in range(n)) / n
        )

        g = np.random.default_rng(102)
        low = sum(run_lcm(100.0 - margin, 100.0, ">", tol, g)[0] for _ in range(n)) / n
        g = np.random.default_rng(103)
        high = sum(not run_lcm(100.0 + margin, 100.0, ">", tol, g)[0] for _ in range(n)) / n
        rates["LCM"] = max(low, high)

        g = np.random.default_rng(104)
        counts = [1000.0 + margin, 1000.0, 1000.0 - margin, 1000.0 - margin, 1000.0 - margin]
        bad = 0
        for _ in range(n):
            sel, _ = run_ltm(counts, 2, "largest", tol, g)
            if any(i >= 2 for i in sel) or 0 not in sel:
                bad += 1
        rates["LTM"] = bad / n

        g = np.random.default_rng(105)
        low = sum(run_lcmp(100.0 - margin, 100.0, ">", tol, 0.05, g)[0] for _ in range(n)) / n
        g = np.random.default_rng(106)
        high = sum(
            not run_lcmp(100.0 + margin, 100.0, ">", tol, 0.05, g)[0] for _ in range(n)
        ) / n
        rates["LCMP"] = max(low, high)

        g = np.random.default_rng(107)
        low = sum(run_lcmmp(100.0 - margin, 100.0, ">", tol, 5, g)[0] for _ in range(n)) / n
        g = np.random.default_rng(108)
        high = sum(
            not run_lcmmp(100.0 + margin, 100.0, ">", tol, 5, g)[0] for _ in range(n)
        ) / n
        rates["LCMMP"] = max(low, high)

        for kind, rate in rates.items():
            assert rate <= 0.06, f"{kind} violation rate {rate}"
        assert time.perf_counter() - start < 120


# -------------------------------------------------------------------------
# Criterion 3: the top-k worked example selects the two largest counts.
# -------------------------------------------------------------------------

def test_ltm_worked_example():
    with criterion("top-k example: {10000,8000,200,100,50}, k=2 -> {A1,A2} >= 95%"):
        counts = [10000.0, 8000.0, 200.0, 100.0, 50.0]
        g = np.random.default_rng(109)
        hits = 0
        n = 10_000
        for _ in range(n):
            sel, _ = run_ltm(counts, 2, "largest", Tolerance(10.0, 0.05), g)
            hits += set(sel) == {0, 1}
        assert hits / n >= 0.95


# -------------------------------------------------------------------------
# Criterion 4: NoiseDown's composed marginal matches the tighter Laplace.
# -------------------------------------------------------------------------

def test_noise_down_marginal():
    with criterion("NoiseDown marginal: composed draws match Lap(1/0.2) deciles +-0.02 (<30s)"):
        start = time.perf_counter()
        eps, eps_p = 0.1, 0.2
        n = 50_000
        g = np.random.default_rng(110)
        out = np.empty(n)
        for i in range(n):
            out[i] = noise_down(sample_laplace(1 / eps, g), eps, eps_p, g)
        b = 1 / eps_p
        for i in range(1, 10):
            p = i / 10
            q = b * math.log(2 * p) if p < 0.5 else -b * math.log(2 * (1 - p))
            assert abs(float(np.mean(out <= q)) - p) <= 0.02
        assert time.perf_counter() - start < 30


# -------------------------------------------------------------------------
# Criterion 5: moments accounting beats sequential on the 100-record ledger.
# -------------------------------------------------------------------------

def test_accountant_contrast():
    with criterion("accountant contrast: 100 x Lap(1), delta=3e-7 -> eps in [70,85] < 100"):
        spec = LaplaceSpec(b=1.0, epsilon=1.0)
        records = [MechanismRecord("LM", (spec,), (spec,)) for _ in range(100)]
        eps = moments_loss(records, None, 3e-7, AccountantMode())
        seq = sequential_loss(records)
        assert seq == pytest.approx(100.0)
        assert 70.0 <= eps <= 85.0
        assert eps == pytest.approx(76.9, abs=0.2)
        assert eps < seq


# -------------------------------------------------------------------------
# Criterion 6: fuzzed sessions never exceed B; denials change nothing.
# -------------------------------------------------------------------------

def _random_request(rng, table) -> QueryRequest:
    q2 = Transformation.parse("qgram2")
    sims = ("levenshtein", "jaccard", "jaro", "overlap")

    def rand_formula():
        atoms = [
            SimilarityPredicate(
                table.schema.attributes[rng.integers(0, len(table.schema.attributes))],
                q2,
                sims[rng.integers(0, len(sims))],
                float(rng.random()),
            )
            for _ in range(rng.integers(1, 3))
        ]
        return Formula.disjunction(atoms)

    alpha = float(rng.choice(T_GRID)) * table.size * float(rng.uniform(0.5, 20.0))
    beta = float(rng.choice((BETA15, 0.05)))
    tol = Tolerance(alpha, beta)
    target = QueryTarget.pairs(("all", "positives", "negatives")[rng.integers(0, 3)])
    kind = rng.integers(0, 3)
    if kind == 0:
        return QueryRequest(type="LC", target=target, tolerance=tol, formula=rand_formula())
    if kind == 1:
        translator = TranslatorChoice.from_dict(
            (None, {"name": "LCMP", "f": 0.05}, {"name": "LCMMP", "m": 5})[rng.integers(0, 3)]
        )
        return QueryRequest(
            type="LCC", target=target, tolerance=tol, formula=rand_formula(),
            threshold=float(rng.uniform(0, table.size)),
            direction=(">", "<", ">=", "<=")[rng.integers(0, 4)],
            translator=translator,
        )
    L = int(rng.integers(2, 5))
    return QueryRequest(
        type="LCT", target=target, tolerance=tol,
        formulas=tuple(rand_formula() for _ in range(L)),
        k=int(rng.integers(1, L + 1)),
        order=("largest", "smallest")[rng.integers(0, 2)],
    )


def test_engine_safety_fuzz():
    with criterion("engine safety fuzz: 200 sessions never exceed B; denials free (<2min)"):
        start = time.perf_counter()
        _, _, table = generate_pair_table(SynthConfig(pairs=30, seed=17))
        rng = np.random.default_rng(111)
        for s in range(200):
            B = float(rng.choice(B_GRID))
            mode = (
                AccountantMode.sequential()
                if s % 2 == 0
                else AccountantMode(
                    mode="moments",
                    lambda_grid=WIDE_LAMBDA_GRID if s % 4 == 1 else AccountantMode().lambda_grid,
                    tail_rule="paperLiteral" if s % 4 == 1 else "rdpConversion",
                )
            )
            session = open_session(
                SessionData(pair_table=table),
                PrivacyParams(B=B, delta=BETA15),
                mode=mode,
                seed=int(rng.integers(0, 2**31)),
            )
            for _ in range(15):
                req = _random_request(rng, table)
                before = session_status(session)
                resp = submit(session, req)
                after = session_status(session)
                assert session.ledger.analyze_loss() <= B + 1e-9
                assert after["spent"] <= B + 1e-9
                if resp.status == "denied":
                    assert after["spent"] == before["spent"]
                    assert after["answered"] == before["answered"]
                    assert len(session.ledger.records) == before["answered"]
                else:
                    assert resp.spent_total >= before["spent"] - 1e-12
        assert time.perf_counter() - start < 120


# -------------------------------------------------------------------------
# Criterion 7: trend reproduction on the bundled synthetic data (|Dt|=100).
# -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def trend_data():
    return generate_pair_table(SynthConfig(pairs=100, seed=7))


_TREND_ELAPSED: dict[str, float] = {}


def _run_cell(trend_data, strategy, alpha, budget, runs=20, translator=TranslatorChoice(),
              base_seed=2024):
    d1, d2, table = trend_data
    recalls = []
    for r in range(runs):
        model = sample_cleaner(strategy, np.random.default_rng(np.random.SeedSequence((base_seed, r))))
        seed_seq = np.random.SeedSequence(
            (base_seed, r, int(alpha * 1000), 0 if math.isinf(budget) else int(budget * 1e6),
             hash(translator.name) % 1000)
        )
        session = open_session(
            SessionData(pair_table=table, datasets={"d1": d1, "d2": d2}),
            PrivacyParams(B=budget, delta=BETA15),
            mode=PAPER_MODE,
            seed=int(seed_seq.generate_state(1)[0]),
        )
        run = run_strategy(model, session, strategy, alpha, cost_cutoff=55,
                           translator=translator)
        recalls.append(run.quality.recall)
    return float(np.median(recalls))


def test_trend_tolerance_at_infinite_budget(trend_data):
    with criterion("trend (a): B=inf, BS1 median recall non-increasing in t; >=0.9 at t=0.01"):
        start = time.perf_counter()
        medians = [_run_cell(trend_data, "BS1", t * 100, math.inf) for t in T_GRID]
        _TREND_ELAPSED["a"] = time.perf_counter() - start
        assert medians[0] >= 0.9
        assert spearman(T_GRID, medians) <= 0.0


def test_trend_budget_at_fixed_tolerance(trend_data):
    with criterion("trend (b): t=0.08, median recall non-decreasing in B up to a plateau"):
        start = time.perf_counter()
        medians = [_run_cell(trend_data, "BS1", 8.0, B) for B in B_GRID]
        _TREND_ELAPSED["b"] = time.perf_counter() - start
        assert spearman(B_GRID, medians) >= 0.0
        for lo, hi in zip(medians, medians[1:]):
            assert hi >= lo - 0.05  # non-decreasing up to plateau wobble
        peak = max(medians)
        assert peak >= 0.8
        assert medians[0] <= 0.5 * peak  # small budgets really are starved
        assert abs(medians[-1] - peak) <= 0.1  # plateau reached by the last cells
        assert abs(medians[-2] - peak) <= 0.1


def test_trend_unimodal_at_fixed_budget(trend_data):
    with criterion("trend (c): B=0.1, interior-t median strictly above both endpoints"):
        start = time.perf_counter()
        medians = [_run_cell(trend_data, "BS1", t * 100, 0.1) for t in T_GRID]
        _TREND_ELAPSED["c"] = time.perf_counter() - start
        interior = max(medians[1:-1])
        assert interior > medians[0]
        assert interior > medians[-1]


# -------------------------------------------------------------------------
# Criterion 8: multi-poking reaches target recall at no larger budget.
# -------------------------------------------------------------------------

def test_data_dependent_translator_benefit(trend_data):
    with criterion("translator benefit: BS2+LCMMP needs B no larger than BS2+LCM"):
        start = time.perf_counter()
        lcm = {
            B: _run_cell(trend_data, "BS2", 8.0, B, translator=TranslatorChoice("LCM"))
            for B in B_GRID
        }
        lcmmp = {
            B: _run_cell(trend_data, "BS2", 8.0, B, translator=TranslatorChoice("LCMMP", m=5))
            for B in B_GRID
        }

        def needed(table, target):
            for B in B_GRID:
                if table[B] >= target:
                    return B
            return math.inf

        targets = [0.5, 0.8, 0.9, max(lcm.values())]
        for target in targets:
            assert needed(lcmmp, target) <= needed(lcm, target), (
                f"target {target}: LCMMP needs {needed(lcmmp, target)}, "
                f"LCM needs {needed(lcm, target)}"
            )
        _TREND_ELAPSED["d"] = time.perf_counter() - start


def test_trend_suite_runtime():
    with criterion("trend suite total runtime < 15 min"):
        assert sum(_TREND_ELAPSED.values()) < 900


# -------------------------------------------------------------------------
# Criterion 9: exact oracle equivalence on 1000 random instances.
# -------------------------------------------------------------------------

def test_oracle_equivalence_1000():
    with criterion("oracle equivalence: true_count & quality_report exact on 1000 instances"):
        rng = np.random.default_rng(112)
        for _ in range(1000):
            table = random_table(rng, int(rng.integers(1, 201)))
            formula = random_formula(rng)
            pf = ("all", "positives", "negatives")[rng.integers(0, 3)]
            assert (
                true_count(formula, QueryTarget.pairs(pf), pairs=table)
                == oracle_count(formula, table, pf)
            )
            if table.positives > 0:
                task = ("blocking", "matching")[rng.integers(0, 2)]
                rep = quality_report(formula, table, task)
                for key, val in oracle_quality(formula, table, task).items():
                    assert getattr(rep, key) == pytest.approx(val)

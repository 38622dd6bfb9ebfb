from __future__ import annotations

import math

import numpy as np
import pytest

from dptuner.mechanisms import (
    BETA_DEFAULT,
    LaplaceSpec,
    MechanismError,
    MechanismRecord,
    Tolerance,
    derived_lcc_tolerance,
    derived_lct_tolerance,
    noise_down,
    run_lcm,
    run_lcmmp,
    run_lcmp,
    run_lm,
    run_ltm,
    sample_laplace,
    translate_lcm,
    translate_lcmmp,
    translate_lcmp,
    translate_lm,
    translate_ltm,
)

B15 = math.exp(-15)


def rng(seed=0):
    return np.random.default_rng(seed)


# ------------------------------------------------------------ invariants --

def test_tolerance_invariants():
    with pytest.raises(MechanismError):
        Tolerance(0.0)
    with pytest.raises(MechanismError):
        Tolerance(-1.0)
    with pytest.raises(MechanismError):
        Tolerance(10, 0.0)
    with pytest.raises(MechanismError):
        Tolerance(10, 1.0)
    assert Tolerance(5.0).beta == BETA_DEFAULT


def test_spec_invariants():
    with pytest.raises(MechanismError):
        LaplaceSpec(b=-1, epsilon=1)
    with pytest.raises(MechanismError):
        LaplaceSpec(b=1, epsilon=0)
    with pytest.raises(MechanismError):
        MechanismRecord("nonsense", (LaplaceSpec(1, 1),), ())
    with pytest.raises(MechanismError):
        MechanismRecord("LM", (), ())


# ------------------------------------------------------------ translation --

def test_translate_lm_anchors():
    spec = translate_lm(Tolerance(10, B15))
    assert spec.b == pytest.approx(10 / 15)
    assert spec.epsilon == pytest.approx(1.5)
    assert translate_lm(Tolerance(80, B15)).epsilon == pytest.approx(0.1875)
    unit = translate_lm(Tolerance(1, math.exp(-1)))
    assert unit.b == pytest.approx(1.0)
    assert unit.epsilon == pytest.approx(1.0)


def test_translate_epsilon_scales_with_sensitivity():
    base = translate_lm(Tolerance(10, B15), sensitivity=1)
    doubled = translate_lm(Tolerance(10, B15), sensitivity=2)
    # the noise scale is pinned by the tolerance; cost doubles with m
    assert doubled.b == pytest.approx(base.b)
    assert doubled.epsilon == pytest.approx(2 * base.epsilon)
    assert doubled.epsilon * doubled.b == pytest.approx(2.0)


def test_translate_lm_weak_tolerance_limit():
    assert translate_lm(Tolerance(1e9, B15)).epsilon < 1e-7


def test_translate_lcm_anchor():
    spec = translate_lcm(Tolerance(10, 1e-10))
    assert spec.epsilon == pytest.approx(2.2333, abs=5e-4)
    with pytest.raises(MechanismError):
        translate_lcm(Tolerance(10, 0.6))


def test_translate_ltm_anchor():
    spec = translate_ltm(Tolerance(10, B15), formula_count=5, k=2)
    assert spec.b == pytest.approx(0.289, abs=5e-4)
    assert spec.epsilon == pytest.approx(6.9210, abs=1e-3)
    assert spec.copies == 5
    with pytest.raises(MechanismError):
        translate_ltm(Tolerance(10, B15), formula_count=3, k=4)


def test_translate_minimality_monotone():
    # any smaller noise scale costs strictly more epsilon
    tol = Tolerance(10, B15)
    spec = translate_lm(tol)
    for shrink in (0.5, 0.9, 0.99):
        assert 1.0 / (spec.b * shrink) > spec.epsilon


def test_translate_lcmp_anchor():
    poke, escalation = translate_lcmp(Tolerance(80, B15), f=0.05)
    assert poke.epsilon == pytest.approx(0.00894, abs=5e-5)
    alpha0 = math.log(1 / B15) / poke.epsilon
    assert alpha0 == pytest.approx(1677.5, abs=0.5)
    assert alpha0 - 80 == pytest.approx(1597.5, abs=0.5)
    # escalation stage runs the plain comparison at beta/2
    assert escalation.epsilon == pytest.approx(15.0 / 80.0)
    with pytest.raises(MechanismError):
        translate_lcmp(Tolerance(80, B15), f=1.5)


def test_translate_lcmmp_anchor():
    spec = translate_lcmmp(Tolerance(80, B15), m=5)
    assert spec.epsilon == pytest.approx(0.1990, abs=5e-4)
    # per-iteration decision bands alpha_i = m*alpha/(i+1)
    bands = [math.log(5 / (2 * B15)) / ((i + 1) * spec.epsilon / 5) for i in range(4)]
    assert bands == pytest.approx([400.0, 200.0, 400.0 / 3, 100.0])
    with pytest.raises(MechanismError):
        translate_lcmmp(Tolerance(80, B15), m=1)


def test_derived_tolerances():
    assert derived_lcc_tolerance(Tolerance(10, B15)) == pytest.approx(9.538, abs=5e-4)
    assert derived_lcc_tolerance(Tolerance(15, B15)) == pytest.approx(14.307, abs=5e-4)
    with pytest.raises(MechanismError):
        derived_lcc_tolerance(Tolerance(10, 0.7))
    with pytest.raises(MechanismError):
        Tolerance(0, B15)  # alpha=0 rejected by the type invariant
    assert derived_lct_tolerance(Tolerance(10, B15), 5, 2) == pytest.approx(13.07, abs=5e-3)
    assert derived_lct_tolerance(Tolerance(10, B15), 1, 1) == pytest.approx(10.0)
    assert derived_lct_tolerance(Tolerance(10, B15), 10, 1) == pytest.approx(13.07, abs=5e-3)


# --------------------------------------------------------------- sampling --

def test_sample_laplace_statistics():
    g = rng(99)
    draws = np.array([sample_laplace(1.0, g) for _ in range(200_000)])
    tail = float(np.mean(np.abs(draws) >= 3.0))
    assert tail == pytest.approx(math.exp(-3), abs=2e-3)
    assert abs(draws.mean()) < 0.01
    g = rng(100)
    wide = np.array([sample_laplace(2.0, g) for _ in range(200_000)])
    assert wide.var() / draws.var() == pytest.approx(4.0, rel=0.05)
    with pytest.raises(MechanismError):
        sample_laplace(0.0, g)


def test_determinism_under_fixed_seed():
    for runner in (
        lambda g: run_lm(100, Tolerance(10, 0.05), g),
        lambda g: run_lcm(100, 90, ">", Tolerance(10, 0.05), g),
        lambda g: run_ltm([5, 4, 3], 2, "largest", Tolerance(10, 0.05), g),
        lambda g: run_lcmp(100, 90, ">", Tolerance(10, 0.05), 0.05, g),
        lambda g: run_lcmmp(100, 90, ">", Tolerance(10, 0.05), 5, g),
    ):
        a, rec_a = runner(rng(7))
        b, rec_b = runner(rng(7))
        assert a == b
        assert rec_a.executed_specs == rec_b.executed_specs


# ------------------------------------------------------------------- runs --

def test_run_lm_paper_example_coverage():
    g = rng(1)
    hits = sum(
        abs(run_lm(10000, Tolerance(10, 0.05), g)[0] - 10000) <= 10 for _ in range(10_000)
    )
    assert hits / 10_000 >= 0.94


def test_run_lcm_examples():
    g = rng(2)
    trues = sum(run_lcm(1000, 100, ">", Tolerance(10, 0.05), g)[0] for _ in range(2000))
    assert trues / 2000 >= 0.95
    # at q == c either answer is tolerance-compliant; just check determinism/type
    answer, record = run_lcm(100, 100, ">", Tolerance(10, 0.05), rng(3))
    assert isinstance(answer, bool)
    assert record.kind == "LCM"


def test_run_lcm_direction_reflection():
    tol = Tolerance(10, 0.05)
    # q far below c: "<" should answer True, ">" False
    assert run_lcm(10, 500, "<", tol, rng(4))[0] is True
    assert run_lcm(10, 500, ">", tol, rng(5))[0] is False
    assert run_lcm(10, 500, "<=", tol, rng(6))[0] is True
    assert run_lcm(900, 500, ">=", tol, rng(7))[0] is True
    with pytest.raises(MechanismError):
        run_lcm(10, 500, "!=", tol, rng(8))
    with pytest.raises(MechanismError):
        run_lcm(10, math.inf, ">", tol, rng(8))


def test_run_ltm_paper_example():
    counts = [10000, 8000, 200, 100, 50]
    g = rng(9)
    hits = 0
    for _ in range(2000):
        sel, _ = run_ltm(counts, 2, "largest", Tolerance(10, 0.05), g)
        hits += set(sel) == {0, 1}
    assert hits / 2000 >= 0.95


def test_run_ltm_k_equals_l_and_smallest():
    sel, record = run_ltm([5.0, 1.0, 3.0], 3, "largest", Tolerance(10, 0.05), rng(10))
    assert set(sel) == {0, 1, 2}
    assert record.ltm_components == 3
    sel, _ = run_ltm([10000.0, 50.0, 9000.0], 1, "smallest", Tolerance(10, 0.05), rng(11))
    assert sel == (1,)
    with pytest.raises(MechanismError):
        run_ltm([1.0], 1, "sideways", Tolerance(10, 0.05), rng(12))


def test_run_ltm_order_invariance_as_sets():
    counts = [900.0, 10.0, 500.0, 20.0, 700.0]
    perm = [2, 0, 4, 1, 3]
    sel_a, _ = run_ltm(counts, 2, "largest", Tolerance(1, 0.05), rng(13))
    sel_b, _ = run_ltm([counts[i] for i in perm], 2, "largest", Tolerance(1, 0.05), rng(14))
    assert {counts[i] for i in sel_a} == {[counts[i] for i in perm][j] for j in sel_b}


def test_run_lcmp_paths_and_costs():
    tol = Tolerance(80, B15)
    # enormous margin: poke decides, only the prepaid cost is executed
    answer, record = run_lcmp(1_000_000, 0, ">", tol, 0.05, rng(15))
    assert answer is True
    assert record.metadata["escalated"] is False
    assert len(record.executed_specs) == 1
    assert record.executed_epsilon() == pytest.approx(0.00894, abs=5e-5)
    # zero margin: escalation is near-certain and costs eps0 + ln(1/beta)/alpha
    answer, record = run_lcmp(0, 0, ">", tol, 0.05, rng(16))
    assert record.metadata["escalated"] is True
    assert record.executed_epsilon() == pytest.approx(0.00894 + 15 / 80, abs=1e-4)
    assert record.executed_epsilon() == pytest.approx(record.worst_case_epsilon())


def test_run_lcmp_zero_margin_escalates_almost_always():
    g = rng(17)
    escalations = sum(
        run_lcmp(0, 0, ">", Tolerance(80, B15), 0.05, g)[1].metadata["escalated"]
        for _ in range(500)
    )
    assert escalations >= 495


def test_run_lcmmp_paths():
    tol = Tolerance(10, 0.05)
    answer, record = run_lcmmp(100 + 10 * 5 * 10, 100, ">", tol, 5, rng(18))
    assert answer is True
    assert record.metadata["stop_iteration"] == 0
    assert record.executed_epsilon() == pytest.approx(record.worst_case_epsilon() / 5)
    # worst case runs all pokes; executed equals the worst-case scale
    answer, record = run_lcmmp(100, 100, ">", tol, 5, rng(19))
    assert record.metadata["stop_iteration"] <= 4
    assert record.executed_epsilon() <= record.worst_case_epsilon() + 1e-12
    with pytest.raises(MechanismError):
        run_lcmmp(1, 0, ">", tol, 1, rng(20))


def test_path_accounting_invariant():
    g = rng(21)
    tol = Tolerance(10, 0.05)
    for _ in range(300):
        margin = float(g.uniform(-200, 200))
        _, rec = run_lcmp(margin, 0, ">", tol, 0.05, g)
        assert rec.executed_epsilon() <= rec.worst_case_epsilon() + 1e-12
        _, rec = run_lcmmp(margin, 0, ">", tol, 5, g)
        assert rec.executed_epsilon() <= rec.worst_case_epsilon() + 1e-12


# ------------------------------------------------------------- noise_down --

def test_noise_down_guards():
    with pytest.raises(MechanismError):
        noise_down(1.0, 0.2, 0.2, rng(22))
    with pytest.raises(MechanismError):
        noise_down(1.0, 0.2, 0.1, rng(22))
    with pytest.raises(MechanismError):
        noise_down(1.0, 0.0, 0.1, rng(22))


def test_noise_down_identity_limit():
    g = rng(23)
    eps = 0.3
    for _ in range(200):
        eta = sample_laplace(1 / eps, g)
        out = noise_down(eta, eps, eps * (1 + 1e-9), g)
        assert out == eta  # keep-branch weight is ~1


def test_noise_down_keep_probability():
    # keep-branch frequency over eta ~ Lap(1/eps) is exactly (eps/eps')^2
    g = rng(24)
    eps, eps_p = 0.1, 0.2
    kept = 0
    n = 20_000
    for _ in range(n):
        eta = sample_laplace(1 / eps, g)
        kept += noise_down(eta, eps, eps_p, g) == eta
    assert kept / n == pytest.approx((eps / eps_p) ** 2, abs=0.01)


def test_noise_down_variance_matches_target():
    g = rng(25)
    outs = []
    for _ in range(30_000):
        eta = sample_laplace(1 / 0.1, g)
        outs.append(noise_down(eta, 0.1, 0.2, g))
    outs = np.asarray(outs)
    assert outs.var() == pytest.approx(2 * 5.0**2, rel=0.05)
    assert abs(outs.mean()) < 0.15

from __future__ import annotations

import itertools

import pytest

from dptuner.data import Schema
from dptuner.formulas import (
    Formula,
    FormulaError,
    NullPredicate,
    SimilarityPredicate,
    formula_from_dict,
    formula_from_json,
    formula_to_dict,
    formula_to_json,
)
from dptuner.similarity import Transformation

SCHEMA = Schema(("name", "city"))
Q2 = Transformation.parse("qgram2")


def pred(theta, attr="name", sim="levenshtein"):
    return SimilarityPredicate(attr, Q2, sim, theta)


def test_predicate_semantics():
    p = pred(0.9)
    assert p.evaluate(SCHEMA, ("abc", "x"), ("abc", "y")) is True  # sim=1 > 0.9
    # levenshtein("abc","abd") = 1 - 1/3 ~ 0.667, not > 0.7
    assert pred(0.7).evaluate(SCHEMA, ("abc", None), ("abd", None)) is False
    # strict inequality: sim == theta is False
    assert pred(1.0).evaluate(SCHEMA, ("abc", ""), ("abc", "")) is False


def test_null_operand_is_false():
    p = pred(0.1)
    assert p.evaluate(SCHEMA, (None, "x"), ("abc", "y")) is False
    assert p.evaluate(SCHEMA, ("abc", "x"), (None, "y")) is False


def test_predicate_invariants():
    with pytest.raises(FormulaError):
        SimilarityPredicate("name", Q2, "levenshtein", 1.5)
    with pytest.raises(FormulaError):
        SimilarityPredicate("name", Q2, "nosuchsim", 0.5)
    with pytest.raises(KeyError):
        pred(0.5, attr="name").evaluate(Schema(("other",)), ("a",), ("b",))


def test_disjunction_conjunction_shortcuts():
    true_p = pred(0.0)   # identical values -> sim 1 > 0
    false_p = pred(1.0)  # nothing exceeds 1
    left, right = ("same", "x"), ("same", "y")
    assert Formula.disjunction([false_p, true_p]).evaluate_pair(SCHEMA, left, right)
    assert not Formula.conjunction([true_p, false_p]).evaluate_pair(SCHEMA, left, right)


def test_dnf_against_truth_table_oracle():
    # (p1 and p2) or p3 over all 8 atom assignments, via records engineered
    # to hit each assignment: p_i tests attribute value equality.
    schema = Schema(("a1", "a2", "a3"))
    preds = [
        SimilarityPredicate(f"a{i}", Q2, "jaccard", 0.5) for i in (1, 2, 3)
    ]
    formula = Formula.dnf([[preds[0], preds[1]], [preds[2]]])
    for bits in itertools.product([False, True], repeat=3):
        left = tuple("same" for _ in range(3))
        right = tuple("same" if bit else "diff" for bit in bits)
        expected = (bits[0] and bits[1]) or bits[2]
        assert formula.evaluate_pair(schema, left, right) is expected


def test_kind_mismatch_errors():
    null_f = Formula.disjunction([NullPredicate("name")])
    pair_f = Formula.disjunction([pred(0.5)])
    with pytest.raises(FormulaError):
        null_f.evaluate_pair(SCHEMA, ("a", "b"), ("a", "b"))
    with pytest.raises(FormulaError):
        pair_f.evaluate_record(SCHEMA, ("a", "b"))


def test_null_predicate():
    f = Formula.disjunction([NullPredicate("city")])
    assert f.evaluate_record(SCHEMA, ("a", None)) is True
    assert f.evaluate_record(SCHEMA, ("a", "salem")) is False


def test_formula_shape_invariants():
    with pytest.raises(FormulaError):
        Formula("disjunction", ())
    with pytest.raises(FormulaError):
        Formula("disjunction", ((),))
    with pytest.raises(FormulaError):
        Formula("nonsense", ((pred(0.5),),))
    with pytest.raises(FormulaError):
        Formula("conjunction", ((pred(0.5),), (pred(0.6),)))


def test_json_grammar_round_trip():
    formula = Formula.disjunction([pred(0.7), pred(0.3, attr="city", sim="jaccard")])
    obj = formula_to_dict(formula)
    assert obj["shape"] == "disjunction"
    assert obj["atoms"][0] == {
        "attr": "name", "transform": "qgram2", "sim": "levenshtein", "theta": 0.7,
    }
    assert formula_from_dict(obj) == formula
    assert formula_from_json(formula_to_json(formula)) == formula


def test_json_grammar_dnf_and_null():
    formula = Formula.dnf([[pred(0.5), pred(0.6)], [pred(0.7)]])
    assert formula_from_dict(formula_to_dict(formula)) == formula
    null_f = Formula.conjunction([NullPredicate("city")])
    obj = formula_to_dict(null_f)
    assert obj["atoms"][0] == {"attr": "city", "isNull": True}
    assert formula_from_dict(obj) == null_f


def test_json_grammar_errors():
    with pytest.raises(FormulaError):
        formula_from_dict({"shape": "xor", "atoms": [{}]})
    with pytest.raises(FormulaError):
        formula_from_dict({"shape": "disjunction", "atoms": []})
    with pytest.raises(FormulaError):
        formula_from_dict({"shape": "disjunction", "atoms": [{"attr": "a"}]})
    with pytest.raises(FormulaError):
        formula_from_dict({"shape": "dnf", "atoms": [{"attr": "a", "isNull": True}]})

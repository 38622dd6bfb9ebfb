"""Similarity predicates and boolean formulas, plus their JSON wire grammar.

Atoms come in two kinds: pair atoms (similarity of corresponding attribute
values strictly above a threshold) and single-record null tests. Formulas
combine atoms as a disjunction, a conjunction, or a DNF (list of conjunctive
clauses). Any predicate touching a NULL value evaluates to False.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from .data import Record, Schema
from .similarity import SIMILARITIES, Transformation, similarity

SHAPES = ("disjunction", "conjunction", "dnf")


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityPredicate:
    """sim(t(left.A), t(right.A)) > theta for a record pair."""

    attribute: str
    transform: Transformation
    sim: str
    theta: float

    def __post_init__(self):
        if self.sim not in SIMILARITIES:
            raise FormulaError(f"unknown similarity function: {self.sim}")
        if not (0.0 <= self.theta <= 1.0):
            raise FormulaError(f"theta must be in [0,1], got {self.theta}")

    def evaluate(self, schema: Schema, left: Record, right: Record) -> bool:
        idx = schema.index(self.attribute)
        lv, rv = left[idx], right[idx]
        if lv is None or rv is None:
            return False
        return similarity(self.sim, self.transform, lv, rv) > self.theta

    def describe(self) -> str:
        return f"{self.sim}({self.transform.name}({self.attribute})) > {self.theta:g}"


@dataclass(frozen=True)
class NullPredicate:
    """isNull(A) on a single record; used for profiling base tables."""

    attribute: str

    def evaluate(self, schema: Schema, record: Record) -> bool:
        return record[schema.index(self.attribute)] is None

    def describe(self) -> str:
        return f"isNull({self.attribute})"


Atom = Union[SimilarityPredicate, NullPredicate]


@dataclass(frozen=True)
class Formula:
    """Boolean combination of atoms.

    For disjunction/conjunction, clauses holds a single tuple of atoms.
    For dnf, clauses is the list of conjunctive clauses.
    """

    shape: str
    clauses: tuple[tuple[Atom, ...], ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise FormulaError(f"unknown formula shape: {self.shape}")
        if not self.clauses or any(not cl for cl in self.clauses):
            raise FormulaError("formula needs a non-empty atom list")
        if self.shape in ("disjunction", "conjunction") and len(self.clauses) != 1:
            raise FormulaError(f"{self.shape} formula must have exactly one clause")

    @classmethod
    def disjunction(cls, atoms) -> "Formula":
        return cls("disjunction", (tuple(atoms),))

    @classmethod
    def conjunction(cls, atoms) -> "Formula":
        return cls("conjunction", (tuple(atoms),))

    @classmethod
    def dnf(cls, clauses) -> "Formula":
        return cls("dnf", tuple(tuple(cl) for cl in clauses))

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(a for cl in self.clauses for a in cl)

    @property
    def is_pairwise(self) -> bool:
        return all(isinstance(a, SimilarityPredicate) for a in self.atoms)

    @property
    def is_single_record(self) -> bool:
        return all(isinstance(a, NullPredicate) for a in self.atoms)

    def evaluate_pair(self, schema: Schema, left: Record, right: Record) -> bool:
        if not self.is_pairwise:
            raise FormulaError("formula with null-test atoms cannot target pairs")
        return self._evaluate(lambda a: a.evaluate(schema, left, right))

    def evaluate_record(self, schema: Schema, record: Record) -> bool:
        if not self.is_single_record:
            raise FormulaError("formula with pair atoms cannot target single records")
        return self._evaluate(lambda a: a.evaluate(schema, record))

    def _evaluate(self, atom_value) -> bool:
        if self.shape == "conjunction":
            return all(atom_value(a) for a in self.clauses[0])
        if self.shape == "disjunction":
            return any(atom_value(a) for a in self.clauses[0])
        return any(all(atom_value(a) for a in cl) for cl in self.clauses)

    def describe(self) -> str:
        glue = " AND " if self.shape == "conjunction" else " OR "
        if self.shape == "dnf":
            return " OR ".join(
                "(" + " AND ".join(a.describe() for a in cl) + ")" for cl in self.clauses
            )
        return glue.join(a.describe() for a in self.clauses[0])


def atom_to_dict(atom: Atom) -> dict:
    if isinstance(atom, NullPredicate):
        return {"attr": atom.attribute, "isNull": True}
    return {
        "attr": atom.attribute,
        "transform": atom.transform.name,
        "sim": atom.sim,
        "theta": atom.theta,
    }


def atom_from_dict(obj: dict) -> Atom:
    if not isinstance(obj, dict) or "attr" not in obj:
        raise FormulaError(f"bad atom: {obj!r}")
    if obj.get("isNull"):
        return NullPredicate(obj["attr"])
    try:
        transform = Transformation.parse(obj["transform"])
        return SimilarityPredicate(obj["attr"], transform, obj["sim"], float(obj["theta"]))
    except KeyError as exc:
        raise FormulaError(f"atom missing field {exc}") from None


def formula_to_dict(formula: Formula) -> dict:
    if formula.shape == "dnf":
        atoms = [[atom_to_dict(a) for a in cl] for cl in formula.clauses]
    else:
        atoms = [atom_to_dict(a) for a in formula.clauses[0]]
    return {"shape": formula.shape, "atoms": atoms}


def formula_from_dict(obj: dict) -> Formula:
    if not isinstance(obj, dict):
        raise FormulaError("formula must be an object with shape and atoms")
    shape = obj.get("shape")
    atoms = obj.get("atoms")
    if shape not in SHAPES:
        raise FormulaError(f"unknown formula shape: {shape}")
    if not isinstance(atoms, list) or not atoms:
        raise FormulaError("formula atoms must be a non-empty list")
    if shape == "dnf":
        if not all(isinstance(cl, list) for cl in atoms):
            raise FormulaError("dnf atoms must be a list of clauses")
        return Formula.dnf([[atom_from_dict(a) for a in cl] for cl in atoms])
    parsed = [atom_from_dict(a) for a in atoms]
    return Formula(shape, (tuple(parsed),))


def formula_to_json(formula: Formula) -> str:
    return json.dumps(formula_to_dict(formula), sort_keys=True)


def formula_from_json(text: str) -> Formula:
    return formula_from_dict(json.loads(text))

"""Datasets and labeled training-pair tables.

A Dataset is an immutable list of rows over a named schema; empty CSV cells
parse to None (NULL). A PairTable is the labeled record-pair view that most
queries target: it carries a declared stability bound m (how many pairs one
base record may appear in) and public size counts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

Record = tuple  # tuple[Optional[str], ...], one slot per schema attribute

POSITIVE = "+"
NEGATIVE = "-"


@dataclass(frozen=True)
class Schema:
    attributes: tuple[str, ...]

    def __post_init__(self):
        if not self.attributes:
            raise ValueError("schema needs at least one attribute")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("attribute names must be unique")
        if any(not a for a in self.attributes):
            raise ValueError("attribute names must be non-empty")

    def index(self, attribute: str) -> int:
        try:
            return self.attributes.index(attribute)
        except ValueError:
            raise KeyError(f"unknown attribute: {attribute}") from None

    def __len__(self) -> int:
        return len(self.attributes)


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    rows: tuple[Record, ...]

    def __post_init__(self):
        d = len(self.schema)
        for i, row in enumerate(self.rows):
            if len(row) != d:
                raise ValueError(f"row {i} has {len(row)} values, expected {d}")

    def __len__(self) -> int:
        return len(self.rows)


class PairTableError(ValueError):
    pass


@dataclass
class PairTable:
    """Labeled record pairs (left, right, label) with stability m.

    public_counts — (|pairs|, |positives|) — is released metadata; everything
    else about the pairs is private.
    """

    schema: Schema
    pairs: list[tuple[Record, Record, str]]
    stability: int = 1
    left_source: str = ""
    right_source: str = ""
    _caches: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.stability < 1:
            raise PairTableError("stability must be a positive integer")
        for _, _, label in self.pairs:
            if label not in (POSITIVE, NEGATIVE):
                raise PairTableError(f"label must be '+' or '-', got {label!r}")

    @property
    def size(self) -> int:
        return len(self.pairs)

    @property
    def positives(self) -> int:
        return sum(1 for _, _, lab in self.pairs if lab == POSITIVE)

    @property
    def negatives(self) -> int:
        return self.size - self.positives

    @property
    def public_counts(self) -> tuple[int, int]:
        return (self.size, self.positives)


def parse_cell(cell: str) -> Optional[str]:
    return cell if cell != "" else None


def load_dataset(path: str | Path, schema: Optional[Schema] = None) -> Dataset:
    """Load a UTF-8 CSV with header row; empty cells become NULL.

    When a schema is given the header must match it exactly; otherwise the
    schema is inferred from the header.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: missing header row") from None
        if schema is None:
            schema = Schema(tuple(header))
        elif tuple(header) != schema.attributes:
            raise ValueError(
                f"{path}: header {header} does not match schema {list(schema.attributes)}"
            )
        d = len(schema)
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != d:
                raise ValueError(f"{path}:{lineno}: expected {d} cells, got {len(raw)}")
            rows.append(tuple(parse_cell(c) for c in raw))
    return Dataset(schema, tuple(rows))


def load_labels(path: str | Path) -> list[tuple[int, int, str]]:
    """Load a pair-label CSV with header leftIdx,rightIdx,label."""
    path = Path(path)
    labels = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != 3:
                raise ValueError(f"{path}:{lineno}: expected leftIdx,rightIdx,label")
            labels.append((int(raw[0]), int(raw[1]), raw[2]))
    return labels


def build_pair_table(
    d1: Dataset,
    d2: Dataset,
    labels: Sequence[tuple[int, int, str]],
    m: int = 1,
    left_source: str = "d1",
    right_source: str = "d2",
) -> PairTable:
    """Materialize labeled pairs, checking that no base record is referenced
    more than m times (the stability bound that scales query sensitivity)."""
    if d1.schema != d2.schema:
        raise PairTableError("pair table requires both sources to share a schema")
    if m < 1:
        raise PairTableError("stability must be a positive integer")
    left_uses: dict[int, int] = {}
    right_uses: dict[int, int] = {}
    pairs = []
    for li, ri, label in labels:
        if not (0 <= li < len(d1)):
            raise PairTableError(f"unknown left index {li}")
        if not (0 <= ri < len(d2)):
            raise PairTableError(f"unknown right index {ri}")
        left_uses[li] = left_uses.get(li, 0) + 1
        right_uses[ri] = right_uses.get(ri, 0) + 1
        if left_uses[li] > m or right_uses[ri] > m:
            raise PairTableError(
                f"record referenced more than m={m} times (left {li}, right {ri})"
            )
        pairs.append((d1.rows[li], d2.rows[ri], label))
    return PairTable(
        schema=d1.schema,
        pairs=pairs,
        stability=m,
        left_source=left_source,
        right_source=right_source,
    )

from __future__ import annotations

import pytest

from dptuner.data import (
    Dataset,
    PairTableError,
    Schema,
    build_pair_table,
    load_dataset,
    load_labels,
)


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_dataset_five_attributes(tmp_path):
    path = _write(
        tmp_path,
        "restaurants.csv",
        "name,addr,city,phone,cuisine\n"
        "golden spoon,1 main st,salem,555-0001,thai\n"
        "old kettle,2 oak ave,,555-0002,\n",
    )
    ds = load_dataset(path)
    assert len(ds.schema) == 5
    assert len(ds) == 2
    assert ds.rows[1][2] is None  # empty cell parses to NULL
    assert ds.rows[1][4] is None


def test_load_dataset_four_attributes(tmp_path):
    path = _write(
        tmp_path,
        "citations.csv",
        "title,authors,venue,year\npaper a,smith,vldb,1999\n",
    )
    ds = load_dataset(path)
    assert len(ds.schema) == 4
    assert len(ds) == 1


def test_load_dataset_header_only(tmp_path):
    path = _write(tmp_path, "empty.csv", "a,b,c\n")
    ds = load_dataset(path)
    assert len(ds) == 0


def test_load_dataset_schema_mismatch_and_arity(tmp_path):
    path = _write(tmp_path, "bad.csv", "a,b\n1,2,3\n")
    with pytest.raises(ValueError, match="expected 2 cells"):
        load_dataset(path)
    ok = _write(tmp_path, "ok.csv", "a,b\n1,2\n")
    with pytest.raises(ValueError, match="does not match schema"):
        load_dataset(ok, Schema(("x", "y")))
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "missing.csv")


def test_schema_invariants():
    with pytest.raises(ValueError):
        Schema(())
    with pytest.raises(ValueError):
        Schema(("a", "a"))
    with pytest.raises(ValueError):
        Schema(("a", ""))
    with pytest.raises(KeyError):
        Schema(("a", "b")).index("c")


def test_dataset_row_arity():
    with pytest.raises(ValueError):
        Dataset(Schema(("a", "b")), (("x",),))


def _simple_datasets(n):
    schema = Schema(("a",))
    d1 = Dataset(schema, tuple((f"l{i}",) for i in range(n)))
    d2 = Dataset(schema, tuple((f"r{i}",) for i in range(n)))
    return d1, d2


def test_build_pair_table_counts_small():
    d1, d2 = _simple_datasets(100)
    labels = [(i, i, "+" if i < 50 else "-") for i in range(100)]
    table = build_pair_table(d1, d2, labels, m=1)
    assert table.public_counts == (100, 50)
    assert table.negatives == 50
    assert table.stability == 1


def test_build_pair_table_counts_large():
    d1, d2 = _simple_datasets(1000)
    labels = [(i, i, "+" if i < 500 else "-") for i in range(1000)]
    table = build_pair_table(d1, d2, labels, m=1)
    assert table.public_counts == (1000, 500)


def test_build_pair_table_stability_violation():
    d1, d2 = _simple_datasets(3)
    labels = [(0, 0, "+"), (0, 1, "-")]  # left record 0 used twice
    with pytest.raises(PairTableError, match="more than m=1"):
        build_pair_table(d1, d2, labels, m=1)
    # the same labels are fine at m=2
    table = build_pair_table(d1, d2, labels, m=2)
    assert table.stability == 2


def test_build_pair_table_unknown_index_and_labels():
    d1, d2 = _simple_datasets(2)
    with pytest.raises(PairTableError, match="unknown left"):
        build_pair_table(d1, d2, [(5, 0, "+")])
    with pytest.raises(PairTableError, match="unknown right"):
        build_pair_table(d1, d2, [(0, 5, "+")])
    with pytest.raises(PairTableError, match="label"):
        build_pair_table(d1, d2, [(0, 0, "maybe")])


def test_load_labels(tmp_path):
    path = _write(tmp_path, "labels.csv", "leftIdx,rightIdx,label\n0,0,+\n1,1,-\n")
    assert load_labels(path) == [(0, 0, "+"), (1, 1, "-")]

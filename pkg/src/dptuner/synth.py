"""Synthetic entity-resolution data: perturbed duplicates at desk scale.

Generates two restaurant-style tables and a labeled pair file. Matched
pairs are typo/abbreviation/format perturbations of one entity; negative
pairs join unrelated entities. Every base record appears in exactly one
labeled pair, so the pair view has stability 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, NEGATIVE, POSITIVE, PairTable, Schema, build_pair_table

SCHEMA = Schema(("name", "addr", "city", "phone", "cuisine"))

_ADJECTIVES = (
    "golden", "silver", "rustic", "urban", "cozy", "royal", "blue", "green",
    "crimson", "sunny", "misty", "grand", "little", "old", "new", "happy",
    "lucky", "noble", "wild", "quiet",
)
_NOUNS = (
    "harvest", "table", "garden", "spoon", "kettle", "lantern", "orchard",
    "barrel", "hearth", "olive", "pepper", "thyme", "saffron", "juniper",
    "maple", "willow", "cedar", "meadow", "harbor", "summit",
)
_KINDS = (
    "kitchen", "bistro", "cafe", "grill", "diner", "tavern", "eatery",
    "house", "bar", "room",
)
_STREETS = (
    "main st", "oak ave", "maple dr", "elm st", "second ave", "park blvd",
    "lake rd", "hill st", "river way", "market st", "union sq", "bay ct",
)
_CITIES = (
    "springfield", "riverton", "lakeside", "fairview", "greenville",
    "ashland", "milton", "clayton", "dayton", "burlington", "salem", "dover",
)
_CUISINES = (
    "italian", "mexican", "thai", "indian", "french", "japanese", "greek",
    "diner", "bbq", "seafood", "vegan", "fusion",
)

_ABBREVIATIONS = {
    "street": "st", "st": "street", "avenue": "ave", "ave": "avenue",
    "drive": "dr", "dr": "drive", "road": "rd", "rd": "road",
    "boulevard": "blvd", "blvd": "boulevard", "square": "sq", "sq": "square",
    "court": "ct", "ct": "court", "second": "2nd",
}

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class SynthConfig:
    pairs: int = 100
    positive_fraction: float = 0.5
    seed: int = 7
    # Perturbation intensities for the matched copy of an entity.
    typo_rate: float = 0.6
    second_typo_rate: float = 0.15
    token_swap_rate: float = 0.08
    # Fraction of negative pairs built from confusable entities (shared
    # name tokens, same street/city) rather than unrelated ones.
    hard_negative_rate: float = 0.6
    # NULL rates per attribute (applied when rendering any record).
    null_rates: tuple[float, ...] = (0.0, 0.02, 0.15, 0.02, 0.15)


def _typo(value: str, rng: np.random.Generator) -> str:
    if len(value) < 2:
        return value
    pos = int(rng.integers(0, len(value)))
    op = int(rng.integers(0, 4))
    ch = _LETTERS[int(rng.integers(0, len(_LETTERS)))]
    if op == 0:
        return value[:pos] + value[pos + 1 :]
    if op == 1:
        return value[:pos] + ch + value[pos + 1 :]
    if op == 2 and pos < len(value) - 1:
        return value[:pos] + value[pos + 1] + value[pos] + value[pos + 2 :]
    return value[:pos] + ch + value[pos:]


def _entity(idx: int, rng: np.random.Generator) -> dict:
    name = " ".join(
        (
            _ADJECTIVES[int(rng.integers(0, len(_ADJECTIVES)))],
            _NOUNS[int(rng.integers(0, len(_NOUNS)))],
            _KINDS[int(rng.integers(0, len(_KINDS)))],
        )
    )
    addr = f"{int(rng.integers(1, 999))} {_STREETS[int(rng.integers(0, len(_STREETS)))]}"
    city = _CITIES[int(rng.integers(0, len(_CITIES)))]
    phone = f"{int(rng.integers(200, 999)):03d}-{idx % 1000:03d}-{int(rng.integers(0, 9999)):04d}"
    cuisine = _CUISINES[int(rng.integers(0, len(_CUISINES)))]
    return {"name": name, "addr": addr, "city": city, "phone": phone, "cuisine": cuisine}


def _render(entity: dict, cfg: SynthConfig, rng: np.random.Generator) -> tuple:
    row = []
    for attr, rate in zip(SCHEMA.attributes, cfg.null_rates):
        row.append(None if rng.random() < rate else entity[attr])
    return tuple(row)


def _perturb(entity: dict, cfg: SynthConfig, rng: np.random.Generator) -> dict:
    out = dict(entity)
    name = out["name"]
    if rng.random() < cfg.typo_rate:
        name = _typo(name, rng)
    if rng.random() < cfg.second_typo_rate:
        name = _typo(name, rng)
    if rng.random() < cfg.token_swap_rate:
        toks = name.split()
        if len(toks) >= 2:
            i = int(rng.integers(0, len(toks) - 1))
            toks[i], toks[i + 1] = toks[i + 1], toks[i]
            name = " ".join(toks)
    out["name"] = name

    addr_toks = out["addr"].split()
    if rng.random() < 0.4:
        addr_toks = [_ABBREVIATIONS.get(t, t) for t in addr_toks]
    addr = " ".join(addr_toks)
    if rng.random() < 0.3:
        addr = _typo(addr, rng)
    out["addr"] = addr

    if rng.random() < 0.2:
        out["city"] = _typo(out["city"], rng)

    phone = out["phone"]
    r = rng.random()
    if r < 0.25:
        phone = phone.replace("-", ".")
    elif r < 0.5:
        phone = phone.replace("-", " ")
    elif r < 0.6:
        phone = phone.replace("-", "")
    if rng.random() < 0.1:
        phone = _typo(phone, rng)
    out["phone"] = phone

    if rng.random() < 0.2:
        out["cuisine"] = _typo(out["cuisine"], rng)
    return out


def _confusable(left: dict, other: dict) -> dict:
    """A distinct entity that shares surface tokens with `left`: same
    naming pattern except the middle word, same street and city."""
    left_toks = left["name"].split()
    other_toks = other["name"].split()
    name = " ".join((left_toks[0], other_toks[1], left_toks[2]))
    street = left["addr"].split(" ", 1)[1]
    number = other["addr"].split(" ", 1)[0]
    return {
        "name": name,
        "addr": f"{number} {street}",
        "city": left["city"],
        "phone": other["phone"],
        "cuisine": left["cuisine"],
    }


def generate(cfg: SynthConfig = SynthConfig()):
    """Build (d1, d2, labels). labels[i] = (i, i, label): positives first."""
    rng = np.random.default_rng(cfg.seed)
    n_pos = int(round(cfg.pairs * cfg.positive_fraction))
    n_neg = cfg.pairs - n_pos
    entities = [_entity(i, rng) for i in range(cfg.pairs + n_neg)]

    d1_rows, d2_rows, labels = [], [], []
    for i in range(n_pos):
        d1_rows.append(_render(entities[i], cfg, rng))
        d2_rows.append(_render(_perturb(entities[i], cfg, rng), cfg, rng))
        labels.append((i, i, POSITIVE))
    for j in range(n_neg):
        left_entity = entities[n_pos + j]
        right_entity = entities[cfg.pairs + j]
        if rng.random() < cfg.hard_negative_rate:
            right_entity = _confusable(left_entity, right_entity)
        d1_rows.append(_render(left_entity, cfg, rng))
        d2_rows.append(_render(right_entity, cfg, rng))
        labels.append((n_pos + j, n_pos + j, NEGATIVE))

    d1 = Dataset(SCHEMA, tuple(d1_rows))
    d2 = Dataset(SCHEMA, tuple(d2_rows))
    return d1, d2, labels


def generate_pair_table(cfg: SynthConfig = SynthConfig()) -> tuple[Dataset, Dataset, PairTable]:
    d1, d2, labels = generate(cfg)
    return d1, d2, build_pair_table(d1, d2, labels, m=1)


def _write_csv(path: Path, header, rows):
    import csv

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def write_files(out_dir: str | Path, cfg: SynthConfig = SynthConfig()) -> dict[str, str]:
    """Write d1.csv, d2.csv, labels.csv; returns the path map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d1, d2, labels = generate(cfg)
    paths = {
        "d1": str(out / "d1.csv"),
        "d2": str(out / "d2.csv"),
        "labels": str(out / "labels.csv"),
    }
    _write_csv(Path(paths["d1"]), SCHEMA.attributes, d1.rows)
    _write_csv(Path(paths["d2"]), SCHEMA.attributes, d2.rows)
    _write_csv(Path(paths["labels"]), ("leftIdx", "rightIdx", "label"), labels)
    return paths

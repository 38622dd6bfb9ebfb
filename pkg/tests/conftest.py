from __future__ import annotations

import math

import numpy as np
import pytest

from dptuner.accountant import AccountantMode, PrivacyParams
from dptuner.data import Dataset, PairTable, Schema, build_pair_table
from dptuner.engine import SessionData, open_session
from dptuner.synth import SynthConfig, generate_pair_table

BETA15 = math.exp(-15)


@pytest.fixture(scope="session")
def synth_data():
    """Deterministic 100-pair synthetic ER dataset shared by slow tests."""
    return generate_pair_table(SynthConfig(pairs=100, seed=7))


@pytest.fixture()
def toy_table() -> PairTable:
    """Four hand-built pairs (2 matches, 2 non-matches), cleanly separable."""
    schema = Schema(("name", "city"))
    d1 = Dataset(schema, (
        ("alpha grill", "salem"),
        ("beta cafe", "dover"),
        ("gamma bar", "salem"),
        ("epsilon inn", "dover"),
    ))
    d2 = Dataset(schema, (
        ("alpha grill", "salem"),
        ("betz cafe", "dover"),
        ("delta pub", "ashland"),
        ("zeta den", "milton"),
    ))
    labels = [(0, 0, "+"), (1, 1, "+"), (2, 2, "-"), (3, 3, "-")]
    return build_pair_table(d1, d2, labels, m=1)


def make_session(table, datasets=None, B=math.inf, delta=BETA15, mode=None, seed=0, beta=BETA15):
    return open_session(
        SessionData(pair_table=table, datasets=datasets or {}),
        PrivacyParams(B=B, delta=delta),
        mode=mode or AccountantMode.sequential(),
        seed=seed,
        default_beta=beta,
    )


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)

"""String transformations and similarity functions for record-pair predicates.

Every similarity function is normalized to [0, 1], returns exactly 1.0 for
identical non-null inputs, and is deterministic. Set-based similarities
(cosine, jaccard, overlap) operate on token multisets produced by the
transformation; edit-based similarities (levenshtein, jaro, smith_waterman,
abs_diff_len) operate on the lowercased string and ignore tokenization.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
import math

TRANSFORMATIONS = ("lowercase", "qgram2", "qgram3", "spaceTokenize")
SIMILARITIES = (
    "levenshtein",
    "jaro",
    "smithWaterman",
    "cosine",
    "jaccard",
    "overlap",
    "absDiffLen",
)

# Similarities that consume token multisets rather than raw strings.
SET_SIMILARITIES = frozenset({"cosine", "jaccard", "overlap"})


@dataclass(frozen=True)
class Transformation:
    """A named value transformation, optionally parameterized by q-gram size."""

    kind: str
    q: int = 0

    def __post_init__(self):
        if self.kind not in ("lowercase", "qgram", "spaceTokenize"):
            raise ValueError(f"unknown transformation kind: {self.kind}")
        if self.kind == "qgram" and self.q < 1:
            raise ValueError("qgram transformation needs q >= 1")

    @property
    def name(self) -> str:
        return f"qgram{self.q}" if self.kind == "qgram" else self.kind

    @classmethod
    def parse(cls, name: str) -> "Transformation":
        if name == "lowercase":
            return cls("lowercase")
        if name == "spaceTokenize":
            return cls("spaceTokenize")
        if name.startswith("qgram"):
            try:
                q = int(name[len("qgram"):])
            except ValueError:
                raise ValueError(f"unknown transformation: {name}") from None
            return cls("qgram", q)
        raise ValueError(f"unknown transformation: {name}")

    def tokens(self, value: str) -> Counter:
        """Token multiset of the lowercased value.

        Strings shorter than q collapse to a single whole-string token so
        that identical inputs always share a non-empty multiset.
        """
        v = value.lower()
        if self.kind == "spaceTokenize":
            toks = v.split()
            return Counter(toks) if toks else Counter({v: 1})
        if self.kind == "qgram":
            if len(v) < self.q:
                return Counter({v: 1})
            return Counter(v[i : i + self.q] for i in range(len(v) - self.q + 1))
        return Counter({v: 1})


def levenshtein_distance(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_sim(a: str, b: str) -> float:
    """1 - editDistance / max(len); 1.0 when both strings are empty."""
    m = max(len(a), len(b))
    if m == 0:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / m


def jaro_sim(a: str, b: str) -> float:
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    window = max(la, lb) // 2 - 1
    window = max(window, 0)
    a_flags = [False] * la
    b_flags = [False] * lb
    matches = 0
    for i, ca in enumerate(a):
        lo = max(0, i - window)
        hi = min(lb, i + window + 1)
        for j in range(lo, hi):
            if not b_flags[j] and b[j] == ca:
                a_flags[i] = b_flags[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    transpositions = 0
    j = 0
    for i in range(la):
        if a_flags[i]:
            while not b_flags[j]:
                j += 1
            if a[i] != b[j]:
                transpositions += 1
            j += 1
    t = transpositions / 2
    return (matches / la + matches / lb + (matches - t) / matches) / 3


_SW_MATCH = 1.0
_SW_MISMATCH = -1.0
_SW_GAP = -1.0


def smith_waterman_sim(a: str, b: str) -> float:
    """Local-alignment score normalized by min-length * match score."""
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    la, lb = len(a), len(b)
    best = 0.0
    prev = [0.0] * (lb + 1)
    for i in range(1, la + 1):
        cur = [0.0] * (lb + 1)
        for j in range(1, lb + 1):
            score = _SW_MATCH if a[i - 1] == b[j - 1] else _SW_MISMATCH
            cur[j] = max(0.0, prev[j - 1] + score, prev[j] + _SW_GAP, cur[j - 1] + _SW_GAP)
            if cur[j] > best:
                best = cur[j]
        prev = cur
    return best / (min(la, lb) * _SW_MATCH)


def abs_diff_len_sim(a: str, b: str) -> float:
    """1 - |len(a)-len(b)| / max(len); a cheap length-profile similarity."""
    m = max(len(a), len(b))
    if m == 0:
        return 1.0
    return 1.0 - abs(len(a) - len(b)) / m


def cosine_sim(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    dot = sum(cnt * b[tok] for tok, cnt in a.items())
    if dot == 0:
        return 0.0
    na = math.sqrt(sum(c * c for c in a.values()))
    nb = math.sqrt(sum(c * c for c in b.values()))
    return min(dot / (na * nb), 1.0)


def jaccard_sim(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    inter = sum(min(cnt, b[tok]) for tok, cnt in a.items())
    union = sum((a | b).values())
    if union == 0:
        return 0.0
    return inter / union


def overlap_sim(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    inter = sum(min(cnt, b[tok]) for tok, cnt in a.items())
    denom = min(sum(a.values()), sum(b.values()))
    return inter / denom


_STRING_SIMS = {
    "levenshtein": levenshtein_sim,
    "jaro": jaro_sim,
    "smithWaterman": smith_waterman_sim,
    "absDiffLen": abs_diff_len_sim,
}

_SET_SIMS = {
    "cosine": cosine_sim,
    "jaccard": jaccard_sim,
    "overlap": overlap_sim,
}


def similarity(sim: str, transform: Transformation, left: str, right: str) -> float:
    """Similarity of two non-null attribute values under a transformation.

    Edit-based functions see the lowercased strings; set-based functions
    see the transformation's token multisets.
    """
    if sim in _STRING_SIMS:
        return _STRING_SIMS[sim](left.lower(), right.lower())
    if sim in _SET_SIMS:
        return _SET_SIMS[sim](transform.tokens(left), transform.tokens(right))
    raise ValueError(f"unknown similarity function: {sim}")

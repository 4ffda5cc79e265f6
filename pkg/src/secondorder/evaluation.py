"""Cosine geometry, group overlap scores, word-similarity evaluation, significance."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.stats import rankdata

from .cooc import OutOfVocabularyError
from .pairstore import PairFormatError


class ZeroVectorError(ValueError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


class MissingVectorError(KeyError):
    def __init__(self, word: str):
        self.word = word
        super().__init__(f"no vector for {word!r}")


def _dot_norms(x, y):
    if sp.issparse(x) or sp.issparse(y):
        x = sp.csr_matrix(x)
        y = sp.csr_matrix(y)
        dot = float(x.multiply(y).sum())
        nx = math.sqrt(float(x.multiply(x).sum()))
        ny = math.sqrt(float(y.multiply(y).sum()))
    else:
        x = np.asarray(x, dtype=np.float64).ravel()
        y = np.asarray(y, dtype=np.float64).ravel()
        dot = float(x @ y)
        nx = float(np.linalg.norm(x))
        ny = float(np.linalg.norm(y))
    return dot, nx, ny


def cosine_similarity(x, y) -> float:
    dot, nx, ny = _dot_norms(x, y)
    if nx == 0.0 or ny == 0.0:
        raise ZeroVectorError("cosine is undefined for a zero vector")
    return dot / (nx * ny)


def cosine_distance(x, y) -> float:
    """1 - cos(x, y); sparse rows and dense vectors alike."""
    return 1.0 - cosine_similarity(x, y)


@dataclass
class GroupScore:
    group: str
    mean: float
    distances: list[float] = field(repr=False)
    pairs: list[tuple[str, str]] = field(repr=False)


def _lookup(emb, word):
    try:
        return emb.vector(word)
    except (KeyError, OutOfVocabularyError):
        raise MissingVectorError(word) from None


def group_mean_cd(emb, manifest, group: str) -> GroupScore:
    """Mean cosine distance over all unordered target pairs of ``group``.

    ``emb`` is anything with a ``vector(word)`` method (a PPMI matrix or a
    dense embedding).
    """
    targets = manifest.targets(group) if hasattr(manifest, "targets") else manifest[group]
    vecs = {}
    for w in targets:
        v = _lookup(emb, w)
        if _dot_norms(v, v)[1] == 0.0:
            raise ZeroVectorError(f"zero vector for {w!r}")
        vecs[w] = v
    pairs = list(combinations(targets, 2))
    dists = [cosine_distance(vecs[a], vecs[b]) for a, b in pairs]
    mean = float(np.mean(dists)) if dists else float("nan")
    return GroupScore(group, mean, dists, pairs)


def spearman(a: Sequence[float], b: Sequence[float]) -> float:
    """Pearson correlation of average ranks (ties share their mean rank)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if len(a) < 2:
        raise ValueError("need at least two observations")
    ra = rankdata(a) - (len(a) + 1) / 2.0
    rb = rankdata(b) - (len(b) + 1) / 2.0
    den = math.sqrt(float(ra @ ra) * float(rb @ rb))
    if den == 0.0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    return float(np.clip(float(ra @ rb) / den, -1.0, 1.0))


class SimilarityRecord(NamedTuple):
    word1: str
    word2: str
    score: float


class SimilarityDataset(list):
    """Word pairs with human similarity scores, no duplicate unordered pair."""

    def __init__(self, records=()):
        super().__init__()
        seen = set()
        for w1, w2, s in records:
            s = float(s)
            if not math.isfinite(s):
                raise ValueError(f"non-finite score for ({w1}, {w2})")
            key = frozenset((w1, w2))
            if key in seen:
                raise ValueError(f"duplicate pair ({w1}, {w2})")
            seen.add(key)
            self.append(SimilarityRecord(w1, w2, s))

    @classmethod
    def load(cls, path) -> "SimilarityDataset":
        """Read ``word1<TAB>word2<TAB>score`` lines; commas work as separators too.

        A first line whose score field is not numeric is taken as a header.
        """
        records = []
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
        delim = "\t" if "\t" in text.split("\n", 1)[0] else ","
        for lineno, row in enumerate(csv.reader(text.splitlines(), delimiter=delim), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 3:
                raise PairFormatError("expected word1, word2, score", path, lineno)
            try:
                score = float(row[2])
            except ValueError:
                if lineno == 1:
                    continue
                raise PairFormatError(f"bad score {row[2]!r}", path, lineno) from None
            records.append((row[0].strip(), row[1].strip(), score))
        return cls(records)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for w1, w2, s in self:
                fh.write(f"{w1}\t{w2}\t{s!r}\n")


@dataclass
class WordSimResult:
    rho: float | None
    evaluated: int
    total: int

    @property
    def coverage(self) -> float:
        return self.evaluated / self.total if self.total else 0.0

    @property
    def defined(self) -> bool:
        return self.rho is not None


def eval_wordsim(emb, dataset: Sequence) -> WordSimResult:
    """Spearman correlation between cosine similarities and human scores.

    Pairs with an out-of-vocabulary (or zero-vector) word are skipped and show
    up in the coverage. If every prediction ties, ``rho`` is None.
    """
    if len(dataset) == 0:
        raise ValueError("empty similarity dataset")
    pred, gold = [], []
    for w1, w2, score in dataset:
        try:
            sim = cosine_similarity(_lookup(emb, w1), _lookup(emb, w2))
        except (MissingVectorError, ZeroVectorError):
            continue
        pred.append(sim)
        gold.append(score)
    if not pred:
        raise ValueError("no evaluable pairs: every pair has an out-of-vocabulary word")
    try:
        rho = spearman(pred, gold) if len(pred) >= 2 else None
    except UndefinedCorrelationError:
        rho = None
    return WordSimResult(rho, len(pred), len(dataset))


class BootstrapResult(NamedTuple):
    p: float
    observed: float
    degenerate: bool


def bootstrap_two_sample(a: Sequence[float], b: Sequence[float], B: int = 10_000,
                         seed: int = 0) -> BootstrapResult:
    """Two-tailed bootstrap test of equal means.

    Both samples are shifted onto the pooled mean, resampled with replacement
    ``B`` times, and the observed |mean(a) - mean(b)| is compared against the
    resampled differences: p = (1 + #{resampled >= observed}) / (B + 1).
    The samples are put in a canonical order first, so swapping a and b
    gives the same p.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least two values")
    if B < 1000:
        raise ValueError("B must be >= 1000")
    if (len(b), tuple(b)) < (len(a), tuple(a)):
        a, b = b, a
    observed = abs(a.mean() - b.mean())
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return BootstrapResult(1.0, observed, True)

    mu = pooled.mean()
    a0 = a - a.mean() + mu
    b0 = b - b.mean() + mu
    rng = np.random.default_rng(seed)
    exceed = 0
    step = max(1, 2_000_000 // (len(a) + len(b)))
    for lo in range(0, B, step):
        n = min(step, B - lo)
        ma = a0[rng.integers(0, len(a), (n, len(a)))].mean(axis=1)
        mb = b0[rng.integers(0, len(b), (n, len(b)))].mean(axis=1)
        # relative slack so float noise at equality counts as an exceedance
        exceed += int(np.count_nonzero(np.abs(ma - mb) >= observed * (1 - 1e-12)))
    return BootstrapResult((1 + exceed) / (B + 1), observed, False)


def bonferroni(p: float, m: int) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if m < 1:
        raise ValueError("m must be >= 1")
    return min(1.0, m * p)

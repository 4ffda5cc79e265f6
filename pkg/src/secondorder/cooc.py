"""Sparse co-occurrence counts and smoothed, shifted PPMI weighting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .pairstore import PairFormatError, Vocabulary, read_pairs


class ParameterError(ValueError):
    pass


class OutOfVocabularyError(KeyError):
    def __init__(self, word: str, role: str = "word"):
        self.word = word
        super().__init__(f"{role} not in vocabulary: {word!r}")


@dataclass(frozen=True, eq=False)
class SparseCoocMatrix:
    """Row-compressed (target x context) matrix of counts or PPMI weights.

    Invariants: no stored zeros, column ids strictly increasing within a row.
    """

    matrix: sp.csr_matrix
    rows: Vocabulary
    cols: Vocabulary
    _row_sums: np.ndarray = field(init=False, repr=False)
    _col_sums: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.float64)
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        if m.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"matrix shape {m.shape} does not match vocabularies "
                             f"({len(self.rows)}, {len(self.cols)})")
        if m.nnz and m.data.min() < 0:
            raise ValueError("negative entries")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_row_sums", np.asarray(m.sum(axis=1)).ravel())
        object.__setattr__(self, "_col_sums", np.asarray(m.sum(axis=0)).ravel())

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def row_sums(self) -> np.ndarray:
        return self._row_sums

    @property
    def col_sums(self) -> np.ndarray:
        return self._col_sums

    def get(self, target: str, context: str) -> float:
        i = self.rows.id_of.get(target)
        j = self.cols.id_of.get(context)
        if i is None or j is None:
            return 0.0
        return float(self.matrix[i, j])

    def row(self, i: int) -> sp.csr_matrix:
        return self.matrix[i]

    def vector(self, word: str) -> sp.csr_matrix:
        """Sparse row of ``word``; used directly as its PPMI representation."""
        i = self.rows.id_of.get(word)
        if i is None:
            raise OutOfVocabularyError(word, "target")
        return self.matrix[i]

    def __contains__(self, word) -> bool:
        return word in self.rows

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def save(self, path) -> None:
        """Write ``<row>\\t<col>\\t<value>`` triples plus a ``.vocab`` sidecar."""
        m = self.matrix
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for i in range(m.shape[0]):
                w = self.rows.word_of[i]
                lo, hi = m.indptr[i], m.indptr[i + 1]
                for j, v in zip(m.indices[lo:hi], m.data[lo:hi]):
                    fh.write(f"{w}\t{self.cols.word_of[j]}\t{v:.17g}\n")
        with open(vocab_sidecar(path), "w", encoding="utf-8", newline="\n") as fh:
            for role, vocab in (("row", self.rows), ("col", self.cols)):
                for w, c in zip(vocab.word_of, vocab.counts):
                    fh.write(f"{role}\t{w}\t{c}\n")

    @classmethod
    def load(cls, path) -> "SparseCoocMatrix":
        rows, cols = Vocabulary(), Vocabulary()
        with open(vocab_sidecar(path), encoding="utf-8", newline="\n") as fh:
            for lineno, line in enumerate(fh, start=1):
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 3 or fields[0] not in ("row", "col"):
                    raise PairFormatError("expected <row|col>\\t<word>\\t<count>",
                                          vocab_sidecar(path), lineno)
                (rows if fields[0] == "row" else cols).add(fields[1], int(fields[2]))
        r, c, v = [], [], []
        with open(path, encoding="utf-8", newline="\n") as fh:
            for lineno, line in enumerate(fh, start=1):
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 3:
                    raise PairFormatError("expected <row>\\t<col>\\t<value>", path, lineno)
                r.append(rows.lookup(fields[0]))
                c.append(cols.lookup(fields[1]))
                v.append(float(fields[2]))
        m = sp.csr_matrix((v, (r, c)), shape=(len(rows), len(cols)))
        return cls(m, rows, cols)


def vocab_sidecar(path) -> Path:
    return Path(f"{path}.vocab")


def pair_ids(pairs: Iterable[Sequence[str]], rows: Vocabulary, cols: Vocabulary):
    """Map a pair stream to two int32 id arrays, rejecting unknown words."""
    rid, cid = rows.id_of, cols.id_of
    r, c = [], []
    for w, ctx in pairs:
        try:
            r.append(rid[w])
        except KeyError:
            raise OutOfVocabularyError(w, "target") from None
        try:
            c.append(cid[ctx])
        except KeyError:
            raise OutOfVocabularyError(ctx, "context") from None
    return np.asarray(r, dtype=np.int32), np.asarray(c, dtype=np.int32)


def count_cooccurrences(pairs: Iterable[Sequence[str]],
                        vocabs: tuple[Vocabulary, Vocabulary]) -> SparseCoocMatrix:
    rows, cols = vocabs
    return counts_from_ids(rows, cols, *pair_ids(pairs, rows, cols))


def read_pair_ids(path) -> tuple[Vocabulary, Vocabulary, np.ndarray, np.ndarray]:
    """One pass over a pair file: vocabularies (first-appearance ids) and id arrays."""
    rows, cols = Vocabulary(), Vocabulary()
    r, c = [], []
    for w, ctx in read_pairs(path):
        r.append(rows.add(w))
        c.append(cols.add(ctx))
    return rows, cols, np.asarray(r, dtype=np.int32), np.asarray(c, dtype=np.int32)


def counts_from_ids(rows: Vocabulary, cols: Vocabulary, r, c) -> SparseCoocMatrix:
    m = sp.csr_matrix((np.ones(len(r), dtype=np.float64), (r, c)),
                      shape=(len(rows), len(cols)))
    return SparseCoocMatrix(m, rows, cols)


def counts_from_file(path) -> SparseCoocMatrix:
    return counts_from_ids(*read_pair_ids(path))


def ppmi_transform(counts: SparseCoocMatrix, alpha: float = 0.75, k: float = 5.0) -> SparseCoocMatrix:
    """Positive PMI with context-distribution smoothing ``alpha`` and shift ``log(k)``.

    For every stored count::

        max(log(#(w,c) * sum_c' #(c')^alpha / (#(w) * #(c)^alpha)) - log(k), 0)

    with #(w) the row sum and #(c) the column sum of ``counts``. Cells that
    come out as exactly zero are dropped.
    """
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if not k >= 1.0:
        raise ParameterError(f"k must be >= 1, got {k}")
    m = counts.matrix
    if m.nnz == 0:
        raise ParameterError("count matrix has no nonzero cells")

    row_sums = counts.row_sums
    col_pow = counts.col_sums ** alpha
    total_pow = col_pow.sum()

    rows = np.repeat(np.arange(m.shape[0]), np.diff(m.indptr))
    cols = m.indices
    with np.errstate(divide="ignore"):
        pmi = (np.log(m.data) + math.log(total_pow)
               - np.log(row_sums[rows]) - np.log(col_pow[cols]))
    vals = np.maximum(pmi - math.log(k), 0.0)
    out = sp.csr_matrix((vals, cols.copy(), m.indptr.copy()), shape=m.shape)
    return SparseCoocMatrix(out, counts.rows, counts.cols)

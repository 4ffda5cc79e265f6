"""Second-order vectors and pseudo-pairs sampled from them.

For a word t, the second-order vector sums the count rows of t's first-order
contexts, each weighted by how often it occurred with t. Words whose
co-occurrence frequency falls below a threshold get ``ceil(ratio * freq)``
context draws from that vector; draws equal to t are dropped, and every
surviving (t, c) is written together with (c, t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .cooc import OutOfVocabularyError, SparseCoocMatrix, counts_from_file
from .pairstore import concat_files, shuffle_pairs


class IsolatedWordError(ValueError):
    pass


@dataclass(frozen=True)
class PropagationConfig:
    freq_threshold: int
    ratio: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.freq_threshold < 1:
            raise ValueError("frequency threshold must be >= 1")
        if not self.ratio > 0:
            raise ValueError("ratio must be > 0")


@dataclass
class PropagationStats:
    words: int = 0
    draws: int = 0
    self_draws: int = 0
    skipped: int = 0
    lines: int = 0


def _check_id(counts: SparseCoocMatrix, t: int) -> None:
    if not 0 <= t < counts.shape[0]:
        raise OutOfVocabularyError(str(t), "target id")


def cooc_frequency(counts: SparseCoocMatrix, t: int) -> int:
    """Number of pair observations with ``t`` as target (its count-row sum)."""
    _check_id(counts, t)
    return int(round(counts.row_sums[t]))


def context_to_row(counts: SparseCoocMatrix) -> np.ndarray:
    """For every context id, the row id of the same word, or -1."""
    rid = counts.rows.id_of
    return np.array([rid.get(w, -1) for w in counts.cols.word_of], dtype=np.int64)


def second_order_vector(counts: SparseCoocMatrix, t: int,
                        col_rows: np.ndarray | None = None) -> sp.csr_matrix:
    """Sum over t's contexts c of #(t, c) * row(c), as a 1 x |contexts| row."""
    _check_id(counts, t)
    if col_rows is None:
        col_rows = context_to_row(counts)
    m = counts.matrix
    lo, hi = m.indptr[t], m.indptr[t + 1]
    if lo == hi:
        raise IsolatedWordError(f"{counts.rows.word_of[t]!r} has no contexts")
    rows = col_rows[m.indices[lo:hi]]
    keep = rows >= 0
    weights = sp.csr_matrix((m.data[lo:hi][keep], (np.zeros(keep.sum(), dtype=np.int64), rows[keep])),
                            shape=(1, m.shape[0]))
    v = sp.csr_matrix(weights @ m)
    v.sum_duplicates()
    v.eliminate_zeros()
    v.sort_indices()
    return v


def sample_second_order(v: sp.csr_matrix, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` context ids drawn with replacement, P(i) = v_i / sum(v)."""
    if v.nnz == 0:
        raise IsolatedWordError("second-order vector is empty")
    cdf = np.cumsum(v.data)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return v.indices[np.searchsorted(cdf, rng.random(n), side="right")]


def propagate(pairs, out, cfg: PropagationConfig,
              counts: SparseCoocMatrix | None = None) -> PropagationStats:
    """Write second-order pairs for every word below the frequency threshold.

    Words are visited in target-id order, each with its own generator derived
    from ``(cfg.seed, id)``; output is meant to be shuffled into the base pairs.
    """
    if counts is None:
        counts = counts_from_file(pairs)
    if counts.nnz == 0:
        raise ValueError(f"no pairs in {pairs}")
    col_rows = context_to_row(counts)
    cols = counts.cols.word_of
    stats = PropagationStats()
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for t, word in enumerate(counts.rows.word_of):
            freq = cooc_frequency(counts, t)
            if not 0 < freq < cfg.freq_threshold:
                continue
            v = second_order_vector(counts, t, col_rows)
            if v.nnz == 0:
                stats.skipped += 1
                continue
            n = math.ceil(cfg.ratio * freq)
            rng = np.random.default_rng([cfg.seed, t])
            drawn = [cols[j] for j in sample_second_order(v, n, rng)]
            kept = [c for c in drawn if c != word]
            stats.words += 1
            stats.draws += n
            stats.self_draws += n - len(kept)
            fh.writelines(f"{word}\t{c}\n" for c in kept)
            fh.writelines(f"{c}\t{word}\n" for c in kept)
            stats.lines += 2 * len(kept)
    return stats


def merge_base_and_second(base, second, out, seed: int) -> Path:
    concat_files([base, second], out)
    return shuffle_pairs(out, out, seed)

"""Truncated SVD of (PPMI) matrices and the dense embeddings derived from it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .cooc import OutOfVocabularyError, ParameterError, SparseCoocMatrix
from .pairstore import PairFormatError, Vocabulary


@dataclass(frozen=True, eq=False)
class TruncatedFactorization:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    vocab: Vocabulary | None = None

    @property
    def d(self) -> int:
        return len(self.S)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.S) @ self.V.T


class DenseEmbedding:
    """A |V| x d matrix whose rows are word vectors."""

    def __init__(self, vocab: Vocabulary | None, matrix: np.ndarray):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2:
            raise ValueError("embedding matrix must be 2-d")
        if vocab is not None and len(vocab) != matrix.shape[0]:
            raise ValueError(f"{len(vocab)} words but {matrix.shape[0]} rows")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("embedding contains non-finite values")
        self.vocab = vocab
        self.matrix = matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __contains__(self, word) -> bool:
        return self.vocab is not None and word in self.vocab

    def vector(self, word: str) -> np.ndarray:
        if self.vocab is None or word not in self.vocab.id_of:
            raise OutOfVocabularyError(word)
        return self.matrix[self.vocab.id_of[word]]

    def save(self, path) -> None:
        if self.vocab is None:
            words = [str(i) for i in range(len(self))]
        else:
            words = self.vocab.word_of
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{self.matrix.shape[0]} {self.matrix.shape[1]}\n")
            for w, row in zip(words, self.matrix):
                fh.write(w)
                for v in row:
                    fh.write(f" {float(v):.17g}")
                fh.write("\n")

    @classmethod
    def load(cls, path) -> "DenseEmbedding":
        with open(path, encoding="utf-8", newline="\n") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise PairFormatError("expected '<rows> <dim>' header", path, 1)
            n, d = int(header[0]), int(header[1])
            vocab = Vocabulary()
            matrix = np.empty((n, d))
            for i in range(n):
                fields = fh.readline().rstrip("\n").split(" ")
                if len(fields) != d + 1:
                    raise PairFormatError(f"expected word and {d} values", path, i + 2)
                vocab.add(fields[0])
                matrix[i] = [float(x) for x in fields[1:]]
        return cls(vocab, matrix)


def _as_operator(m):
    if isinstance(m, SparseCoocMatrix):
        return m.matrix, m.rows
    if sp.issparse(m):
        return sp.csr_matrix(m, dtype=np.float64), None
    return np.asarray(m, dtype=np.float64), None


def _product(A, X: np.ndarray) -> np.ndarray:
    """A @ X into a Fortran-ordered block, one column at a time (no operand copies)."""
    Y = np.empty((A.shape[0], X.shape[1]), order="F")
    for j in range(X.shape[1]):
        Y[:, j] = A @ X[:, j]
    return Y


def _orthonormal(Y: np.ndarray) -> np.ndarray:
    """Q factor of a Householder QR, computed in place on ``Y``."""
    Q, _ = scipy.linalg.qr(np.asfortranarray(Y), mode="economic", overwrite_a=True,
                           check_finite=False)
    return Q


def truncated_svd(m, d: int, oversample: int = 10, power_iters: int = 7,
                  seed: int = 0) -> TruncatedFactorization:
    """Rank-``d`` SVD by randomized range finding with subspace iteration.

    A Gaussian test matrix of ``d + oversample`` columns sketches the range
    of ``m``; each power iteration multiplies by ``m.T`` and ``m`` with a QR
    re-orthonormalization after every product. The small projected matrix is
    then decomposed exactly. Same seed, same result.

    Args:
        m: SparseCoocMatrix, scipy sparse matrix or 2-d array.
        d: target rank, at most min(rows, cols).
        oversample: extra sketch columns.
        power_iters: number of subspace iterations.
        seed: seed for the Gaussian test matrix.
    """
    A, vocab = _as_operator(m)
    n_rows, n_cols = A.shape
    if d < 1 or d > min(n_rows, n_cols):
        raise ParameterError(f"rank d={d} must lie in [1, {min(n_rows, n_cols)}]")
    if oversample < 0 or power_iters < 0:
        raise ParameterError("oversample and power_iters must be non-negative")
    if (A.nnz if sp.issparse(A) else np.count_nonzero(A)) == 0:
        raise ParameterError("cannot factorize an all-zero matrix")

    width = min(d + oversample, n_rows, n_cols)
    rng = np.random.default_rng(seed)
    At = A.T
    Q = _orthonormal(_product(A, np.asfortranarray(rng.standard_normal((n_cols, width)))))
    for _ in range(power_iters):
        Z = _orthonormal(_product(At, Q))
        del Q
        Q = _orthonormal(_product(A, Z))
        del Z

    # B^T = (Q^T A)^T is tall; factor it as Qb R and decompose only the small R
    Qb, R = scipy.linalg.qr(_product(At, Q), mode="economic", overwrite_a=True,
                            check_finite=False)
    Ur, S, Vrt = np.linalg.svd(R)
    V = Qb @ Ur[:, :d]
    del Qb
    U = Q @ Vrt.T[:, :d]
    del Q
    S = S[:d]

    # fix the sign of each singular pair so the largest-magnitude U entry is positive
    flip = np.sign(U[np.argmax(np.abs(U), axis=0), np.arange(d)])
    flip[flip == 0] = 1.0
    U *= flip
    V *= flip
    return TruncatedFactorization(U, S, V, vocab)


def embed_svd(f: TruncatedFactorization, p: float = 0.0) -> DenseEmbedding:
    """Scale column j of U by S_j**p; p=0 returns U itself (0**0 counts as 1)."""
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"eigenvalue weight p must lie in [0, 1], got {p}")
    if p == 0.0:
        return DenseEmbedding(f.vocab, f.U.copy())
    return DenseEmbedding(f.vocab, f.U * np.power(f.S, p))

"""Skip-gram with negative sampling trained directly on (word, context) pairs.

The per-pair step maximizes

    log s(v_c . v_w) + sum_{c' in negatives} log s(-v_c' . v_w)

with s the logistic function. ``sgns_pair_update`` is the readable numpy
version of one step; ``train_sgns`` runs whole epochs through a compiled
kernel that applies the same update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numba
import numpy as np

from .cooc import ParameterError, pair_ids
from .factorization import DenseEmbedding
from .pairstore import Vocabulary, build_vocab, read_pairs

LR_FLOOR = 1e-4
CHUNK = 1 << 20


class TrainingError(RuntimeError):
    def __init__(self, message: str, pair_index: int | None = None):
        self.pair_index = pair_index
        if pair_index is not None:
            message = f"pair {pair_index}: {message}"
        super().__init__(message)


def sigmoid(x):
    """Logistic function, split by sign so exp never overflows."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


def log_sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    return -np.logaddexp(0.0, -x)


class NoiseTable:
    """Inverse-CDF sampler over context ids.

    Probabilities are proportional to ``count ** exponent``; exponent 1 is
    the plain unigram distribution #(c)/|D|.
    """

    def __init__(self, counts, exponent: float = 1.0):
        counts = np.asarray(counts, dtype=np.float64)
        if counts.size == 0 or counts.sum() <= 0:
            raise ParameterError("noise distribution needs at least one positive count")
        weights = counts ** exponent
        self.probs = weights / weights.sum()
        self.cdf = np.cumsum(self.probs)
        self.cdf[-1] = 1.0
        self.exponent = exponent

    def __len__(self) -> int:
        return len(self.probs)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size)
        return np.searchsorted(self.cdf, u, side="right").astype(np.int32)


def build_noise_table(context_vocab: Vocabulary, exponent: float = 1.0) -> NoiseTable:
    if len(context_vocab) == 0:
        raise ParameterError("empty context vocabulary")
    return NoiseTable(context_vocab.counts, exponent)


@dataclass
class SgnsModel:
    W: np.ndarray
    C: np.ndarray
    targets: Vocabulary | None = None
    contexts: Vocabulary | None = None
    hyper: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.W.shape[1]

    @classmethod
    def init(cls, n_targets: int, n_contexts: int, d: int, seed: int = 0,
             dtype=np.float64, targets=None, contexts=None, **hyper) -> "SgnsModel":
        rng = np.random.default_rng(seed)
        W = ((rng.random((n_targets, d)) - 0.5) / d).astype(dtype)
        C = np.zeros((n_contexts, d), dtype=dtype)
        return cls(W, C, targets, contexts, dict(hyper, d=d, seed=seed))

    def embedding(self) -> DenseEmbedding:
        return DenseEmbedding(self.targets, self.W)

    def context_embedding(self) -> DenseEmbedding:
        return DenseEmbedding(self.contexts, self.C)

    def save(self, prefix) -> list[Path]:
        """Write ``<prefix>.words``, ``<prefix>.contexts`` and ``<prefix>.meta``."""
        prefix = str(prefix)
        paths = [Path(prefix + ".words"), Path(prefix + ".contexts"), Path(prefix + ".meta")]
        self.embedding().save(paths[0])
        self.context_embedding().save(paths[1])
        with open(paths[2], "w", encoding="utf-8", newline="\n") as fh:
            for k in sorted(self.hyper):
                fh.write(f"{k}={self.hyper[k]}\n")
        return paths


def pair_objective(model: SgnsModel, w: int, c: int, negatives: Sequence[int]) -> float:
    vw = model.W[w].astype(np.float64)
    obj = float(log_sigmoid(np.dot(model.C[c], vw)))
    for n in negatives:
        obj += float(log_sigmoid(-np.dot(model.C[n], vw)))
    return obj


def pair_gradient(model: SgnsModel, w: int, c: int, negatives: Sequence[int]):
    """Gradient of the pair objective at the current state.

    Returns ``(grad_w, {context id: grad})``; a context appearing several
    times (positive and/or negative) accumulates its terms.
    """
    vw = model.W[w].astype(np.float64)
    ctx = [c, *negatives]
    dots = np.array([np.dot(model.C[i].astype(np.float64), vw) for i in ctx])
    coef = np.empty(len(ctx))
    coef[0] = 1.0 - sigmoid(dots[0])
    coef[1:] = -sigmoid(dots[1:])
    grad_w = np.zeros_like(vw)
    grad_c: dict[int, np.ndarray] = {}
    for i, g in zip(ctx, coef):
        grad_w += g * model.C[i]
        grad_c[i] = grad_c.get(i, 0.0) + g * vw
    return grad_w, grad_c


def sgns_pair_update(model: SgnsModel, w: int, c: int, negatives: Sequence[int],
                     lr: float, index: int | None = None) -> SgnsModel:
    """One ascent step of size ``lr`` on the pair objective, in place.

    Every gradient term is evaluated at the pre-step state, so context
    updates all use the old word vector.
    """
    if lr <= 0:
        raise ParameterError("learning rate must be positive")
    grad_w, grad_c = pair_gradient(model, w, c, negatives)
    for i, g in grad_c.items():
        model.C[i] += lr * g
    model.W[w] += lr * grad_w
    touched = [model.W[w]] + [model.C[i] for i in grad_c]
    if not all(np.all(np.isfinite(v)) for v in touched):
        raise TrainingError("non-finite parameter after update", index)
    return model


@numba.njit(cache=True, nogil=True)
def _sigmoid_scalar(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@numba.njit(cache=True, nogil=True)
def _step(W, C, w, c, negs, row, lr, vw, grad, coef):
    d = W.shape[1]
    k_neg = negs.shape[1]
    for k in range(d):
        vw[k] = W[w, k]
        grad[k] = 0.0
    # all coefficients from the pre-step state
    dot = 0.0
    for k in range(d):
        dot += C[c, k] * vw[k]
    coef[0] = 1.0 - _sigmoid_scalar(dot)
    for j in range(k_neg):
        n = negs[row, j]
        dot = 0.0
        for k in range(d):
            dot += C[n, k] * vw[k]
        coef[j + 1] = -_sigmoid_scalar(dot)
    for k in range(d):
        grad[k] += coef[0] * C[c, k]
    for j in range(k_neg):
        n = negs[row, j]
        for k in range(d):
            grad[k] += coef[j + 1] * C[n, k]
    for k in range(d):
        C[c, k] += lr * coef[0] * vw[k]
    for j in range(k_neg):
        n = negs[row, j]
        for k in range(d):
            C[n, k] += lr * coef[j + 1] * vw[k]
    ok = True
    for k in range(d):
        W[w, k] += lr * grad[k]
        if not math.isfinite(W[w, k]):
            ok = False
    return ok


@numba.njit(cache=True, nogil=True)
def _train_chunk(W, C, wids, cids, negs, lr0, lr_min, start, total):
    """Sequential updates; returns the offset of a failing pair or -1."""
    d = W.shape[1]
    vw = np.empty(d, dtype=np.float64)
    grad = np.empty(d, dtype=np.float64)
    coef = np.empty(negs.shape[1] + 1, dtype=np.float64)
    denom = max(total - 1, 1)
    for i in range(wids.shape[0]):
        t = start + i
        lr = lr0 + (lr_min - lr0) * (t / denom)
        if not _step(W, C, wids[i], cids[i], negs, i, lr, vw, grad, coef):
            return i
    return -1


@numba.njit(cache=True, parallel=True)
def _train_chunk_parallel(W, C, wids, cids, negs, lr0, lr_min, start, total, workers):
    # unsynchronized updates on shared W and C; races are accepted
    d = W.shape[1]
    n = wids.shape[0]
    denom = max(total - 1, 1)
    span = (n + workers - 1) // workers
    for p in numba.prange(workers):
        vw = np.empty(d, dtype=np.float64)
        grad = np.empty(d, dtype=np.float64)
        coef = np.empty(negs.shape[1] + 1, dtype=np.float64)
        lo = p * span
        hi = min(n, lo + span)
        for i in range(lo, hi):
            t = start + i
            lr = lr0 + (lr_min - lr0) * (t / denom)
            _step(W, C, wids[i], cids[i], negs, i, lr, vw, grad, coef)


def learning_rate(step: int, total: int, lr0: float) -> float:
    """Linear decay from lr0 at the first update to lr0 * 1e-4 at the last."""
    lr_min = lr0 * LR_FLOOR
    return lr0 + (lr_min - lr0) * (step / max(total - 1, 1))


def train_on_ids(model: SgnsModel, wids: np.ndarray, cids: np.ndarray, noise: NoiseTable,
                 neg: int = 5, epochs: int = 5, lr0: float = 0.025, seed: int = 0,
                 workers: int = 1) -> SgnsModel:
    """Run ``epochs`` passes over the pairs in the given order.

    Negatives come from a numpy Generator seeded with ``seed`` (distinct from
    the stream used for initialization), drawn per chunk of pairs.
    """
    if len(wids) == 0:
        raise TrainingError("no training pairs")
    if neg < 0 or epochs < 1 or lr0 <= 0:
        raise ParameterError("need neg >= 0, epochs >= 1, lr0 > 0")
    rng = np.random.default_rng([seed, 1])
    n = len(wids)
    total = n * epochs
    lr_min = lr0 * LR_FLOOR
    wids = np.ascontiguousarray(wids, dtype=np.int32)
    cids = np.ascontiguousarray(cids, dtype=np.int32)
    for epoch in range(epochs):
        for lo in range(0, n, CHUNK):
            hi = min(n, lo + CHUNK)
            negs = noise.sample(rng, (hi - lo, neg))
            start = epoch * n + lo
            if workers > 1:
                _train_chunk_parallel(model.W, model.C, wids[lo:hi], cids[lo:hi], negs,
                                      lr0, lr_min, start, total, workers)
            else:
                bad = _train_chunk(model.W, model.C, wids[lo:hi], cids[lo:hi], negs,
                                   lr0, lr_min, start, total)
                if bad >= 0:
                    raise TrainingError("non-finite parameter after update", start + bad)
    if not (np.all(np.isfinite(model.W)) and np.all(np.isfinite(model.C))):
        raise TrainingError("non-finite parameters after training")
    return model


def train_sgns(pairs, vocabs: tuple[Vocabulary, Vocabulary] | None = None, d: int = 300,
               neg: int = 5, epochs: int = 5, lr0: float = 0.025, seed: int = 0,
               noise_exponent: float = 1.0, dtype=np.float32, workers: int = 1,
               ids: tuple[np.ndarray, np.ndarray] | None = None) -> SgnsModel:
    """Train SGNS on a pair file (or an in-memory pair sequence).

    Args:
        pairs: path of a pair file, or a sequence of (target, context).
        vocabs: target and context vocabularies; built from ``pairs`` if omitted.
        d: dimensionality.
        neg: negatives per observed pair.
        epochs: passes over the data, in file order.
        lr0: initial step size, decayed linearly to lr0 * 1e-4.
        seed: controls initialization and negative draws.
        noise_exponent: 1.0 samples contexts by #(c)/|D|; 0.75 gives the smoothed variant.
        dtype: parameter dtype.
        workers: >1 enables unsynchronized parallel updates (non-deterministic).
        ids: pre-mapped (target ids, context ids) in file order; skips re-reading.
    """
    if isinstance(pairs, (str, Path)):
        source = lambda: read_pairs(pairs)  # noqa: E731
    else:
        source = lambda: iter(pairs)  # noqa: E731
    if vocabs is None:
        vocabs = build_vocab(source())
    targets, contexts = vocabs
    if ids is None:
        wids, cids = pair_ids(source(), targets, contexts)
    else:
        wids, cids = ids
    if len(wids) == 0:
        raise TrainingError("empty pair file")
    noise = build_noise_table(contexts, noise_exponent)
    model = SgnsModel.init(len(targets), len(contexts), d, seed, dtype, targets, contexts,
                           neg=neg, epochs=epochs, lr0=lr0, noise_exponent=noise_exponent,
                           pairs=len(wids), workers=workers)
    return train_on_ids(model, wids, cids, noise, neg, epochs, lr0, seed, workers)

import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from secondorder.evaluation import (MissingVectorError, SimilarityDataset,
                                    UndefinedCorrelationError, ZeroVectorError,
                                    bonferroni, bootstrap_two_sample, cosine_distance,
                                    eval_wordsim, group_mean_cd, spearman)
from secondorder.factorization import DenseEmbedding
from secondorder.pairstore import PairFormatError, Vocabulary
from secondorder.simgen import GroupManifest

vectors = arrays(np.float64, 5, elements=st.floats(-10, 10, allow_nan=False))


def embedding(rows: dict):
    v = Vocabulary()
    for w in rows:
        v.add(w)
    return DenseEmbedding(v, np.array(list(rows.values()), dtype=float))


def test_cd_examples():
    assert cosine_distance([1.0, 2.0], [1.0, 2.0]) == pytest.approx(0.0, abs=1e-15)
    assert cosine_distance([1, 0], [1, 1]) == pytest.approx(1 - math.sqrt(2) / 2, abs=1e-12)
    x = sp.csr_matrix([[1.0, 0.0, 2.0, 0.0]])
    y = sp.csr_matrix([[0.0, 3.0, 0.0, 1.0]])
    assert cosine_distance(x, y) == 1.0


def test_cd_sparse_equals_dense():
    rng = np.random.default_rng(0)
    a, b = rng.random(20), rng.random(20)
    a[a < 0.5] = 0
    dense = cosine_distance(a, b)
    assert cosine_distance(sp.csr_matrix(a), sp.csr_matrix(b)) == pytest.approx(dense, abs=1e-14)


def test_cd_zero_vector_raises():
    with pytest.raises(ZeroVectorError):
        cosine_distance([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ZeroVectorError):
        cosine_distance(sp.csr_matrix((1, 3)), sp.csr_matrix([[1.0, 0, 0]]))


@settings(max_examples=200, deadline=None)
@given(vectors, vectors, st.floats(1e-3, 1e3))
def test_cd_properties(x, y, alpha):
    assume(np.linalg.norm(x) > 1e-3 and np.linalg.norm(y) > 1e-3)
    d = cosine_distance(x, y)
    assert d == pytest.approx(cosine_distance(y, x), abs=1e-12)
    assert -1e-12 <= d <= 2 + 1e-12
    assert cosine_distance(x, alpha * x) == pytest.approx(0.0, abs=1e-12)


def test_group_mean_cd():
    emb = embedding({"a": [1, 0], "b": [0, 1], "c": [1, 1], "d": [5, 5]})
    man = GroupManifest({"g": ["a", "b", "c"], "h": ["c", "d"]})
    s = group_mean_cd(emb, man, "g")
    assert len(s.distances) == 3
    assert s.mean == pytest.approx(np.mean(s.distances), abs=1e-12)
    assert s.mean == pytest.approx((1 + 2 * (1 - math.sqrt(2) / 2)) / 3)
    assert group_mean_cd(emb, man, "h").mean == pytest.approx(0.0, abs=1e-12)


def test_group_missing_word_named():
    emb = embedding({"a": [1, 0]})
    with pytest.raises(MissingVectorError, match="ghost"):
        group_mean_cd(emb, GroupManifest({"g": ["a", "ghost"]}), "g")


def test_scaling_leaves_group_scores_unchanged():
    rng = np.random.default_rng(1)
    words = {f"w{i}": rng.standard_normal(4) for i in range(8)}
    man = GroupManifest({"x": ["w0", "w1", "w2", "w3"], "y": ["w4", "w5", "w6", "w7"]})
    e1 = embedding(words)
    e2 = DenseEmbedding(e1.vocab, 7.5 * e1.matrix)
    for g in ("x", "y"):
        assert group_mean_cd(e1, man, g).mean == pytest.approx(group_mean_cd(e2, man, g).mean,
                                                                abs=1e-12)


def test_spearman_examples():
    a = [0.3, 1.2, 5.0, 2.2, 9.1]
    assert spearman(a, np.exp(a)) == pytest.approx(1.0)
    assert spearman(a, [-x for x in a]) == pytest.approx(-1.0)
    assert spearman([1, 2, 2, 4], [1, 3, 2, 4]) == pytest.approx(
        oracles.spearman([1, 2, 2, 4], [1, 3, 2, 4]), abs=1e-12)


def test_spearman_errors():
    with pytest.raises(ValueError):
        spearman([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        spearman([1], [1])
    with pytest.raises(UndefinedCorrelationError):
        spearman([1, 1, 1], [1, 2, 3])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=3, max_size=25))
def test_spearman_oracle_and_monotone_invariance(pairs):
    a, b = zip(*pairs)
    assume(len(set(a)) > 1 and len(set(b)) > 1)
    rho = spearman(a, b)
    assert rho == pytest.approx(oracles.spearman(a, b), abs=1e-12)
    assert spearman([x ** 3 + 2 for x in a], b) == pytest.approx(rho, abs=1e-12)
    assert -1 <= rho <= 1


def test_wordsim_perfect_and_coverage():
    emb = embedding({"a": [1, 0], "b": [1, 0.1], "c": [1, 1], "d": [0, 1]})
    ds = SimilarityDataset([("a", "b", 9.0), ("a", "c", 5.0), ("a", "d", 1.0), ("a", "zz", 3.0)])
    res = eval_wordsim(emb, ds)
    assert res.rho == pytest.approx(1.0)
    assert (res.evaluated, res.total) == (3, 4)


def test_wordsim_coverage_two_of_three():
    emb = embedding({"a": [1, 0], "b": [1, 1], "c": [0, 1]})
    res = eval_wordsim(emb, SimilarityDataset([("a", "b", 1), ("b", "c", 2), ("a", "oov", 3)]))
    assert res.coverage == pytest.approx(2 / 3)


def test_wordsim_all_oov():
    with pytest.raises(ValueError):
        eval_wordsim(embedding({"a": [1, 0]}), SimilarityDataset([("x", "y", 1.0)]))


def test_wordsim_constant_predictions_undefined():
    emb = embedding({"a": [1, 0], "b": [1, 0], "c": [1, 0]})
    res = eval_wordsim(emb, SimilarityDataset([("a", "b", 1), ("a", "c", 2), ("b", "c", 3)]))
    assert res.rho is None and not res.defined


def test_dataset_rejects_duplicates():
    with pytest.raises(ValueError):
        SimilarityDataset([("a", "b", 1), ("b", "a", 2)])


def test_dataset_load_formats(tmp_path):
    (tmp_path / "t.tsv").write_text("a\tb\t1.5\nc\td\t2\n", encoding="utf-8")
    (tmp_path / "c.csv").write_text("Word 1,Word 2,Human (mean)\na,b,1.5\nc,d,2\n",
                                    encoding="utf-8")
    t = SimilarityDataset.load(tmp_path / "t.tsv")
    assert t == SimilarityDataset.load(tmp_path / "c.csv") == [("a", "b", 1.5), ("c", "d", 2.0)]
    t.save(tmp_path / "o.tsv")
    assert SimilarityDataset.load(tmp_path / "o.tsv") == t


def test_dataset_bad_score(tmp_path):
    (tmp_path / "t.tsv").write_text("a\tb\t1\nc\td\tx\n", encoding="utf-8")
    with pytest.raises(PairFormatError):
        SimilarityDataset.load(tmp_path / "t.tsv")


def test_bootstrap_identical_samples():
    a = list(np.random.default_rng(0).random(30))
    res = bootstrap_two_sample(a, a, 2000, seed=0)
    assert res.observed == 0.0 and res.p > 0.5


def test_bootstrap_separated_samples():
    rng = np.random.default_rng(1)
    a = rng.normal(0.0, 1e-3, 10**4)
    b = rng.normal(1.0, 1e-3, 10**4)
    assert bootstrap_two_sample(a, b, 1000, seed=0).p < 0.001


def test_bootstrap_degenerate():
    res = bootstrap_two_sample([1.0, 1.0, 1.0], [1.0, 1.0], 1000)
    assert res.p == 1.0 and res.degenerate


def test_bootstrap_errors():
    with pytest.raises(ValueError):
        bootstrap_two_sample([1.0], [1.0, 2.0], 1000)
    with pytest.raises(ValueError):
        bootstrap_two_sample([1.0, 2.0], [1.0, 2.0], 999)


def test_bootstrap_deterministic():
    rng = np.random.default_rng(2)
    a, b = rng.random(20), rng.random(25) + 0.1
    assert bootstrap_two_sample(a, b, 3000, 5) == bootstrap_two_sample(a, b, 3000, 5)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=15),
       st.lists(st.floats(0, 1), min_size=2, max_size=15), st.integers(0, 100))
def test_bootstrap_symmetric(a, b, seed):
    assert bootstrap_two_sample(a, b, 1000, seed).p == bootstrap_two_sample(b, a, 1000, seed).p


def test_bootstrap_calibration():
    rng = np.random.default_rng(12345)
    rejections = 0
    for rep in range(1000):
        a = rng.normal(0, 1, 45)
        b = rng.normal(0, 1, 45)
        rejections += bootstrap_two_sample(a, b, 1000, seed=rep).p < 0.05
    assert 0.03 <= rejections / 1000 <= 0.07


def test_bonferroni():
    assert bonferroni(0.01, 9) == pytest.approx(0.09)
    assert bonferroni(0.5, 9) == 1.0
    assert bonferroni(0.2, 1) == 0.2
    with pytest.raises(ValueError):
        bonferroni(1.5, 2)
    with pytest.raises(ValueError):
        bonferroni(0.5, 0)

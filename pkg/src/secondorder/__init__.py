"""PPMI, SVD and SGNS word spaces from word-context pairs, and probes of how
they respond to first- and second-order context overlap."""

__version__ = "0.1.0"

from .pairstore import PairRecord, Vocabulary, build_vocab, read_pairs, shuffle_pairs, write_pairs
from .cooc import SparseCoocMatrix, count_cooccurrences, counts_from_file, ppmi_transform
from .factorization import DenseEmbedding, TruncatedFactorization, embed_svd, truncated_svd
from .sgns import NoiseTable, SgnsModel, build_noise_table, sgns_pair_update, sigmoid, train_sgns
from .simgen import GroupManifest, SimConfig, generate_experiment1, generate_group, lognormal_probs
from .propagation import (PropagationConfig, cooc_frequency, merge_base_and_second, propagate,
                          second_order_vector)
from .evaluation import (bonferroni, bootstrap_two_sample, cosine_distance, eval_wordsim,
                         group_mean_cd, spearman)

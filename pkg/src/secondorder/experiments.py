"""End-to-end recipes: pair extraction, the overlap simulation, and propagation.

Both experiments write plain-text tables (``report.txt``) and machine-readable
``key=value`` files (``report.kv``) into the run directory. Reports carry no
timestamps, so the same configuration and seed give byte-identical files.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, fields
from itertools import combinations
from pathlib import Path

import numpy as np

from .cooc import counts_from_ids, ppmi_transform, read_pair_ids
from .evaluation import (GroupScore, SimilarityDataset, bonferroni, bootstrap_two_sample,
                         eval_wordsim, group_mean_cd)
from .factorization import embed_svd, truncated_svd
from .pairstore import count_lines
from .propagation import PropagationConfig, merge_base_and_second, propagate
from .sgns import train_sgns
from .simgen import SimConfig, generate_experiment1

log = logging.getLogger(__name__)

MODELS = ("ppmi", "svd", "sgns")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


class _stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def extract_pairs(corpus, window: int, out) -> int:
    """Symmetric-window pairs from a one-sentence-per-line, whitespace-tokenized file."""
    if window < 1:
        raise ValueError("window must be >= 1")
    n = 0
    with open(corpus, encoding="utf-8") as src, open(out, "w", encoding="utf-8", newline="\n") as fh:
        for line in src:
            toks = line.split()
            for i, w in enumerate(toks):
                lo, hi = max(0, i - window), min(len(toks), i + window + 1)
                for j in range(lo, hi):
                    if j != i:
                        fh.write(f"{w}\t{toks[j]}\n")
                        n += 1
    return n


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunConfig:
    """Resolved settings for one run; defaults are the published hyperparameters."""

    out: Path = Path("run")
    seed: int = 0
    # models
    d: int = 300
    alpha: float = 0.75
    k: float = 5.0
    p: float = 0.0
    neg: int = 5
    epochs: int = 5
    lr0: float = 0.025
    noise_exponent: float = 1.0
    oversample: int = 10
    power_iters: int = 7
    models: tuple[str, ...] = MODELS
    # simulation
    n_targets: int = 10
    n_context_types: int = 1000
    n_samples: int = 1000
    groups: tuple[str, ...] = ("1st", "2nd", "none")
    profile: str = "pass"
    bootstrap_samples: int = 10_000
    # propagation
    corpus: Path | None = None
    pairs: Path | None = None
    dataset: Path | None = None
    window: int = 5
    thresholds: tuple[int, ...] = (2000, 20000, 200000)
    ratio: float = 2.0

    def __post_init__(self):
        self.out = Path(self.out).resolve()
        for name in ("corpus", "pairs", "dataset"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, Path(v).resolve())
        self.models = tuple(self.models)
        self.groups = tuple(self.groups)
        self.thresholds = tuple(int(t) for t in self.thresholds)
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise ValueError(f"unknown model(s) {bad}")
        if not self.ratio > 0:
            raise ValueError("ratio must be > 0")
        if self.d < 1 or self.neg < 0 or self.epochs < 1 or self.lr0 <= 0:
            raise ValueError("invalid model hyperparameters")

    def sim_config(self) -> SimConfig:
        return SimConfig(self.n_targets, self.n_context_types, self.n_samples, self.seed, self.groups,
                         self.profile)

    def items(self):
        for f in fields(self):
            if f.name == "out":
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(map(str, v))
            yield f.name, v


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))       # shortest string that round-trips exactly
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def write_kv(path, items) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in items:
            fh.write(f"{k}={_fmt(v)}\n")


def read_kv(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def train_models(cfg: RunConfig, pairs_path):
    """Train every model in ``cfg.models`` on one pair file.

    Returns ``({model: vector lookup}, counts)``.
    """
    with _stage("count"):
        rows, cols, r, c = read_pair_ids(pairs_path)
        if len(r) == 0:
            raise ValueError(f"no pairs in {pairs_path}")
        counts = counts_from_ids(rows, cols, r, c)
    spaces = {}
    ppmi = None
    if "ppmi" in cfg.models or "svd" in cfg.models:
        with _stage("ppmi"):
            ppmi = ppmi_transform(counts, cfg.alpha, cfg.k)
        if "ppmi" in cfg.models:
            spaces["ppmi"] = ppmi
    if "svd" in cfg.models:
        with _stage("svd"):
            d = min(cfg.d, *ppmi.shape)
            f = truncated_svd(ppmi, d, cfg.oversample, cfg.power_iters, cfg.seed)
            spaces["svd"] = embed_svd(f, cfg.p)
    if "sgns" in cfg.models:
        with _stage("sgns"):
            model = train_sgns(pairs_path, (rows, cols), cfg.d, cfg.neg, cfg.epochs, cfg.lr0,
                               cfg.seed, cfg.noise_exponent, ids=(r, c))
            spaces["sgns"] = model.embedding()
    return {m: spaces[m] for m in cfg.models}, counts


# --------------------------------------------------------------------------
# overlap simulation


@dataclass
class Comparison:
    model: str
    group_a: str
    group_b: str
    diff: float
    p: float
    p_adj: float
    degenerate: bool


@dataclass
class Exp1Report:
    config: RunConfig
    scores: dict[str, dict[str, GroupScore]]
    comparisons: list[Comparison]
    n_pairs: int
    digest: str

    def table(self) -> str:
        groups = self.config.groups
        lines = ["mean cosine distance between targets of each group", ""]
        lines.append("model".ljust(8) + "".join(g.rjust(10) for g in groups))
        for m, by_group in self.scores.items():
            lines.append(m.upper().ljust(8) + "".join(f"{by_group[g].mean:10.4f}" for g in groups))
        lines += ["", f"two-sample bootstrap, B={self.config.bootstrap_samples}, "
                  f"Bonferroni m={len(self.comparisons)}, two-tailed", ""]
        lines.append(f"{'model':8}{'comparison':16}{'diff':>9}{'p':>11}{'p_adj':>11}  reject@0.001")
        for c in self.comparisons:
            flag = "degenerate" if c.degenerate else ("yes" if c.p_adj < 0.001 else "no")
            lines.append(f"{c.model.upper():8}{c.group_a + ' vs ' + c.group_b:16}{c.diff:9.4f}"
                         f"{c.p:11.6f}{c.p_adj:11.6f}  {flag}")
        lines.append("")
        lines.append(f"pairs={self.n_pairs} sha256={self.digest}")
        return "\n".join(lines) + "\n"

    def kv_items(self):
        for k, v in self.config.items():
            yield f"config.{k}", v
        yield "input.pairs", self.n_pairs
        yield "input.pairs.sha256", self.digest
        for m, by_group in self.scores.items():
            for g, s in by_group.items():
                yield f"{m}.cd.{g}", s.mean
                yield f"{m}.cd_sd.{g}", float(np.std(s.distances))
        for c in self.comparisons:
            key = f"{c.model}.{c.group_a}_vs_{c.group_b}"
            yield f"{key}.diff", c.diff
            yield f"{key}.p", c.p
            yield f"{key}.p_adj", c.p_adj
            yield f"{key}.degenerate", c.degenerate

    def write(self, out_dir) -> None:
        out_dir = Path(out_dir)
        (out_dir / "report.txt").write_text(self.table(), encoding="utf-8")
        write_kv(out_dir / "report.kv", self.kv_items())
        with open(out_dir / "distances.tsv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("model\tgroup\tword1\tword2\tcd\n")
            for m, by_group in self.scores.items():
                for g, s in by_group.items():
                    for (a, b), dist in zip(s.pairs, s.distances):
                        fh.write(f"{m}\t{g}\t{a}\t{b}\t{dist:.17g}\n")


def score_groups(spaces, manifest, groups, B: int, seed: int):
    scores = {m: {g: group_mean_cd(space, manifest, g) for g in groups}
              for m, space in spaces.items()}
    raw = []
    for m in spaces:
        for i, (ga, gb) in enumerate(combinations(groups, 2)):
            a, b = scores[m][ga].distances, scores[m][gb].distances
            res = bootstrap_two_sample(a, b, B, seed=seed + i)
            raw.append((m, ga, gb, float(np.mean(a) - np.mean(b)), res))
    m_tests = len(raw)
    comparisons = [Comparison(m, ga, gb, diff, r.p, bonferroni(r.p, m_tests), r.degenerate)
                   for m, ga, gb, diff, r in raw]
    return scores, comparisons


def run_experiment1(cfg: RunConfig) -> Exp1Report:
    cfg.out.mkdir(parents=True, exist_ok=True)
    pairs_path = cfg.out / "pairs.txt"
    with _stage("simulate"):
        _, manifest = generate_experiment1(cfg.sim_config(), pairs_path, cfg.out / "manifest.txt")
    spaces, counts = train_models(cfg, pairs_path)
    with _stage("evaluate"):
        scores, comparisons = score_groups(spaces, manifest, cfg.groups,
                                           cfg.bootstrap_samples, cfg.seed)
        report = Exp1Report(cfg, scores, comparisons, int(counts.row_sums.sum()),
                            sha256(pairs_path))
        report.write(cfg.out)
    return report


# --------------------------------------------------------------------------
# second-order propagation


def variant_label(threshold: int) -> str:
    for div, suffix in ((1_000_000, "M"), (1000, "k")):
        if threshold >= div and threshold % div == 0:
            return f"{threshold // div}{suffix}"
    return str(threshold)


@dataclass
class Exp2Report:
    config: RunConfig
    variants: list[str]
    results: dict[str, dict[str, object]]      # model -> variant -> WordSimResult
    pair_counts: dict[str, dict[str, int]]     # variant -> counts
    digests: dict[str, str]

    def table(self) -> str:
        lines = ["Spearman rho of cosine similarity against human judgments", ""]
        lines.append("model".ljust(8) + "".join(v.rjust(10) for v in self.variants))
        for m, by_variant in self.results.items():
            cells = []
            for v in self.variants:
                r = by_variant[v]
                cells.append(f"{r.rho:10.4f}" if r.defined else "undefined".rjust(10))
            lines.append(m.upper().ljust(8) + "".join(cells))
        lines.append("")
        lines.append("coverage".ljust(8) + "".join(
            f"{self.results[m][v].evaluated}/{self.results[m][v].total}".rjust(10)
            for m in list(self.results)[:1] for v in self.variants))
        lines.append("")
        lines.append("variant".ljust(10) + "base_pairs".rjust(14) + "second_pairs".rjust(14)
                     + "words".rjust(10))
        for v in self.variants:
            pc = self.pair_counts[v]
            lines.append(v.ljust(10) + f"{pc['base_pairs']:14d}{pc['second_pairs']:14d}"
                         f"{pc['propagated_words']:10d}")
        return "\n".join(lines) + "\n"

    def kv_items(self):
        for k, v in self.config.items():
            yield f"config.{k}", v
        for name, digest in self.digests.items():
            yield f"input.{name}.sha256", digest
        for v in self.variants:
            for k, n in self.pair_counts[v].items():
                yield f"variant.{v}.{k}", n
        for m, by_variant in self.results.items():
            for v in self.variants:
                r = by_variant[v]
                yield f"{m}.rho.{v}", r.rho if r.defined else "undefined"
                yield f"{m}.evaluated.{v}", r.evaluated
                yield f"{m}.total.{v}", r.total

    def write(self, out_dir) -> None:
        out_dir = Path(out_dir)
        (out_dir / "report.txt").write_text(self.table(), encoding="utf-8")
        write_kv(out_dir / "report.kv", self.kv_items())


def run_experiment2(cfg: RunConfig) -> Exp2Report:
    if cfg.dataset is None:
        raise StageError("config", ValueError("a similarity dataset is required"))
    if (cfg.corpus is None) == (cfg.pairs is None):
        raise StageError("config", ValueError("give exactly one of corpus or pairs"))
    cfg.out.mkdir(parents=True, exist_ok=True)
    digests = {}
    with _stage("load-dataset"):
        dataset = SimilarityDataset.load(cfg.dataset)
        digests["dataset"] = sha256(cfg.dataset)
    with _stage("extract"):
        if cfg.corpus is not None:
            digests["corpus"] = sha256(cfg.corpus)
            base = cfg.out / "base.pairs"
            extract_pairs(cfg.corpus, cfg.window, base)
        else:
            digests["pairs"] = sha256(cfg.pairs)
            base = cfg.pairs
        n_base = count_lines(base)
        if n_base == 0:
            raise ValueError("no base pairs extracted")
    with _stage("count"):
        base_counts = counts_from_ids(*read_pair_ids(base))

    variants = ["base"]
    files = {"base": base}
    pair_counts = {"base": {"base_pairs": n_base, "second_pairs": 0, "propagated_words": 0}}
    for thr in cfg.thresholds:
        label = variant_label(thr)
        with _stage(f"propagate-{label}"):
            pcfg = PropagationConfig(thr, cfg.ratio, cfg.seed)
            second = cfg.out / f"second.{label}.pairs"
            stats = propagate(base, second, pcfg, counts=base_counts)
            merged = cfg.out / f"merged.{label}.pairs"
            merge_base_and_second(base, second, merged, cfg.seed)
        variants.append(label)
        files[label] = merged
        pair_counts[label] = {"base_pairs": n_base, "second_pairs": stats.lines,
                              "propagated_words": stats.words}
    del base_counts

    results: dict[str, dict[str, object]] = {m: {} for m in cfg.models}
    for v in variants:
        log.info("variant %s", v)
        spaces, _ = train_models(cfg, files[v])
        with _stage(f"evaluate-{v}"):
            for m, space in spaces.items():
                results[m][v] = eval_wordsim(space, dataset)
        del spaces
    report = Exp2Report(cfg, variants, results, pair_counts, digests)
    report.write(cfg.out)
    return report

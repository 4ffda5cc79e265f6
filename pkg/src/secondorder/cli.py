"""Command line entry point.

Every subcommand accepts ``--config FILE`` with ``key=value`` lines (keys are
the long option names, dashes or underscores); explicit flags win over the
file.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cooc import SparseCoocMatrix, counts_from_file, ppmi_transform
from .evaluation import (SimilarityDataset, bonferroni, bootstrap_two_sample, eval_wordsim,
                         group_mean_cd)
from .experiments import (MODELS, RunConfig, StageError, extract_pairs, read_kv,
                          run_experiment1, run_experiment2, write_kv)
from .factorization import DenseEmbedding, embed_svd, truncated_svd
from .propagation import PropagationConfig, merge_base_and_second, propagate
from .sgns import train_sgns
from .simgen import KINDS, PROFILES, GroupManifest, SimConfig, generate_experiment1

log = logging.getLogger("secondorder")


def csv_list(kind=str):
    def parse(text):
        if isinstance(text, (list, tuple)):
            return tuple(text)
        items = tuple(kind(x.strip()) for x in str(text).split(",") if x.strip())
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return items
    return parse


def groups_arg(text):
    groups = csv_list()(text)
    bad = [g for g in groups if g not in KINDS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown group(s) {bad}; choose from {KINDS}")
    return groups


def positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _add_ppmi(p):
    p.add_argument("--alpha", type=float, default=0.75, help="context smoothing exponent")
    p.add_argument("--k", type=float, default=5.0, help="PMI shift, subtracts log(k)")


def _add_svd(p):
    p.add_argument("--d", type=int, default=300, help="dimensionality")
    p.add_argument("--p", type=float, default=0.0, help="eigenvalue weighting exponent")
    p.add_argument("--oversample", type=int, default=10)
    p.add_argument("--power-iters", type=int, default=7)


def _add_sgns(p, with_d=True):
    if with_d:
        p.add_argument("--d", type=int, default=300, help="dimensionality")
    p.add_argument("--neg", type=int, default=5, help="negative samples per pair")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr0", type=float, default=0.025, help="initial step size")
    p.add_argument("--noise-exponent", type=float, default=1.0,
                   help="noise distribution ~ count**exponent (1.0: plain unigram)")


def _add_models(p):
    _add_ppmi(p)
    _add_svd(p)
    _add_sgns(p, with_d=False)
    p.add_argument("--models", type=csv_list(), default=",".join(MODELS))


def _add_sim(p):
    p.add_argument("--n-targets", type=int, default=10)
    p.add_argument("--n-context-types", type=int, default=1000)
    p.add_argument("--n-samples", type=int, default=1000)
    p.add_argument("--groups", type=groups_arg, default="1st,2nd,none")
    p.add_argument("--profile", choices=PROFILES, default="pass",
                   help="lognormal frequency profile: fresh per sampling pass, or fixed per type set")


def _load_space(args):
    if args.embedding:
        return DenseEmbedding.load(args.embedding)
    return SparseCoocMatrix.load(args.ppmi)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secondorder", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", type=Path, help="key=value file; flags take precedence")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = command("simulate", "generate the overlap-group pair file and manifest")
    _add_sim(p)
    p.add_argument("--out", type=Path, required=True, help="pair file to write")
    p.add_argument("--manifest", type=Path, required=True)

    p = command("extract", "symmetric-window pairs from a tokenized corpus")
    p.add_argument("corpus", type=Path)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--out", type=Path, required=True)

    p = command("propagate", "sample second-order pairs for low-frequency words")
    p.add_argument("pairs", type=Path)
    p.add_argument("--threshold", type=int, required=True, help="co-occurrence frequency threshold")
    p.add_argument("--ratio", type=positive_float, default=2.0, help="draws per unit of frequency")
    p.add_argument("--out", type=Path, required=True, help="second-order pair file")
    p.add_argument("--merged", type=Path, help="also write base+second shuffled here")

    p = command("train-ppmi", "count pairs and write the PPMI matrix")
    p.add_argument("pairs", type=Path)
    _add_ppmi(p)
    p.add_argument("--out", type=Path, required=True)

    p = command("train-svd", "PPMI followed by truncated SVD")
    p.add_argument("pairs", type=Path)
    _add_ppmi(p)
    _add_svd(p)
    p.add_argument("--out", type=Path, required=True, help="embedding text file")

    p = command("train-sgns", "skip-gram with negative sampling on a pair file")
    p.add_argument("pairs", type=Path)
    _add_sgns(p)
    p.add_argument("--workers", type=int, default=1, help=">1: unsynchronized parallel updates")
    p.add_argument("--out", type=Path, required=True, help="output prefix")

    for name, help in (("eval-groups", "mean cosine distance per overlap group"),
                       ("eval-wordsim", "Spearman correlation on a similarity dataset")):
        p = command(name, help)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--embedding", type=Path, help="text embedding file")
        src.add_argument("--ppmi", type=Path, help="PPMI matrix written by train-ppmi")
        if name == "eval-groups":
            p.add_argument("--manifest", type=Path, required=True)
        else:
            p.add_argument("--dataset", type=Path, required=True)
        p.add_argument("--out", type=Path, help="key=value report")

    p = command("bootstrap", "two-sample bootstrap test of equal means")
    p.add_argument("a", type=Path, help="one value per line")
    p.add_argument("b", type=Path)
    p.add_argument("-B", "--samples", type=int, default=10_000)
    p.add_argument("--tests", type=int, default=1, help="Bonferroni family size")

    p = command("exp1", "overlap simulation: generate, train, score, test")
    _add_sim(p)
    _add_models(p)
    p.add_argument("--bootstrap-samples", type=int, default=10_000)
    p.add_argument("--out", type=Path, required=True, help="run directory")

    p = command("exp2", "second-order propagation: extract, propagate, train, evaluate")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--corpus", type=Path)
    src.add_argument("--pairs", type=Path)
    p.add_argument("--dataset", type=Path)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--thresholds", type=csv_list(int), default="2000,20000,200000")
    p.add_argument("--ratio", type=positive_float, default=2.0)
    _add_models(p)
    p.add_argument("--out", type=Path, required=True, help="run directory")

    parser._subparsers_by_name = sub.choices  # type: ignore[attr-defined]
    return parser


def parse_args(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else [str(a) for a in argv]
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    config = pre.parse_known_args(argv)[0].config
    command = next((a for a in argv if a in parser._subparsers_by_name), None)
    if config is None or command is None:
        return parser.parse_args(argv)
    sub = parser._subparsers_by_name[command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in read_kv(config).items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("config", "help"):
            parser.error(f"{config}: unknown key {key!r} for {command}")
        action = known[dest]
        defaults[dest] = action.type(value) if action.type else value
        # a config file can satisfy a required option
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _run_config(args) -> RunConfig:
    names = {f for f in RunConfig.__dataclass_fields__}
    return RunConfig(**{k: v for k, v in vars(args).items() if k in names and v is not None})


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except StageError as e:
        print(f"secondorder {args.command}: error {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, RuntimeError) as e:
        print(f"secondorder {args.command}: error [{args.command}] {type(e).__name__}: {e}",
              file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "simulate":
        cfg = SimConfig(args.n_targets, args.n_context_types, args.n_samples, args.seed, args.groups,
                        args.profile)
        path, manifest = generate_experiment1(cfg, args.out, args.manifest)
        print(f"wrote {path} ({cfg.pairs_per_group() * len(cfg.groups)} pairs), {args.manifest}")
    elif cmd == "extract":
        n = extract_pairs(args.corpus, args.window, args.out)
        print(f"wrote {n} pairs to {args.out}")
    elif cmd == "propagate":
        stats = propagate(args.pairs, args.out, PropagationConfig(args.threshold, args.ratio, args.seed))
        print(f"propagated {stats.words} words, {stats.lines} lines "
              f"({stats.self_draws} self-draws dropped) to {args.out}")
        if args.merged:
            merge_base_and_second(args.pairs, args.out, args.merged, args.seed)
            print(f"merged into {args.merged}")
    elif cmd == "train-ppmi":
        ppmi = ppmi_transform(counts_from_file(args.pairs), args.alpha, args.k)
        ppmi.save(args.out)
        print(f"wrote {ppmi.shape[0]}x{ppmi.shape[1]} PPMI matrix ({ppmi.nnz} cells) to {args.out}")
    elif cmd == "train-svd":
        ppmi = ppmi_transform(counts_from_file(args.pairs), args.alpha, args.k)
        d = min(args.d, *ppmi.shape)
        f = truncated_svd(ppmi, d, args.oversample, args.power_iters, args.seed)
        embed_svd(f, args.p).save(args.out)
        print(f"wrote {ppmi.shape[0]}x{d} embedding to {args.out}")
    elif cmd == "train-sgns":
        model = train_sgns(args.pairs, None, args.d, args.neg, args.epochs, args.lr0, args.seed,
                           args.noise_exponent, workers=args.workers)
        for path in model.save(args.out):
            print(f"wrote {path}")
    elif cmd == "eval-groups":
        space = _load_space(args)
        manifest = GroupManifest.load(args.manifest)
        items = []
        for g in manifest.groups:
            s = group_mean_cd(space, manifest, g)
            print(f"{g}\t{s.mean:.4f}")
            items.append((f"cd.{g}", s.mean))
        if args.out:
            write_kv(args.out, items)
    elif cmd == "eval-wordsim":
        res = eval_wordsim(_load_space(args), SimilarityDataset.load(args.dataset))
        rho = f"{res.rho:.4f}" if res.defined else "undefined"
        print(f"rho={rho} coverage={res.evaluated}/{res.total}")
        if args.out:
            write_kv(args.out, [("rho", res.rho if res.defined else "undefined"),
                                ("evaluated", res.evaluated), ("total", res.total)])
    elif cmd == "bootstrap":
        a, b = np.loadtxt(args.a, ndmin=1), np.loadtxt(args.b, ndmin=1)
        res = bootstrap_two_sample(a, b, args.samples, args.seed)
        print(f"diff={a.mean() - b.mean():.6g} p={res.p:.6g} "
              f"p_adj={bonferroni(res.p, args.tests):.6g}" + (" degenerate" if res.degenerate else ""))
    elif cmd == "exp1":
        report = run_experiment1(_run_config(args))
        print(report.table(), end="")
    elif cmd == "exp2":
        report = run_experiment2(_run_config(args))
        print(report.table(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())

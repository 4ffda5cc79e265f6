"""Artificial target-context pairs with controlled first/second-order overlap.

Each group has ``n_targets`` targets. A target samples ``n_samples`` context
tokens from its first-order type set C1; every C1 type in turn samples
``n_samples`` tokens from its second-order type set C2. Which sets are shared
decides the group:

    kind   C1 shared across targets   C2 shared across C1 types
    1st    yes                        no
    2nd    no                         yes
    none   no                         no
    both   yes                        yes

Sharing a set means sharing the context strings. By default every sampling
pass draws its own lognormal frequency profile over its set (``profile="pass"``);
``profile="set"`` instead fixes one profile per set, so targets sharing C1 also
share its frequencies.

Every emitted pair is followed by its reverse, and all strings carry the group
label as prefix so groups never share a word.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import count
from pathlib import Path

import numpy as np

from .pairstore import PairFormatError, PairRecord, concat_files, shuffle_pairs, write_pairs

KINDS = ("1st", "2nd", "none", "both")
PROFILES = ("pass", "set")
SHARED_FIRST = frozenset({"1st", "both"})
SHARED_SECOND = frozenset({"2nd", "both"})


@dataclass(frozen=True)
class SimConfig:
    n_targets: int = 10
    n_context_types: int = 1000
    n_samples: int = 1000
    seed: int = 0
    groups: tuple[str, ...] = ("1st", "2nd", "none")
    profile: str = "pass"

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}")
        for name in ("n_targets", "n_context_types", "n_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        groups = tuple(self.groups)
        if not groups:
            raise ValueError("at least one group is required")
        unknown = [g for g in groups if g not in KINDS]
        if unknown:
            raise ValueError(f"unknown group kind(s) {unknown}; choose from {KINDS}")
        if len(set(groups)) != len(groups):
            raise ValueError("duplicate group kinds")
        object.__setattr__(self, "groups", groups)

    def pairs_per_group(self) -> int:
        return 2 * self.n_targets * self.n_samples * (1 + self.n_context_types)


@dataclass
class GroupManifest:
    groups: dict[str, list[str]]

    def prefix(self, group: str) -> str:
        return f"{group}_"

    def targets(self, group: str) -> list[str]:
        return self.groups[group]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for g, words in self.groups.items():
                for w in words:
                    fh.write(f"{g}\t{w}\n")

    @classmethod
    def load(cls, path) -> "GroupManifest":
        groups: dict[str, list[str]] = {}
        with open(path, encoding="utf-8", newline="\n") as fh:
            for lineno, line in enumerate(fh, start=1):
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 2:
                    raise PairFormatError("expected <group>\\t<target>", path, lineno)
                groups.setdefault(fields[0], []).append(fields[1])
        return cls(groups)


def lognormal_weights(m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` draws from the standard lognormal, exp(N(0, 1))."""
    return np.exp(rng.standard_normal(m))


def lognormal_probs(m: int, seed) -> np.ndarray:
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w = lognormal_weights(m, rng)
    return w / w.sum()


class _TypeSet:
    """A block of context types; tokens are materialized on first use."""

    def __init__(self, label: str, m: int, rng: np.random.Generator, fixed_profile: bool):
        self.label = label
        self._tokens: list[str | None] = [None] * m
        self.cdf = _cdf(m, rng) if fixed_profile else None

    def token(self, j: int) -> str:
        tok = self._tokens[j]
        if tok is None:
            tok = self._tokens[j] = f"{self.label}_{j}"
        return tok

    def sample(self, n: int, rng: np.random.Generator) -> list[str]:
        cdf = self.cdf if self.cdf is not None else _cdf(len(self), rng)
        idx = np.searchsorted(cdf, rng.random(n), side="right")
        return [self.token(j) for j in idx]

    def __len__(self) -> int:
        return len(self._tokens)


def _cdf(m: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(lognormal_probs(m, rng))
    cdf[-1] = 1.0
    return cdf


def group_rng(kind: str, seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, KINDS.index(kind)])


def generate_group(kind: str, cfg: SimConfig, seed: int | None = None
                   ) -> tuple[list[PairRecord], list[str]]:
    """Pairs and target list for one overlap group.

    Second-order sampling covers every C1 type, sampled or not, and is
    repeated per target when C1 is shared, so each group yields
    ``cfg.pairs_per_group()`` pairs.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown group kind {kind!r}")
    rng = group_rng(kind, cfg.seed if seed is None else seed)
    ids = count()
    fixed = cfg.profile == "set"
    new_set = lambda: _TypeSet(f"{kind}_c{next(ids)}", cfg.n_context_types, rng, fixed)  # noqa: E731

    targets = [f"{kind}_t{i}" for i in range(cfg.n_targets)]
    shared_c1 = new_set() if kind in SHARED_FIRST else None
    shared_c2 = new_set() if kind in SHARED_SECOND else None
    private_c2: dict[str, _TypeSet] = {}

    forward: list[PairRecord] = []
    for t in targets:
        c1 = shared_c1 if shared_c1 is not None else new_set()
        forward.extend(PairRecord(t, c) for c in c1.sample(cfg.n_samples, rng))
        for j in range(len(c1)):
            c = c1.token(j)
            c2 = shared_c2
            if c2 is None:
                c2 = private_c2.get(c)
                if c2 is None:
                    c2 = private_c2[c] = new_set()
            forward.extend(PairRecord(c, u) for u in c2.sample(cfg.n_samples, rng))

    pairs = forward + [PairRecord(b, a) for a, b in forward]
    return pairs, targets


def generate_experiment1(cfg: SimConfig, out_pairs, out_manifest=None
                         ) -> tuple[Path, GroupManifest]:
    """Generate every requested group, mix and shuffle into ``out_pairs``."""
    out_pairs = Path(out_pairs)
    manifest = GroupManifest({})
    parts = []
    for i, kind in enumerate(cfg.groups):
        pairs, targets = generate_group(kind, cfg)
        part = out_pairs.with_name(f"{out_pairs.name}.part{i}")
        write_pairs(pairs, part)
        parts.append(part)
        manifest.groups[kind] = targets
        del pairs
    concat_files(parts, out_pairs)
    for part in parts:
        part.unlink()
    shuffle_pairs(out_pairs, out_pairs, cfg.seed)
    if out_manifest is not None:
        manifest.save(out_manifest)
    return out_pairs, manifest

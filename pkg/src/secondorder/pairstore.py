"""Word-context pair files and the vocabularies built from them.

A pair file holds one observation per line, ``<target>\\t<context>\\n``,
UTF-8, no header. Everything downstream (count matrices, SGNS, propagation)
consumes this format.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np


class PairFormatError(ValueError):
    """A pair file line does not hold exactly two non-empty fields."""

    def __init__(self, message: str, path=None, lineno: int | None = None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}" if where else f"line {lineno}"
        super().__init__(f"{where}: {message}" if where else message)


class PairRecord(NamedTuple):
    target: str
    context: str


def check_word(word: str) -> None:
    if not word:
        raise PairFormatError("empty word")
    if "\t" in word or "\n" in word or "\r" in word:
        raise PairFormatError(f"word contains tab or newline: {word!r}")


def parse_line(line: str, path=None, lineno: int | None = None) -> PairRecord:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != 2:
        raise PairFormatError(f"expected 2 tab-separated fields, got {len(fields)}", path, lineno)
    target, context = fields
    if not target or not context:
        raise PairFormatError("empty field", path, lineno)
    return PairRecord(target, context)


def read_pairs(path) -> Iterator[PairRecord]:
    """Stream pairs from ``path``; malformed lines raise with their line number."""
    with open(path, encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            yield parse_line(line, path, lineno)


def write_pairs(pairs: Iterable[Sequence[str]], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for target, context in pairs:
            check_word(target)
            check_word(context)
            fh.write(f"{target}\t{context}\n")
            n += 1
    return n


def roundtrip_pairs(pairs: Sequence[Sequence[str]], path) -> list[PairRecord]:
    write_pairs(pairs, path)
    return list(read_pairs(path))


class Vocabulary:
    """Word <-> contiguous id mapping with occurrence counts.

    Ids are assigned in order of first appearance.
    """

    def __init__(self, words: Iterable[str] = (), counts: Iterable[int] | None = None):
        self.id_of: dict[str, int] = {}
        self.word_of: list[str] = []
        self._counts: list[int] = []
        if counts is None:
            for w in words:
                self.add(w)
        else:
            for w, c in zip(words, counts, strict=True):
                self.add(w, int(c))

    def add(self, word: str, count: int = 1) -> int:
        i = self.id_of.get(word)
        if i is None:
            i = len(self.word_of)
            self.id_of[word] = i
            self.word_of.append(word)
            self._counts.append(0)
        self._counts[i] += count
        return i

    def __len__(self) -> int:
        return len(self.word_of)

    def __contains__(self, word) -> bool:
        return word in self.id_of

    def __iter__(self):
        return iter(self.word_of)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.word_of == other.word_of and self._counts == other._counts

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)}, total={self.total})"

    def count(self, key: str | int) -> int:
        i = self.id_of[key] if isinstance(key, str) else key
        return self._counts[i]

    @property
    def counts(self) -> np.ndarray:
        return np.asarray(self._counts, dtype=np.int64)

    @property
    def total(self) -> int:
        return sum(self._counts)

    def lookup(self, word: str) -> int:
        try:
            return self.id_of[word]
        except KeyError:
            raise KeyError(f"word not in vocabulary: {word!r}") from None

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for w, c in zip(self.word_of, self._counts):
                fh.write(f"{w}\t{c}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        words, counts = [], []
        with open(path, encoding="utf-8", newline="\n") as fh:
            for lineno, line in enumerate(fh, start=1):
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 2:
                    raise PairFormatError("expected <word>\\t<count>", path, lineno)
                words.append(fields[0])
                counts.append(int(fields[1]))
        return cls(words, counts)


def build_vocab(pairs: Iterable[Sequence[str]]) -> tuple[Vocabulary, Vocabulary]:
    """Count target and context marginals separately.

    Both vocabularies sum to the number of pairs seen.
    """
    targets, contexts = Vocabulary(), Vocabulary()
    for w, c in pairs:
        targets.add(w)
        contexts.add(c)
    return targets, contexts


def shuffle_pairs(src, dst, seed: int) -> Path:
    """Write a seeded uniform permutation of the lines of ``src`` to ``dst``.

    Lines are shuffled as raw bytes, so the output multiset of lines equals
    the input's exactly. ``src`` and ``dst`` may be the same file.
    """
    with open(src, "rb") as fh:
        data = fh.read()
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    for lineno, raw in enumerate(lines, start=1):
        parse_line(raw.decode("utf-8"), src, lineno)
    order = np.random.default_rng(seed).permutation(len(lines))
    tmp = Path(f"{dst}.tmp{os.getpid()}")
    with open(tmp, "wb") as fh:
        for i in order:
            fh.write(lines[i])
            fh.write(b"\n")
    os.replace(tmp, dst)
    return Path(dst)


def concat_files(paths: Iterable, dst) -> Path:
    with open(dst, "wb") as out:
        for p in paths:
            with open(p, "rb") as fh:
                data = fh.read()
            out.write(data)
            if data and not data.endswith(b"\n"):
                out.write(b"\n")
    return Path(dst)


def count_lines(path) -> int:
    with open(path, "rb") as fh:
        return sum(1 for _ in fh)

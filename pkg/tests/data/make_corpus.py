"""Regenerate corpus.txt and wordsim.tsv (seeded, so the output is stable).

The corpus is synthetic lemma-like text: a Zipfian vocabulary split into
topics, one sentence per line, each sentence drawn mostly from one topic.
The similarity file scores word pairs by whether they share a topic, with
noise, so that the models have something to correlate with.

    python3 tests/data/make_corpus.py
"""
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent
ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "kr"]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ou"]
CODAS = ["", "n", "r", "s", "l", "m", "k"]


def lemmas(rng, n):
    out = set()
    while len(out) < n:
        syl = rng.integers(1, 4)
        out.add("".join(rng.choice(ONSETS) + rng.choice(VOWELS) + rng.choice(CODAS)
                        for _ in range(syl)))
    return sorted(out)


def main(tokens=100_000, n_words=2000, n_topics=20, seed=2017):
    rng = np.random.default_rng(seed)
    words = list(rng.permutation(lemmas(rng, n_words)))
    topic = rng.integers(0, n_topics, n_words)
    zipf = 1.0 / np.arange(1, n_words + 1)
    by_topic = [np.flatnonzero(topic == t) for t in range(n_topics)]
    lines, count = [], 0
    while count < tokens:
        t = rng.integers(n_topics)
        length = int(rng.integers(6, 18))
        local = zipf[by_topic[t]] / zipf[by_topic[t]].sum()
        sent = []
        for _ in range(length):
            if rng.random() < 0.8:
                sent.append(words[rng.choice(by_topic[t], p=local)])
            else:
                sent.append(words[rng.choice(n_words, p=zipf / zipf.sum())])
        lines.append(" ".join(sent))
        count += length
    (HERE / "corpus.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # pairs among the 300 most frequent words, half within a topic
    pool = np.arange(300)
    seen, rows = set(), []
    while len(rows) < 80:
        a = int(rng.choice(pool))
        same = len(rows) % 2 == 0
        cands = [b for b in pool if b != a and (topic[b] == topic[a]) == same]
        b = int(rng.choice(cands))
        key = frozenset((a, b))
        if key in seen:
            continue
        seen.add(key)
        score = (7.0 if same else 2.0) + rng.normal(0, 1.5)
        rows.append(f"{words[a]}\t{words[b]}\t{min(10.0, max(0.0, score)):.2f}")
    (HERE / "wordsim.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"{count} tokens, {len(lines)} sentences, {len(rows)} pairs")


if __name__ == "__main__":
    main()

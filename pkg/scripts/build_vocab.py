#!/usr/bin/env python3
"""Train the bundled budget-counting BPE vocabulary from the seed corpus.

Deterministic: ties in pair frequency break lexicographically, so rerunning
this script reproduces the committed assets byte for byte.

Usage: python3 scripts/build_vocab.py [--max-merges N]
"""

import argparse
import collections
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from burnbench.bpe import END_OF_WORD, _PRETOKEN_RE  # noqa: E402

ASSETS = Path(__file__).resolve().parents[1] / "src" / "burnbench" / "assets" / "bpe"


def word_counts(corpus: str) -> collections.Counter:
    return collections.Counter(_PRETOKEN_RE.findall(corpus.lower()))


def train(corpus: str, max_merges: int) -> list[tuple[str, str]]:
    counts = word_counts(corpus)
    words = {
        word: tuple(word[:-1]) + (word[-1] + END_OF_WORD,) for word in counts
    }
    merges: list[tuple[str, str]] = []
    for _ in range(max_merges):
        pair_counts: collections.Counter = collections.Counter()
        for word, symbols in words.items():
            for pair in zip(symbols[:-1], symbols[1:]):
                pair_counts[pair] += counts[word]
        if not pair_counts:
            break
        best = min(pair_counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        merges.append(best)
        first, second = best
        for word, symbols in words.items():
            if first not in symbols:
                continue
            out = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and symbols[i] == first and symbols[i + 1] == second:
                    out.append(first + second)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            words[word] = tuple(out)
    return merges


def build_token_table(merges: list[tuple[str, str]]) -> dict[str, int]:
    chars = sorted(set(chr(c) for c in range(32, 127)))
    table: dict[str, int] = {}
    for ch in chars:
        table[ch] = len(table)
    for ch in chars:
        table[ch + END_OF_WORD] = len(table)
    for a, b in merges:
        merged = a + b
        if merged not in table:
            table[merged] = len(table)
    return table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-merges", type=int, default=6000)
    args = ap.parse_args()

    corpus = (ASSETS / "seed_corpus.txt").read_text(encoding="utf-8")
    merges = train(corpus, args.max_merges)
    table = build_token_table(merges)

    lines = ["#version: burnbench-bpe-1"]
    lines += [f"{a} {b}" for a, b in merges]
    (ASSETS / "merges.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (ASSETS / "vocab.json").write_text(
        json.dumps(table, indent=0, sort_keys=False) + "\n", encoding="utf-8"
    )
    print(f"trained {len(merges)} merges, {len(table)} symbols")


if __name__ == "__main__":
    main()

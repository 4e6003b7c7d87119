"""Byte-pair-encoding tokenizer for prompt token-budget enforcement.

Compatible with the merges-file format used by CLIP-style text encoders:
one symbol pair per line, rank = line order, with an end-of-word marker
appended to each word's final character. The bundled vocabulary (trained
on a committed seed corpus by scripts/build_vocab.py) is always available;
a real CLIP merges file can be dropped into the assets directory and is
picked up by the same loader.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .core import BurnbenchError

END_OF_WORD = "</w>"

# words are runs of word characters; punctuation runs become their own symbols
_PRETOKEN_RE = re.compile(r"\w+|[^\w\s]+")
_WORD_RE = re.compile(r"\w")


class VocabularyFormatError(BurnbenchError):
    """Merges or vocab file does not parse."""


@dataclass(frozen=True)
class BpeVocabulary:
    """Ordered merge rules plus symbol ids.

    ``ranks`` maps a symbol pair to its merge priority (dense from 0).
    Symbols missing from ``token_table`` fall back to byte-level ids at
    ``byte_fallback_base`` + byte value; ``byte_fallback_base + 256`` is a
    standalone end-of-word id used only by that fallback.
    """

    merges: tuple[tuple[str, str], ...]
    ranks: dict[tuple[str, str], int]
    token_table: dict[str, int]
    byte_fallback_base: int
    end_of_word_marker: str = END_OF_WORD

    @property
    def eow_fallback_id(self) -> int:
        return self.byte_fallback_base + 256


def _parse_merges(path: Path) -> tuple[tuple[str, str], ...]:
    merges = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 2:
            raise VocabularyFormatError(
                f"{path}:{lineno}: expected 2 fields, got {len(fields)}: {line!r}"
            )
        merges.append((fields[0], fields[1]))
    return tuple(merges)


def _derive_token_table(merges) -> dict[str, int]:
    # base symbols: every character mentioned in any merge, with and
    # without the end-of-word marker, plus printable ASCII for coverage
    chars = set()
    for a, b in merges:
        for sym in (a, b):
            core = sym[: -len(END_OF_WORD)] if sym.endswith(END_OF_WORD) else sym
            chars.update(core)
    chars.update(chr(c) for c in range(32, 127))
    table: dict[str, int] = {}
    for ch in sorted(chars):
        table[ch] = len(table)
    for ch in sorted(chars):
        table[ch + END_OF_WORD] = len(table)
    for a, b in merges:
        merged = a + b
        if merged not in table:
            table[merged] = len(table)
    return table


def load_vocabulary(merges_file: str | Path, vocab_file: str | Path | None = None) -> BpeVocabulary:
    """Load merge rules (rank = line order) and the symbol-id table.

    Without an explicit vocab file the id table is derived from the merges
    deterministically, which is sufficient for budget counting.
    """
    merges_path = Path(merges_file)
    merges = _parse_merges(merges_path)
    ranks = {pair: rank for rank, pair in enumerate(merges)}
    if len(ranks) != len(merges):
        raise VocabularyFormatError(f"{merges_path}: duplicate merge rules")

    if vocab_file is None:
        candidate = merges_path.with_name(merges_path.stem.replace("merges", "vocab") + ".json")
        vocab_file = candidate if candidate.exists() else None
    if vocab_file is not None:
        import json

        raw = json.loads(Path(vocab_file).read_text(encoding="utf-8"))
        token_table = {str(sym): int(idx) for sym, idx in raw.items()}
    else:
        token_table = _derive_token_table(merges)

    for a, b in merges:
        if a + b not in token_table:
            raise VocabularyFormatError(
                f"merge output {a + b!r} missing from the token table"
            )
    base = max(token_table.values()) + 1 if token_table else 0
    return BpeVocabulary(
        merges=merges, ranks=ranks, token_table=token_table, byte_fallback_base=base
    )


def _get_pairs(symbols: tuple[str, ...]) -> set[tuple[str, str]]:
    return set(zip(symbols[:-1], symbols[1:]))


def _merge_word(word: str, vocab: BpeVocabulary) -> tuple[str, ...]:
    symbols = tuple(word[:-1]) + (word[-1] + END_OF_WORD,)
    if len(symbols) == 1:
        return symbols
    pairs = _get_pairs(symbols)
    while True:
        best = min(pairs, key=lambda p: vocab.ranks.get(p, float("inf")))
        if best not in vocab.ranks:
            break
        first, second = best
        merged: list[str] = []
        i = 0
        while i < len(symbols):
            if i < len(symbols) - 1 and symbols[i] == first and symbols[i + 1] == second:
                merged.append(first + second)
                i += 2
            else:
                merged.append(symbols[i])
                i += 1
        symbols = tuple(merged)
        if len(symbols) == 1:
            break
        pairs = _get_pairs(symbols)
    return symbols


def _symbol_ids(symbol: str, vocab: BpeVocabulary) -> list[int]:
    idx = vocab.token_table.get(symbol)
    if idx is not None:
        return [idx]
    core = symbol
    trailing_eow = False
    if symbol.endswith(END_OF_WORD):
        core = symbol[: -len(END_OF_WORD)]
        trailing_eow = True
    ids = [vocab.byte_fallback_base + b for b in core.encode("utf-8")]
    if trailing_eow:
        ids.append(vocab.eow_fallback_id)
    return ids


def encode(text: str, vocab: BpeVocabulary) -> list[int]:
    """Tokenize: lowercase, whitespace split with punctuation isolation,
    then greedy lowest-rank pair merging per word."""
    ids: list[int] = []
    for word in _PRETOKEN_RE.findall(text.lower()):
        for symbol in _merge_word(word, vocab):
            ids.extend(_symbol_ids(symbol, vocab))
    return ids


def count_tokens(text: str, vocab: BpeVocabulary) -> int:
    """Content-token count of ``text`` (no begin/end sentinels)."""
    return len(encode(text, vocab))


def decode(ids: list[int], vocab: BpeVocabulary) -> str:
    """Best-effort inverse of encode.

    Word tokens are joined by single spaces; punctuation runs attach to the
    preceding word, so ASCII word text round-trips to its lowercased,
    whitespace-normalized form.
    """
    inverse = {idx: sym for sym, idx in vocab.token_table.items()}
    parts: list[str] = []
    byte_buf: list[int] = []

    def flush_bytes():
        if byte_buf:
            parts.append(bytes(byte_buf).decode("utf-8", errors="replace"))
            byte_buf.clear()

    for idx in ids:
        sym = inverse.get(idx)
        if sym is not None:
            flush_bytes()
            parts.append(sym)
        elif idx == vocab.eow_fallback_id:
            flush_bytes()
            parts.append(END_OF_WORD)
        elif vocab.byte_fallback_base <= idx < vocab.byte_fallback_base + 256:
            byte_buf.append(idx - vocab.byte_fallback_base)
        else:
            raise ValueError(f"token id {idx} not in vocabulary")
    flush_bytes()

    words = "".join(parts).split(END_OF_WORD)
    if words and words[-1] == "":
        words.pop()
    out: list[str] = []
    for word in words:
        if out and not _WORD_RE.search(word):
            out[-1] += word
        else:
            out.append(word)
    return " ".join(out)


# ---------------------------------------------------------------------------
# Asset resolution

_ENV_ASSETS = "BURNBENCH_ASSETS"


def assets_dir() -> Path:
    """Asset directory: $BURNBENCH_ASSETS if set, else the packaged assets."""
    env = os.environ.get(_ENV_ASSETS)
    if env:
        return Path(env)
    return Path(__file__).parent / "assets"


@lru_cache(maxsize=None)
def _cached_vocabulary(merges_path: str) -> BpeVocabulary:
    return load_vocabulary(merges_path)


def default_vocabulary() -> BpeVocabulary:
    """The bundled budget-counting vocabulary (always present)."""
    return _cached_vocabulary(str(assets_dir() / "bpe" / "merges.txt"))


def clip_vocabulary() -> BpeVocabulary | None:
    """The real CLIP vocabulary, if scripts/fetch_clip_vocab.py installed it."""
    path = assets_dir() / "bpe" / "clip_merges.txt"
    if not path.exists():
        return None
    return _cached_vocabulary(str(path))

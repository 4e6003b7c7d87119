#!/usr/bin/env python3
"""Fetch the real CLIP BPE merges into the assets directory.

The bundled budget-counting vocabulary ships with the package; this script
additionally installs the CLIP text encoder's merges (via the transformers
hub cache) as assets/bpe/clip_merges.txt so byte-accurate CLIP token counts
become available. Tests that need the real vocabulary are skipped when this
asset is absent.

Usage: python3 scripts/fetch_clip_vocab.py [--model openai/clip-vit-base-patch32]
"""

import argparse
import shutil
import sys
from pathlib import Path

ASSETS = Path(__file__).resolve().parents[1] / "src" / "burnbench" / "assets" / "bpe"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="openai/clip-vit-base-patch32")
    args = ap.parse_args()
    try:
        from transformers.utils import cached_file

        merges = cached_file(args.model, "merges.txt")
        vocab = cached_file(args.model, "vocab.json", _raise_exceptions_for_missing_entries=False)
    except Exception as exc:
        print(f"could not fetch CLIP vocabulary ({exc}); "
              f"the bundled vocabulary remains in use", file=sys.stderr)
        return 1
    shutil.copy(merges, ASSETS / "clip_merges.txt")
    if vocab:
        shutil.copy(vocab, ASSETS / "clip_vocab.json")
    print(f"installed CLIP merges -> {ASSETS / 'clip_merges.txt'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Generate a synthetic demo corpus (and canned VLM responses).

Usage: python3 scripts/make_demo_corpus.py --root demo/corpus --samples 60
"""

import argparse

from burnbench.demo import build_demo_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--root", required=True, help="corpus directory to create")
    ap.add_argument("--samples", type=int, default=60)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--no-after", action="store_true",
                    help="omit after.png (unlabeled corpus)")
    args = ap.parse_args()
    ids = build_demo_corpus(args.root, n_samples=args.samples, seed=args.seed,
                            with_after=not args.no_after)
    print(f"wrote {len(ids)} samples under {args.root}")


if __name__ == "__main__":
    main()

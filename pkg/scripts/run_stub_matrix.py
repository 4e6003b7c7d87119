#!/usr/bin/env python3
"""End-to-end experiment: synthetic corpus -> split -> palette -> full
stub-backend matrix -> reports.

Usage: python3 scripts/run_stub_matrix.py --workdir demo [--samples 60]
"""

import argparse
import sys
from pathlib import Path

from burnbench.cli import main as cli_main
from burnbench.demo import build_demo_corpus, write_demo_vlm_responses
from burnbench.ingest import read_splits


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", required=True)
    ap.add_argument("--samples", type=int, default=60)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--backend", default="stub")
    ap.add_argument("--run-id", default="stub_matrix")
    args = ap.parse_args()

    workdir = Path(args.workdir)
    corpus = workdir / "corpus"
    out = workdir / "out"
    if not corpus.exists():
        build_demo_corpus(corpus, n_samples=args.samples, seed=7)
        print(f"corpus: {args.samples} synthetic samples under {corpus}")

    for argv in (
        ["split", "--corpus", str(corpus), "--out", str(out), "--seed", str(args.seed)],
        ["palette", "--corpus", str(corpus), "--out", str(out)],
    ):
        code = cli_main(argv)
        if code != 0:
            return code

    splits = read_splits(out / "splits.json")
    write_demo_vlm_responses(out / "vlm", [e["id"] for e in splits["test"]])

    code = cli_main([
        "run", "--corpus", str(corpus), "--out", str(out),
        "--run-id", args.run_id, "--seed", str(args.seed),
        "--backend", args.backend,
    ])
    run_dir = out / "runs" / args.run_id
    print(f"reports: {run_dir}/summary.csv, boxplots.svg, heatmap_*.svg")
    return code


if __name__ == "__main__":
    sys.exit(main())

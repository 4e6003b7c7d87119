"""Corpus loading, burn-ratio filtering, stratified test/palette splits.

Corpus layout: ``<root>/<sample_id>/before.png|mask.png|after.png`` with
after.png optional. Selection is seeded and deterministic; the test set
keeps its provenance (original directory ids) alongside the reassigned
S00..S09 ids so palette disjointness stays checkable after reload.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    BurnbenchError,
    DimensionMismatchError,
    SampleRecord,
    burn_ratio,
    read_mask,
    read_tile,
)

DEFAULT_BINS: tuple[tuple[float, float], ...] = (
    (0.01, 0.20),
    (0.20, 0.40),
    (0.40, 0.60),
    (0.60, 0.80),
    (0.80, 0.95),
)

RATIO_LO = 0.01
RATIO_HI = 0.95
DEFAULT_SEED = 42


class CorpusError(BurnbenchError):
    pass


class StratificationError(BurnbenchError):
    pass


@dataclass(frozen=True)
class StratificationPlan:
    """Five burn-ratio bins, a per-bin draw count, and the selection seed.

    Bins are fixed: four half-open intervals plus a closed top bin ending
    at the global 95% cap.
    """

    bins: tuple[tuple[float, float], ...] = DEFAULT_BINS
    per_bin_count: int = 2
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(tuple(b) for b in self.bins))
        if self.bins != DEFAULT_BINS:
            raise ValueError(f"bins must be exactly {DEFAULT_BINS}")
        if self.per_bin_count < 0:
            raise ValueError("per_bin_count must be non-negative")

    @property
    def test_size(self) -> int:
        return self.per_bin_count * len(self.bins)

    def bin_index(self, ratio: float) -> int | None:
        """Index of the bin containing ``ratio``, or None if out of range."""
        for i, (lo, hi) in enumerate(self.bins):
            last = i == len(self.bins) - 1
            if lo <= ratio < hi or (last and lo <= ratio <= hi):
                return i
        return None


@dataclass(frozen=True)
class CorpusLoadResult:
    """Samples that loaded cleanly plus a per-sample error report."""

    samples: tuple[SampleRecord, ...]
    errors: tuple[tuple[str, str], ...]  # (sample_id, message)


def load_corpus(root: str | Path) -> CorpusLoadResult:
    """Load every sample subdirectory under ``root``, ordered by sample id.

    Samples with missing mandatory files or mismatched dimensions are
    excluded and reported in the error list instead of aborting the load.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus root {root} is not a directory")
    samples: list[SampleRecord] = []
    errors: list[tuple[str, str]] = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        sample_id = sub.name
        before_path = sub / "before.png"
        mask_path = sub / "mask.png"
        after_path = sub / "after.png"
        missing = [p.name for p in (before_path, mask_path) if not p.exists()]
        if missing:
            errors.append((sample_id, f"missing mandatory file(s): {', '.join(missing)}"))
            continue
        try:
            before = read_tile(before_path)
            mask = read_mask(mask_path)
            after = read_tile(after_path) if after_path.exists() else None
            samples.append(
                SampleRecord(
                    sample_id=sample_id,
                    before=before,
                    mask=mask,
                    after=after,
                    burn_ratio=burn_ratio(mask),
                )
            )
        except (DimensionMismatchError, BurnbenchError, OSError) as exc:
            errors.append((sample_id, str(exc)))
    return CorpusLoadResult(samples=tuple(samples), errors=tuple(errors))


def filter_by_ratio(
    samples, lo: float = RATIO_LO, hi: float = RATIO_HI
) -> list[SampleRecord]:
    """Keep samples with lo <= burn_ratio <= hi, preserving order."""
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"need 0 <= lo < hi <= 1, got lo={lo}, hi={hi}")
    return [s for s in samples if lo <= s.burn_ratio <= hi]


@dataclass(frozen=True)
class StratifiedSplit:
    """Stratified test selection with provenance.

    ``samples`` carry the reassigned S00.. ids in ascending burn-ratio
    order; ``source_ids`` and ``bin_indices`` are parallel to them.
    """

    samples: tuple[SampleRecord, ...]
    source_ids: tuple[str, ...]
    bin_indices: tuple[int, ...]
    seed: int

    @property
    def test_ids(self) -> tuple[str, ...]:
        return tuple(s.sample_id for s in self.samples)


def stratify(samples, plan: StratificationPlan) -> StratifiedSplit:
    """Draw per_bin_count samples per burn-ratio bin, seeded and uniform.

    Output ids are reassigned S00.. in ascending burn-ratio order. A bin
    with fewer candidates than requested is an error naming the bin.
    """
    bins: list[list[SampleRecord]] = [[] for _ in plan.bins]
    for s in samples:
        idx = plan.bin_index(s.burn_ratio)
        if idx is not None:
            bins[idx].append(s)

    rng = np.random.default_rng(plan.seed)
    chosen: list[SampleRecord] = []
    chosen_bins: list[int] = []
    for idx, ((lo, hi), candidates) in enumerate(zip(plan.bins, bins)):
        if len(candidates) < plan.per_bin_count:
            raise StratificationError(
                f"bin [{lo:g}, {hi:g}{']' if idx == len(plan.bins) - 1 else ')'} has "
                f"{len(candidates)} candidate(s), need {plan.per_bin_count}"
            )
        if plan.per_bin_count == 0:
            continue
        candidates = sorted(candidates, key=lambda s: s.sample_id)
        picks = rng.choice(len(candidates), size=plan.per_bin_count, replace=False)
        for j in sorted(int(p) for p in picks):
            chosen.append(candidates[j])
            chosen_bins.append(idx)

    order = sorted(
        range(len(chosen)), key=lambda i: (chosen[i].burn_ratio, chosen[i].sample_id)
    )
    selected = [chosen[i] for i in order]
    return StratifiedSplit(
        samples=tuple(
            s.with_sample_id(f"S{rank:02d}") for rank, s in enumerate(selected)
        ),
        source_ids=tuple(s.sample_id for s in selected),
        bin_indices=tuple(chosen_bins[i] for i in order),
        seed=plan.seed,
    )


def split_palette(
    samples, test, palette_count: int, seed: int = DEFAULT_SEED
) -> list[SampleRecord]:
    """Seeded draw of palette samples disjoint from the test set.

    ``test`` is a StratifiedSplit or an iterable of original sample ids.
    Candidates are non-test samples that have an after image; too few of
    them is an error.
    """
    if isinstance(test, StratifiedSplit):
        excluded = set(test.source_ids)
    else:
        excluded = set(test)
    pool = [
        s for s in samples if s.sample_id not in excluded and s.after is not None
    ]
    if len(pool) < palette_count:
        raise StratificationError(
            f"need {palette_count} palette candidates disjoint from the test set, "
            f"only {len(pool)} available"
        )
    if palette_count == 0:
        return []
    pool = sorted(pool, key=lambda s: s.sample_id)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=palette_count, replace=False)
    return [pool[j] for j in sorted(int(p) for p in picks)]


def write_splits(
    path: str | Path,
    split: StratifiedSplit,
    palette_samples,
    plan: StratificationPlan,
) -> None:
    doc = {
        "seed": plan.seed,
        "per_bin_count": plan.per_bin_count,
        "bins": [list(b) for b in plan.bins],
        "test_id_order": "ascending_burn_ratio",
        "test": [
            {
                "id": rec.sample_id,
                "source_id": src,
                "burn_ratio": rec.burn_ratio,
                "bin": bin_idx,
            }
            for rec, src, bin_idx in zip(
                split.samples, split.source_ids, split.bin_indices
            )
        ],
        "palette_ids": [s.sample_id for s in palette_samples],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_splits(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    required = {"seed", "test", "palette_ids"}
    missing = required - doc.keys()
    if missing:
        raise CorpusError(f"splits file {path} is missing keys: {sorted(missing)}")
    return doc

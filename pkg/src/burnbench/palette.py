"""Dataset-level burned/intact RGB statistics from real post-fire imagery."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import (
    BurnMask,
    BurnbenchError,
    PaletteStats,
    RegionStats,
    SampleRecord,
    Tile,
    require_same_shape,
)

AGGREGATIONS = ("pooled", "per_image_mean")


class PaletteError(BurnbenchError):
    pass


def region_selector(mask: BurnMask, region: str) -> np.ndarray:
    if region == "burned":
        return mask.data.astype(bool)
    if region == "intact":
        return ~mask.data.astype(bool)
    raise ValueError(f"region must be 'burned' or 'intact', got {region!r}")


def region_stats(tile: Tile, mask: BurnMask, region: str) -> RegionStats:
    """Per-channel mean and population std over one mask region.

    An empty region yields the undefined RegionStats (pixel_count 0),
    never silent zeros.
    """
    require_same_shape(tile, mask)
    selector = region_selector(mask, region)
    pixels = tile.data[selector]
    if pixels.shape[0] == 0:
        return RegionStats.undefined()
    return RegionStats(
        mean=pixels.mean(axis=0),
        std=pixels.std(axis=0),
        pixel_count=pixels.shape[0],
    )


def _pooled_region(samples: list[SampleRecord], region: str) -> RegionStats:
    chunks = []
    for s in samples:
        selector = region_selector(s.mask, region)
        pixels = s.after.data[selector]
        if pixels.shape[0] > 0:
            chunks.append(pixels)
    if not chunks:
        return RegionStats.undefined()
    pooled = np.concatenate(chunks, axis=0)
    return RegionStats(
        mean=pooled.mean(axis=0),
        std=pooled.std(axis=0),
        pixel_count=pooled.shape[0],
    )


def _per_image_mean_region(samples: list[SampleRecord], region: str) -> RegionStats:
    # each image's region mean is one observation; std is across images
    means = []
    for s in samples:
        stats = region_stats(s.after, s.mask, region)
        if stats.defined:
            means.append(stats.mean)
    if not means:
        return RegionStats.undefined()
    stacked = np.stack(means, axis=0)
    return RegionStats(
        mean=stacked.mean(axis=0),
        std=stacked.std(axis=0),
        pixel_count=stacked.shape[0],
    )


def estimate_palette(
    palette_samples: list[SampleRecord],
    aggregation: str = "pooled",
    test_ids=(),
) -> PaletteStats:
    """Estimate burned/intact RGB statistics from the palette split.

    ``pooled`` concatenates all region pixels across samples into one
    population; ``per_image_mean`` treats each image's region mean as one
    observation. Sources must be disjoint from the test-set ids.
    """
    if not palette_samples:
        raise PaletteError("palette estimation needs at least one sample")
    missing_after = [s.sample_id for s in palette_samples if s.after is None]
    if missing_after:
        raise PaletteError(f"palette samples missing after image: {missing_after}")
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")

    if aggregation == "pooled":
        burned = _pooled_region(palette_samples, "burned")
        intact = _pooled_region(palette_samples, "intact")
    else:
        burned = _per_image_mean_region(palette_samples, "burned")
        intact = _per_image_mean_region(palette_samples, "intact")

    if not burned.defined:
        raise PaletteError("no burned pixels in any palette sample")
    if not intact.defined:
        raise PaletteError("no intact pixels in any palette sample")

    stats = PaletteStats(
        burned=burned,
        intact=intact,
        source_sample_ids=tuple(s.sample_id for s in palette_samples),
    )
    stats.check_disjoint(test_ids)
    return stats


def write_palette(
    palette: PaletteStats, path: str | Path, aggregation: str = "pooled"
) -> None:
    doc = {
        "burned": palette.burned.to_dict(),
        "intact": palette.intact.to_dict(),
        "source_sample_ids": list(palette.source_sample_ids),
        "aggregation": aggregation,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_palette(path: str | Path) -> tuple[PaletteStats, str]:
    doc = json.loads(Path(path).read_text())
    stats = PaletteStats(
        burned=RegionStats.from_dict(doc["burned"]),
        intact=RegionStats.from_dict(doc["intact"]),
        source_sample_ids=tuple(doc["source_sample_ids"]),
    )
    return stats, doc.get("aggregation", "pooled")

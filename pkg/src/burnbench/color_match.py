"""Region-wise color matching toward palette statistics.

The post-processing step applied in the color-matched experiment settings:
an affine mean/std transfer per region per channel. With a degenerate
source std (constant region channel) the whole region maps to the target
mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BurnMask, PaletteStats, RegionStats, Tile, require_same_shape
from .palette import region_selector, region_stats

REGIONS = ("burned", "intact")


@dataclass(frozen=True)
class ColorMatchPolicy:
    """Which regions to match and whether to clamp back into [0, 255]."""

    regions: tuple[str, ...] = REGIONS
    clip: bool = True

    def __post_init__(self):
        regions = tuple(self.regions)
        if not regions:
            raise ValueError("color-match policy needs at least one region")
        unknown = set(regions) - set(REGIONS)
        if unknown:
            raise ValueError(f"unknown regions: {sorted(unknown)}")
        object.__setattr__(self, "regions", regions)


def match_region(
    tile: Tile,
    mask: BurnMask,
    region: str,
    target: RegionStats,
    clip: bool = True,
) -> Tile:
    """Affine-transfer one region's per-channel moments onto the target's.

    v' = (v - mu_src) / sigma_src * sigma_tgt + mu_tgt where sigma_src > 0,
    else v' = mu_tgt. Pixels outside the region are untouched.
    """
    require_same_shape(tile, mask)
    if not target.defined:
        raise ValueError(f"target stats for region {region!r} are undefined")
    selector = region_selector(mask, region)
    if not selector.any():
        raise ValueError(f"region {region!r} is empty in this mask")

    source = region_stats(tile, mask, region)
    pixels = tile.data[selector]
    out_pixels = np.empty_like(pixels)
    for c in range(3):
        if source.std[c] > 0:
            out_pixels[:, c] = (
                (pixels[:, c] - source.mean[c]) / source.std[c]
            ) * target.std[c] + target.mean[c]
        else:
            out_pixels[:, c] = target.mean[c]

    data = np.array(tile.data)
    data[selector] = out_pixels
    if clip:
        np.clip(data, 0.0, 255.0, out=data)
    return Tile(data)


def apply_color_matching(
    tile: Tile,
    mask: BurnMask,
    palette: PaletteStats,
    policy: ColorMatchPolicy | None = None,
) -> Tile:
    """Match each policy region independently against its palette stats."""
    policy = policy or ColorMatchPolicy()
    targets = {"burned": palette.burned, "intact": palette.intact}
    out = tile
    for region in REGIONS:
        if region in policy.regions:
            out = match_region(out, mask, region, targets[region], clip=policy.clip)
    return out

"""Raster resampling used by the experiment runner.

Masks go up to the 512x512 conditioning resolution by nearest neighbor
(preserves binarity); generated tiles come back down by exact area
averaging (box filter), which reproduces constant blocks exactly at
integer ratios.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import BurnMask, Tile


def _nearest_indices(dst: int, src: int) -> np.ndarray:
    return (np.arange(dst) * src) // dst


def upsample_mask_nearest(mask: BurnMask, width: int, height: int) -> BurnMask:
    rows = _nearest_indices(height, mask.height)
    cols = _nearest_indices(width, mask.width)
    return BurnMask(mask.data[np.ix_(rows, cols)])


def upsample_tile_nearest(tile: Tile, width: int, height: int) -> Tile:
    rows = _nearest_indices(height, tile.height)
    cols = _nearest_indices(width, tile.width)
    return Tile(tile.data[np.ix_(rows, cols)])


@lru_cache(maxsize=8)
def _overlap_weights(dst: int, src: int) -> np.ndarray:
    """Row-stochastic (dst, src) matrix of fractional pixel coverage."""
    scale = src / dst
    weights = np.zeros((dst, src), dtype=np.float64)
    for i in range(dst):
        start = i * scale
        stop = (i + 1) * scale
        j0 = int(np.floor(start))
        j1 = min(int(np.ceil(stop)), src)
        for j in range(j0, j1):
            weights[i, j] = min(stop, j + 1) - max(start, j)
    weights /= weights.sum(axis=1, keepdims=True)
    weights.setflags(write=False)
    return weights


def downsample_tile_area(tile: Tile, width: int, height: int) -> Tile:
    """Box-filter downsample; each output pixel is the coverage-weighted
    mean of the source pixels under it."""
    if width > tile.width or height > tile.height:
        raise ValueError(
            f"area downsample target {width}x{height} exceeds source "
            f"{tile.width}x{tile.height}"
        )
    wh = _overlap_weights(height, tile.height)
    ww = _overlap_weights(width, tile.width)
    src_h, src_w = tile.height, tile.width
    # contiguous reshapes keep both contractions on the BLAS fast path
    rows = (wh @ tile.data.reshape(src_h, src_w * 3)).reshape(height, src_w, 3)
    cols = ww @ np.ascontiguousarray(rows.transpose(1, 0, 2)).reshape(src_w, height * 3)
    out = np.ascontiguousarray(cols.reshape(width, height, 3).transpose(1, 0, 2))
    # averaging of in-range values stays in range up to rounding noise
    np.clip(out, 0.0, 255.0, out=out)
    return Tile(out)

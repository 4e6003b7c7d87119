"""Shared test helpers: tiny tiles, block masks, corpus writers."""

import numpy as np

from burnbench.core import (
    BurnMask,
    SampleRecord,
    Tile,
    burn_ratio,
    write_mask,
    write_tile,
)


def tile_from_gray(values) -> Tile:
    """Tile whose three channels all equal the given 2D gray values."""
    arr = np.asarray(values, dtype=np.float64)
    return Tile(np.repeat(arr[:, :, None], 3, axis=2))


def make_sample(sample_id, before, mask, after=None) -> SampleRecord:
    return SampleRecord(
        sample_id=sample_id,
        before=before,
        mask=mask,
        after=after,
        burn_ratio=burn_ratio(mask),
    )


def block_mask_small(size: int, burned_blocks: int, block: int = 7) -> BurnMask:
    """Row-major 7x7-block mask at a small, conditioning-safe tile size."""
    grid = size // block
    flat = np.zeros(grid * grid, dtype=np.uint8)
    flat[:burned_blocks] = 1
    return BurnMask(np.kron(flat.reshape(grid, grid), np.ones((block, block), np.uint8)))


def write_sample_dir(root, sample_id, before, mask, after=None):
    sub = root / sample_id
    sub.mkdir(parents=True)
    write_tile(before, sub / "before.png")
    write_mask(mask, sub / "mask.png")
    if after is not None:
        write_tile(after, sub / "after.png")
    return sub


def tiny_corpus(root, n=6, size=28, seed=0):
    """n small samples with 7-aligned block masks and charcoal after tiles."""
    rng = np.random.default_rng(seed)
    grid = (size // 7) ** 2
    ids = []
    for i in range(n):
        sample_id = f"t{i:02d}"
        burned_blocks = 1 + (i * (grid - 2)) // max(n - 1, 1)
        mask = block_mask_small(size, burned_blocks)
        before = Tile(
            np.clip(rng.integers(60, 160, size=(size, size, 3)).astype(float), 0, 255)
        )
        after_data = np.array(before.data)
        sel = mask.data.astype(bool)
        after_data[sel] = rng.integers(30, 55, size=(size, size, 3)).astype(float)[sel]
        after = Tile(after_data)
        write_sample_dir(root, sample_id, before, mask, after)
        ids.append(sample_id)
    return ids

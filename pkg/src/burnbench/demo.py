"""Synthetic corpus generation for demos and end-to-end testing.

Tiles are 224x224 with burn masks built from 7x7 pixel blocks, so mask
boundaries sit on multiples of 7 and survive the 224 -> 512 -> 224
conditioning round trip exactly (512/224 = 16/7). Everything is seeded
and integer-valued, so PNG round trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import BurnMask, Tile, write_mask, write_tile

TILE_SIZE = 224
BLOCK = 7
GRID = TILE_SIZE // BLOCK  # 32x32 blocks, 1024 total

BEFORE_BASE = np.array([70.0, 110.0, 60.0])
AFTER_BURN_BASE = np.array([45.0, 38.0, 32.0])


def block_mask(filled_blocks: int) -> BurnMask:
    """Mask with ``filled_blocks`` 7x7 blocks filled in row-major order."""
    if not 0 <= filled_blocks <= GRID * GRID:
        raise ValueError(f"filled_blocks must be in [0, {GRID * GRID}]")
    grid = np.zeros(GRID * GRID, dtype=np.uint8)
    grid[:filled_blocks] = 1
    grid = grid.reshape(GRID, GRID)
    return BurnMask(np.kron(grid, np.ones((BLOCK, BLOCK), dtype=np.uint8)))


def _textured(base: np.ndarray, rng: np.random.Generator, amplitude: int) -> np.ndarray:
    noise = rng.integers(-amplitude, amplitude + 1, size=(TILE_SIZE, TILE_SIZE, 3))
    return np.clip(np.rint(base) + noise, 0, 255).astype(np.float64)


def make_sample(ratio: float, rng: np.random.Generator) -> tuple[Tile, BurnMask, Tile]:
    """One (before, mask, after) triple at approximately the given burn ratio."""
    filled = int(np.clip(round(ratio * GRID * GRID), 1, GRID * GRID - 1))
    mask = block_mask(filled)
    before = _textured(BEFORE_BASE, rng, amplitude=18)
    after = before.copy()
    burned = mask.data.astype(bool)
    charcoal = _textured(AFTER_BURN_BASE, rng, amplitude=8)
    after[burned] = charcoal[burned]
    return Tile(before), mask, Tile(after)


def build_demo_corpus(
    root: str | Path,
    n_samples: int = 60,
    seed: int = 7,
    with_after: bool = True,
) -> list[str]:
    """Write ``n_samples`` sample directories with ratios spread over the
    five burn-ratio bins. Returns the sample ids."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    ratios = np.linspace(0.02, 0.94, n_samples)
    rng.shuffle(ratios)
    ids = []
    for i, ratio in enumerate(ratios):
        sample_id = f"fire{i:03d}"
        sub = root / sample_id
        sub.mkdir(exist_ok=True)
        before, mask, after = make_sample(float(ratio), rng)
        write_tile(before, sub / "before.png")
        write_mask(mask, sub / "mask.png")
        if with_after:
            write_tile(after, sub / "after.png")
        ids.append(sample_id)
    return ids


DEMO_VLM_BODY = (
    "dark charcoal burn scar with gray ash deposits, speckled texture, "
    "strong contrast against surrounding intact green forest"
)

DEMO_VLM_NEG = (
    "ground level view, eye level, forest interior, tree trunks, "
    "perspective distortion, clouds, smoke, flames, cartoon, blurry"
)


def write_demo_vlm_responses(vlm_dir: str | Path, sample_ids) -> list[Path]:
    """Valid canned VLM responses for stub runs of the VLM experiments."""
    vlm_dir = Path(vlm_dir)
    vlm_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for sample_id in sample_ids:
        path = vlm_dir / f"{sample_id}.response.json"
        path.write_text(
            json.dumps({"prompt_body": DEMO_VLM_BODY, "neg_prompt": DEMO_VLM_NEG}) + "\n"
        )
        written.append(path)
    return written

"""Deterministic fake generation backend for testing without model weights.

Serves the same manifest/PNG file contract as a real diffusion backend:

* Inpaint jobs copy the conditioning before-image and darken burned
  pixels to 30% of their value, so burned regions are strictly darker.
* Base jobs render the mask as dark gray on light green, mirroring the
  two-level fields used in the metric hand calculations.

Also runnable as a subprocess for transport testing:
``python3 -m burnbench.stub_backend --manifest <path>``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core import BurnbenchError, Tile, read_mask, read_tile, write_tile

BASE_BURNED_RGB = (40.0, 40.0, 40.0)
BASE_INTACT_RGB = (140.0, 200.0, 120.0)
INPAINT_DARKEN = 0.3


class StubBackendError(BurnbenchError):
    pass


def generate(manifest: dict) -> Tile:
    """Render the stub output for one job manifest."""
    pipeline = manifest.get("pipeline")
    params = manifest.get("params", {})
    width, height = int(params.get("width", 512)), int(params.get("height", 512))
    mask = read_mask(manifest["mask_path"])
    if mask.shape != (height, width):
        raise StubBackendError(
            f"conditioning mask is {mask.shape[1]}x{mask.shape[0]}, "
            f"params request {width}x{height}"
        )
    burned = mask.data.astype(bool)

    if pipeline == "Base":
        data = np.empty((height, width, 3), dtype=np.float64)
        data[~burned] = BASE_INTACT_RGB
        data[burned] = BASE_BURNED_RGB
        return Tile(data)

    if pipeline == "Inpaint":
        before_path = manifest.get("before_path")
        if not before_path:
            raise StubBackendError("Inpaint manifest has no before_path")
        before = read_tile(before_path)
        if before.shape != (height, width):
            raise StubBackendError(
                f"before image is {before.shape[1]}x{before.shape[0]}, "
                f"params request {width}x{height}"
            )
        data = np.array(before.data)
        data[burned] *= INPAINT_DARKEN
        return Tile(data)

    raise StubBackendError(f"unknown pipeline {pipeline!r}")


def serve_manifest(manifest_path: str | Path) -> Path:
    """Read a manifest file, write its output PNG, return the output path."""
    manifest = json.loads(Path(manifest_path).read_text())
    tile = generate(manifest)
    out = Path(manifest["output_path"])
    out.parent.mkdir(parents=True, exist_ok=True)
    write_tile(tile, out)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="burnbench stub generation backend")
    ap.add_argument("--manifest", required=True)
    args = ap.parse_args(argv)
    try:
        serve_manifest(args.manifest)
    except Exception as exc:
        print(f"stub backend failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

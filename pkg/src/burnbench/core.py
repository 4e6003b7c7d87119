"""Shared data types for the burn-scar synthesis evaluation toolkit.

All imagery is handled as RGB rasters with float channel values on the
0-255 scale; burn masks are binary rasters aligned to their tile. Every
type here is immutable after construction and safe to share across
worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image

EXPERIMENT_IDS = ("E1", "E2", "E3", "E4", "E5", "E6")
PIPELINES = ("Base", "Inpaint")
PROMPT_SOURCES = ("P1", "P2", "P3", "VLM")

# experiment id -> (pipeline, color_match, allowed prompt sources)
EXPERIMENT_TABLE: dict[str, tuple[str, bool, tuple[str, ...]]] = {
    "E1": ("Base", False, ("P1", "P2", "P3")),
    "E2": ("Inpaint", False, ("P1", "P2", "P3")),
    "E3": ("Inpaint", True, ("P1", "P2", "P3")),
    "E4": ("Base", True, ("P1", "P2", "P3")),
    "E5": ("Inpaint", False, ("VLM",)),
    "E6": ("Base", False, ("VLM",)),
}


class BurnbenchError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(BurnbenchError):
    """Raised when paired rasters disagree on width/height."""


class InvalidRasterError(BurnbenchError):
    """Raised when raster data violates a type invariant."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr:
        out = arr.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Tile:
    """An RGB raster with float channel values in [0, 255].

    ``data`` has shape (height, width, 3) in R,G,B channel order.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidRasterError(f"tile must be HxWx3, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidRasterError(f"tile must be non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidRasterError("tile contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 255.0:
            raise InvalidRasterError(
                f"tile values must lie in [0, 255], got range "
                f"[{arr.min():g}, {arr.max():g}]"
            )
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True)
class BurnMask:
    """A binary raster marking burned pixels (1 = burned, 0 = intact)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidRasterError(f"mask must be non-empty HxW, got shape {arr.shape}")
        unique = np.unique(arr)
        if not np.all(np.isin(unique, (0, 1))):
            raise InvalidRasterError(f"mask values must be 0 or 1, got {unique[:8]}")
        object.__setattr__(self, "data", _freeze(arr.astype(np.uint8)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def burned_pixel_count(self) -> int:
        return int(self.data.sum())


def burn_ratio(mask: BurnMask) -> float:
    """Fraction of mask pixels equal to 1.

    All-zero and all-one masks return 0.0 and 1.0; callers that cannot
    handle degenerate masks enforce their own policy.
    """
    return mask.burned_pixel_count() / (mask.height * mask.width)


def require_same_shape(*rasters) -> None:
    """Raise DimensionMismatchError unless all rasters share one shape."""
    shapes = {r.shape for r in rasters}
    if len(shapes) > 1:
        raise DimensionMismatchError(f"raster shapes differ: {sorted(shapes)}")


@dataclass(frozen=True)
class RegionStats:
    """Per-channel RGB mean and population std over one mask region.

    A region with zero pixels is a distinct *undefined* state: ``mean``
    and ``std`` are None rather than silent zeros.
    """

    mean: np.ndarray | None
    std: np.ndarray | None
    pixel_count: int

    def __post_init__(self):
        if self.pixel_count < 0:
            raise ValueError("pixel_count must be non-negative")
        if self.pixel_count == 0:
            if self.mean is not None or self.std is not None:
                raise ValueError("empty region must have undefined mean/std")
            return
        mean = _freeze(np.asarray(self.mean, dtype=np.float64))
        std = _freeze(np.asarray(self.std, dtype=np.float64))
        if mean.shape != (3,) or std.shape != (3,):
            raise ValueError("mean and std must be length-3 RGB vectors")
        if std.min() < 0:
            raise ValueError("std components must be non-negative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def defined(self) -> bool:
        return self.pixel_count > 0

    @classmethod
    def undefined(cls) -> "RegionStats":
        return cls(mean=None, std=None, pixel_count=0)

    def to_dict(self) -> dict:
        if not self.defined:
            return {"mean": None, "std": None, "n": 0}
        return {"mean": list(self.mean), "std": list(self.std), "n": self.pixel_count}

    @classmethod
    def from_dict(cls, d: dict) -> "RegionStats":
        if d["n"] == 0:
            return cls.undefined()
        return cls(mean=np.array(d["mean"]), std=np.array(d["std"]), pixel_count=d["n"])


@dataclass(frozen=True)
class PaletteStats:
    """Dataset-level burned/intact RGB statistics from real post-fire tiles."""

    burned: RegionStats
    intact: RegionStats
    source_sample_ids: tuple[str, ...]

    def __post_init__(self):
        if not self.burned.defined or not self.intact.defined:
            raise ValueError("palette requires non-empty burned and intact regions")
        object.__setattr__(self, "source_sample_ids", tuple(self.source_sample_ids))

    def check_disjoint(self, test_ids) -> None:
        """Verify palette sources never overlap the test set."""
        overlap = set(self.source_sample_ids) & set(test_ids)
        if overlap:
            raise ValueError(f"palette sources overlap test set: {sorted(overlap)}")


@dataclass(frozen=True)
class SampleRecord:
    """One corpus sample: pre-fire tile, burn mask, optional real post-fire tile."""

    sample_id: str
    before: Tile
    mask: BurnMask
    after: Tile | None
    burn_ratio: float

    def __post_init__(self):
        require_same_shape(*(r for r in (self.before, self.mask, self.after) if r is not None))
        expected = burn_ratio(self.mask)
        if abs(self.burn_ratio - expected) > 1e-9:
            raise ValueError(
                f"{self.sample_id}: burn_ratio {self.burn_ratio!r} does not match "
                f"mask ({expected!r})"
            )

    def with_sample_id(self, sample_id: str) -> "SampleRecord":
        return replace(self, sample_id=sample_id)


@dataclass(frozen=True)
class ExperimentSetting:
    """One cell of the experiment x prompt matrix.

    Construction rejects any combination not present in the six-experiment
    configuration table (14 valid settings in total).
    """

    experiment_id: str
    pipeline: str
    color_match: bool
    prompt_source: str

    def __post_init__(self):
        row = EXPERIMENT_TABLE.get(self.experiment_id)
        if row is None:
            raise ValueError(f"unknown experiment id {self.experiment_id!r}")
        pipeline, color_match, prompt_sources = row
        if (self.pipeline, self.color_match) != (pipeline, color_match):
            raise ValueError(
                f"{self.experiment_id} requires pipeline={pipeline!r}, "
                f"color_match={color_match}, got pipeline={self.pipeline!r}, "
                f"color_match={self.color_match}"
            )
        if self.prompt_source not in prompt_sources:
            raise ValueError(
                f"{self.experiment_id} allows prompt sources {prompt_sources}, "
                f"got {self.prompt_source!r}"
            )

    @classmethod
    def create(cls, experiment_id: str, prompt_source: str) -> "ExperimentSetting":
        """Build a setting from the configuration table row for ``experiment_id``."""
        row = EXPERIMENT_TABLE.get(experiment_id)
        if row is None:
            raise ValueError(f"unknown experiment id {experiment_id!r}")
        pipeline, color_match, _ = row
        return cls(experiment_id, pipeline, color_match, prompt_source)

    @property
    def key(self) -> tuple[str, str]:
        return (self.experiment_id, self.prompt_source)


_SP_VALUES = (0.0, 1 / 3, 2 / 3, 1.0)


@dataclass(frozen=True)
class MetricRecord:
    """The four metric values for one (setting, sample) pair."""

    experiment_id: str
    prompt_source: str
    sample_id: str
    burn_iou: float
    delta_c_burn: float | None
    darkness_contrast: float
    spectral_plausibility: float

    def __post_init__(self):
        if not 0.0 <= self.burn_iou <= 1.0:
            raise ValueError(f"burn_iou out of [0,1]: {self.burn_iou}")
        if self.delta_c_burn is not None and self.delta_c_burn < 0:
            raise ValueError(f"delta_c_burn must be >= 0: {self.delta_c_burn}")
        if not -255.0 <= self.darkness_contrast <= 255.0:
            raise ValueError(f"darkness_contrast out of [-255,255]: {self.darkness_contrast}")
        if not any(abs(self.spectral_plausibility - v) <= 1e-12 for v in _SP_VALUES):
            raise ValueError(
                f"spectral_plausibility must be one of {{0, 1/3, 2/3, 1}}: "
                f"{self.spectral_plausibility}"
            )


# ---------------------------------------------------------------------------
# PNG interchange (8-bit; RGB for tiles, grayscale for masks)


def read_tile(path: str | Path) -> Tile:
    """Load an 8-bit RGB PNG as a Tile."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64)
    return Tile(arr)


def write_tile(tile: Tile, path: str | Path) -> None:
    """Write a Tile as 8-bit RGB PNG (values rounded to nearest integer).

    Integer-valued tiles round-trip bit-identically.
    """
    arr = np.clip(np.rint(tile.data), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG", compress_level=1)


def read_mask(path: str | Path) -> BurnMask:
    """Load an 8-bit grayscale PNG as a binary mask.

    Source pixels >= 128 map to 1, else 0, so anti-aliased mask exports
    stay binary.
    """
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    return BurnMask((arr >= 128).astype(np.uint8))


def write_mask(mask: BurnMask, path: str | Path) -> None:
    """Write a binary mask as 8-bit grayscale PNG (1 -> 255, 0 -> 0)."""
    arr = (mask.data * 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG", compress_level=1)

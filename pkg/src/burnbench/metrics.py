"""The four evaluation metrics for mask-conditioned burn-scar synthesis.

All operations are pure functions over (generated, real, mask, palette)
and may be evaluated concurrently without shared state.

Conventions fixed here and recorded in run metadata:
  * percentile = linear interpolation at rank p*(N-1) over sorted values
  * predicted-mask rule uses <= at the threshold, so ties inflate the
    predicted region
  * standard deviations are population (divide by n)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    BurnMask,
    BurnbenchError,
    ExperimentSetting,
    MetricRecord,
    PaletteStats,
    SampleRecord,
    Tile,
    burn_ratio,
    require_same_shape,
    _freeze,
)

DEFAULT_SP_EPSILON = 1e-6


class DegenerateMaskError(BurnbenchError):
    """Mask is all-zero or all-one; the adaptive threshold is undefined."""


class EmptyRegionError(BurnbenchError):
    """A metric needs pixels from a region that has none."""


class EvaluationError(BurnbenchError):
    """A metric failed for a specific sample."""

    def __init__(self, sample_id: str, cause: Exception):
        super().__init__(f"{sample_id}: {cause}")
        self.sample_id = sample_id
        self.cause = cause


@dataclass(frozen=True)
class GrayscaleField:
    """Per-pixel unweighted mean of the three RGB channels."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _freeze(np.asarray(self.data, dtype=np.float64)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class PredictedBurnMask:
    """Proxy burn mask: pixels at or below the adaptive threshold."""

    data: np.ndarray
    threshold_used: float

    def __post_init__(self):
        object.__setattr__(self, "data", _freeze(np.asarray(self.data, dtype=np.uint8)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def to_burn_mask(self) -> BurnMask:
        return BurnMask(self.data)


class BurnIouResult(NamedTuple):
    value: float
    predicted: PredictedBurnMask


def to_grayscale(tile: Tile) -> GrayscaleField:
    """Unweighted channel mean per pixel."""
    return GrayscaleField(tile.data.mean(axis=2))


def adaptive_threshold(g: GrayscaleField, p: float) -> float:
    """Percentile of the grayscale distribution at fraction ``p``.

    Linear interpolation at rank p*(N-1) over the sorted pixel values.
    The dataset filter guarantees p in (0, 1); anything else is an error.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"percentile fraction must be in (0, 1), got {p}")
    values = np.sort(g.data, axis=None)
    n = values.size
    rank = p * (n - 1)
    lo = int(np.floor(rank))
    frac = rank - lo
    if lo + 1 >= n:
        return float(values[-1])
    return float(values[lo] + frac * (values[lo + 1] - values[lo]))


def predict_burn_mask(generated: Tile, mask: BurnMask) -> PredictedBurnMask:
    """Threshold the generated image's grayscale at the mask's burn ratio."""
    require_same_shape(generated, mask)
    p = burn_ratio(mask)
    if p <= 0.0 or p >= 1.0:
        raise DegenerateMaskError(
            f"degenerate mask: burn ratio {p:g} leaves no threshold to adapt to"
        )
    g = to_grayscale(generated)
    tau = adaptive_threshold(g, p)
    return PredictedBurnMask(data=(g.data <= tau).astype(np.uint8), threshold_used=tau)


def burn_iou(generated: Tile, mask: BurnMask) -> BurnIouResult:
    """Jaccard overlap between the predicted burn mask and the ground truth.

    Returns the IoU value together with the predicted mask for audit output.
    """
    predicted = predict_burn_mask(generated, mask)
    pred = predicted.data.astype(bool)
    true = mask.data.astype(bool)
    union = int(np.count_nonzero(pred | true))
    intersection = int(np.count_nonzero(pred & true))
    return BurnIouResult(value=intersection / union, predicted=predicted)


def _region_mean_rgb(tile: Tile, selector: np.ndarray) -> np.ndarray:
    return tile.data[selector].mean(axis=0)


def delta_c_burn(generated: Tile, real: Tile, mask: BurnMask) -> float:
    """Euclidean distance between burned-region mean RGB of the two images."""
    require_same_shape(generated, real, mask)
    burned = mask.data.astype(bool)
    if not burned.any():
        raise EmptyRegionError("burned region is empty")
    mu_g = _region_mean_rgb(generated, burned)
    mu_r = _region_mean_rgb(real, burned)
    return float(np.linalg.norm(mu_g - mu_r))


def darkness_contrast(generated: Tile, mask: BurnMask) -> float:
    """Intact-region mean grayscale minus burned-region mean grayscale."""
    require_same_shape(generated, mask)
    burned = mask.data.astype(bool)
    if not burned.any() or burned.all():
        raise EmptyRegionError("darkness contrast needs both regions non-empty")
    g = to_grayscale(generated).data
    return float(g[~burned].mean() - g[burned].mean())


def spectral_plausibility(
    generated: Tile,
    mask: BurnMask,
    palette: PaletteStats,
    epsilon: float = DEFAULT_SP_EPSILON,
) -> float:
    """Fraction of RGB channels whose burned-region mean lies within 2 sigma
    of the palette's burned-region mean."""
    require_same_shape(generated, mask)
    burned = mask.data.astype(bool)
    if not burned.any():
        raise EmptyRegionError("burned region is empty")
    if not palette.burned.defined:
        raise EmptyRegionError("palette burned statistics are undefined")
    mu_g = _region_mean_rgb(generated, burned)
    z = np.abs(mu_g - palette.burned.mean) / (palette.burned.std + epsilon)
    return float(np.count_nonzero(z <= 2.0)) / 3.0


class SampleMetrics(NamedTuple):
    burn_iou: float
    delta_c_burn: float | None
    darkness_contrast: float
    spectral_plausibility: float
    predicted: PredictedBurnMask


def compute_sample_metrics(
    generated: Tile,
    sample: SampleRecord,
    palette: PaletteStats,
    sp_epsilon: float = DEFAULT_SP_EPSILON,
) -> SampleMetrics:
    """All four metrics for one generated image against one sample.

    delta_c_burn is absent when the sample has no real post-fire tile.
    Metric failures are re-raised with the sample id attached.
    """
    try:
        require_same_shape(generated, sample.mask)
        iou, predicted = burn_iou(generated, sample.mask)
        dc = darkness_contrast(generated, sample.mask)
        sp = spectral_plausibility(generated, sample.mask, palette, epsilon=sp_epsilon)
        delta_c = None
        if sample.after is not None:
            delta_c = delta_c_burn(generated, sample.after, sample.mask)
    except BurnbenchError as exc:
        raise EvaluationError(sample.sample_id, exc) from exc
    return SampleMetrics(
        burn_iou=iou,
        delta_c_burn=delta_c,
        darkness_contrast=dc,
        spectral_plausibility=sp,
        predicted=predicted,
    )


def evaluate_sample(
    generated: Tile,
    sample: SampleRecord,
    palette: PaletteStats,
    setting: ExperimentSetting,
    sp_epsilon: float = DEFAULT_SP_EPSILON,
) -> tuple[MetricRecord, PredictedBurnMask]:
    """compute_sample_metrics wrapped into a MetricRecord for the setting."""
    m = compute_sample_metrics(generated, sample, palette, sp_epsilon=sp_epsilon)
    record = MetricRecord(
        experiment_id=setting.experiment_id,
        prompt_source=setting.prompt_source,
        sample_id=sample.sample_id,
        burn_iou=m.burn_iou,
        delta_c_burn=m.delta_c_burn,
        darkness_contrast=m.darkness_contrast,
        spectral_plausibility=m.spectral_plausibility,
    )
    return record, m.predicted

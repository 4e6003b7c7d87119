"""burnbench: mask-conditioned burn-scar synthesis experiments and metrics."""

from .core import (
    BurnMask,
    BurnbenchError,
    ExperimentSetting,
    MetricRecord,
    PaletteStats,
    RegionStats,
    SampleRecord,
    Tile,
    burn_ratio,
    read_mask,
    read_tile,
    write_mask,
    write_tile,
)
from .metrics import (
    adaptive_threshold,
    burn_iou,
    compute_sample_metrics,
    darkness_contrast,
    delta_c_burn,
    evaluate_sample,
    spectral_plausibility,
    to_grayscale,
)
from .palette import estimate_palette, region_stats
from .color_match import ColorMatchPolicy, apply_color_matching, match_region
from .prompts import PromptBundle, build_prompt, build_vlm_request, describe_color, validate_vlm_response
from .ingest import StratificationPlan, filter_by_ratio, load_corpus, split_palette, stratify
from .runner import GenerationParams, JobManifest, RunPlan, enumerate_matrix, execute, plan_run
from .reporting import HeatmapMatrix, SettingSummary, pooled_distributions, render, summarize

__version__ = "0.1.0"

__all__ = [
    "BurnMask",
    "BurnbenchError",
    "ColorMatchPolicy",
    "ExperimentSetting",
    "GenerationParams",
    "HeatmapMatrix",
    "JobManifest",
    "MetricRecord",
    "PaletteStats",
    "PromptBundle",
    "RegionStats",
    "RunPlan",
    "SampleRecord",
    "SettingSummary",
    "StratificationPlan",
    "Tile",
    "adaptive_threshold",
    "apply_color_matching",
    "build_prompt",
    "build_vlm_request",
    "burn_iou",
    "burn_ratio",
    "compute_sample_metrics",
    "darkness_contrast",
    "delta_c_burn",
    "describe_color",
    "enumerate_matrix",
    "estimate_palette",
    "evaluate_sample",
    "execute",
    "filter_by_ratio",
    "load_corpus",
    "match_region",
    "plan_run",
    "pooled_distributions",
    "read_mask",
    "read_tile",
    "region_stats",
    "render",
    "spectral_plausibility",
    "split_palette",
    "stratify",
    "summarize",
    "to_grayscale",
    "validate_vlm_response",
    "write_mask",
    "write_tile",
]

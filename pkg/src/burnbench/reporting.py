"""Aggregation of metric records into summaries, pooled distributions,
heatmap matrices, and report files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import EXPERIMENT_IDS, MetricRecord, PROMPT_SOURCES
from .runner import PROMPT_ORDER
from .svg_plots import boxplot_grid_svg, heatmap_svg

METRIC_NAMES = ("burn_iou", "delta_c_burn", "darkness_contrast", "spectral_plausibility")

# display precision per metric (3dp for the unit-interval scores,
# 2dp for the channel-value metrics)
_DECIMALS = {
    "burn_iou": 3,
    "delta_c_burn": 2,
    "darkness_contrast": 2,
    "spectral_plausibility": 3,
}


@dataclass(frozen=True)
class MetricStats:
    """Mean/median/quartiles over the present values of one metric."""

    n: int
    mean: float | None
    median: float | None
    q1: float | None
    q3: float | None

    @classmethod
    def from_values(cls, values: list[float]) -> "MetricStats":
        if not values:
            return cls(n=0, mean=None, median=None, q1=None, q3=None)
        arr = np.asarray(values, dtype=np.float64)
        q1, median, q3 = np.percentile(arr, [25, 50, 75])
        return cls(
            n=len(values),
            mean=float(arr.mean()),
            median=float(median),
            q1=float(q1),
            q3=float(q3),
        )

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "median": self.median,
                "q1": self.q1, "q3": self.q3}


@dataclass(frozen=True)
class SettingSummary:
    """Aggregate metric statistics for one (experiment, prompt) setting."""

    experiment_id: str
    prompt_source: str
    n: int
    stats: dict[str, MetricStats]


def _metric_values(records, name: str) -> list[float]:
    return [v for v in (getattr(r, name) for r in records) if v is not None]


def summarize(records: list[MetricRecord]) -> list[SettingSummary]:
    """Group records by setting and compute mean/median/quartiles.

    Means are taken over present values only; delta_c_burn may be absent
    on unlabeled samples.
    """
    if not records:
        raise ValueError("no metric records to summarize")
    groups: dict[tuple[str, str], list[MetricRecord]] = {}
    for r in records:
        groups.setdefault((r.experiment_id, r.prompt_source), []).append(r)
    summaries = []
    for (experiment_id, prompt_source) in sorted(
        groups, key=lambda k: (k[0], PROMPT_ORDER.get(k[1], 99), k[1])
    ):
        members = groups[(experiment_id, prompt_source)]
        summaries.append(
            SettingSummary(
                experiment_id=experiment_id,
                prompt_source=prompt_source,
                n=len(members),
                stats={
                    name: MetricStats.from_values(_metric_values(members, name))
                    for name in METRIC_NAMES
                },
            )
        )
    return summaries


def pooled_distributions(records: list[MetricRecord]) -> dict[str, dict]:
    """Per-experiment distributions with prompt strategies pooled.

    For each metric: raw values plus a five-number summary and Tukey
    1.5*IQR whiskers, so any box-plot convention can be re-plotted.
    """
    if not records:
        raise ValueError("no metric records to pool")
    by_experiment: dict[str, list[MetricRecord]] = {}
    for r in records:
        by_experiment.setdefault(r.experiment_id, []).append(r)
    pools: dict[str, dict] = {}
    for experiment_id in sorted(by_experiment):
        members = by_experiment[experiment_id]
        metrics = {}
        for name in METRIC_NAMES:
            values = _metric_values(members, name)
            if not values:
                continue
            arr = np.asarray(values, dtype=np.float64)
            q1, median, q3 = np.percentile(arr, [25, 50, 75])
            iqr = q3 - q1
            inliers = arr[(arr >= q1 - 1.5 * iqr) & (arr <= q3 + 1.5 * iqr)]
            metrics[name] = {
                "values": [float(v) for v in values],
                "min": float(arr.min()),
                "q1": float(q1),
                "median": float(median),
                "q3": float(q3),
                "max": float(arr.max()),
                "whisker_lo": float(inliers.min()),
                "whisker_hi": float(inliers.max()),
            }
        pools[experiment_id] = metrics
    return pools


@dataclass(frozen=True)
class HeatmapMatrix:
    """experiment x prompt grid of mean values for one metric.

    ``cells`` holds None for (experiment, prompt) pairs outside the
    configuration matrix.
    """

    metric: str
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    cells: tuple[tuple[float | None, ...], ...]

    def populated(self) -> set[tuple[str, str]]:
        return {
            (row, col)
            for i, row in enumerate(self.rows)
            for j, col in enumerate(self.cols)
            if self.cells[i][j] is not None
        }


def heatmap_matrices(summaries: list[SettingSummary]) -> dict[str, HeatmapMatrix]:
    by_key = {(s.experiment_id, s.prompt_source): s for s in summaries}
    matrices = {}
    for name in METRIC_NAMES:
        cells = []
        for experiment_id in EXPERIMENT_IDS:
            row = []
            for source in PROMPT_SOURCES:
                summary = by_key.get((experiment_id, source))
                value = summary.stats[name].mean if summary else None
                row.append(value)
            cells.append(tuple(row))
        matrices[name] = HeatmapMatrix(
            metric=name, rows=EXPERIMENT_IDS, cols=PROMPT_SOURCES, cells=tuple(cells)
        )
    return matrices


def _display(name: str, value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.{_DECIMALS[name]}f}"


def render(
    summaries: list[SettingSummary],
    pools: dict[str, dict],
    out_dir: str | Path,
) -> list[Path]:
    """Write summary.csv/json, pools.json, heatmap data, and SVG plots.

    Deterministic: identical inputs re-render byte-identical files.
    """
    if not summaries:
        raise ValueError("nothing to render")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    lines = ["experiment,prompt," + ",".join(METRIC_NAMES)]
    for s in summaries:
        means = ",".join(_display(name, s.stats[name].mean) for name in METRIC_NAMES)
        lines.append(f"{s.experiment_id},{s.prompt_source},{means}")
    csv_path = out_dir / "summary.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    written.append(csv_path)

    doc = [
        {
            "experiment": s.experiment_id,
            "prompt": s.prompt_source,
            "n": s.n,
            "metrics": {name: s.stats[name].to_dict() for name in METRIC_NAMES},
        }
        for s in summaries
    ]
    json_path = out_dir / "summary.json"
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    written.append(json_path)

    pools_path = out_dir / "pools.json"
    pools_path.write_text(json.dumps(pools, indent=2, sort_keys=True) + "\n")
    written.append(pools_path)

    matrices = heatmap_matrices(summaries)
    heat_doc = {
        name: {
            "rows": list(m.rows),
            "cols": list(m.cols),
            "cells": [[c for c in row] for row in m.cells],
        }
        for name, m in matrices.items()
    }
    heat_path = out_dir / "heatmaps.json"
    heat_path.write_text(json.dumps(heat_doc, indent=2, sort_keys=True) + "\n")
    written.append(heat_path)

    for name, matrix in matrices.items():
        svg_path = out_dir / f"heatmap_{name}.svg"
        svg_path.write_text(heatmap_svg(matrix, decimals=_DECIMALS[name]))
        written.append(svg_path)

    box_path = out_dir / "boxplots.svg"
    box_path.write_text(boxplot_grid_svg(pools, METRIC_NAMES))
    written.append(box_path)

    return written

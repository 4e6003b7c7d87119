"""Job-manifest parsing and validation for the file-based contract.

A manifest is JSON with: job_id, sample_id, pipeline (Base|Inpaint),
mask_path, before_path (present exactly for Inpaint), prompt,
negative_prompt, params {steps, guidance_scale, scheduler, width, height,
seed}, output_path. This module is intentionally independent of the
orchestrator package; the JSON file is the interface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

PIPELINES = ("Base", "Inpaint")


class ManifestError(Exception):
    """Manifest fails the contract."""


@dataclass(frozen=True)
class SamplingParams:
    steps: int = 35
    guidance_scale: float = 7.5
    scheduler: str = "UniPC"
    width: int = 512
    height: int = 512
    seed: int = 0


@dataclass(frozen=True)
class Job:
    job_id: str
    sample_id: str
    pipeline: str
    mask_path: Path
    before_path: Path | None
    prompt: str
    negative_prompt: str
    params: SamplingParams
    output_path: Path


def parse_job(doc: dict, base_dir: Path | None = None) -> Job:
    """Validate a manifest document; relative paths resolve against base_dir."""
    required = ["job_id", "sample_id", "pipeline", "mask_path", "prompt",
                "negative_prompt", "params", "output_path"]
    missing = [key for key in required if key not in doc]
    if missing:
        raise ManifestError(f"manifest missing fields: {missing}")

    pipeline = doc["pipeline"]
    if pipeline not in PIPELINES:
        raise ManifestError(f"pipeline must be one of {PIPELINES}, got {pipeline!r}")

    if pipeline == "Inpaint" and not doc.get("before_path"):
        raise ManifestError("Inpaint jobs require before_path")
    if pipeline == "Base" and doc.get("before_path"):
        raise ManifestError("Base jobs must not carry before_path")

    raw = doc["params"]
    try:
        params = SamplingParams(
            steps=int(raw.get("steps", 35)),
            guidance_scale=float(raw.get("guidance_scale", 7.5)),
            scheduler=str(raw.get("scheduler", "UniPC")),
            width=int(raw.get("width", 512)),
            height=int(raw.get("height", 512)),
            seed=int(raw.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"bad params block: {exc}") from exc
    if params.width < 1 or params.height < 1 or params.steps < 1:
        raise ManifestError("params must have positive steps/width/height")

    def _path(value: str) -> Path:
        p = Path(value)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        return p

    return Job(
        job_id=str(doc["job_id"]),
        sample_id=str(doc["sample_id"]),
        pipeline=pipeline,
        mask_path=_path(doc["mask_path"]),
        before_path=_path(doc["before_path"]) if pipeline == "Inpaint" else None,
        prompt=str(doc["prompt"]),
        negative_prompt=str(doc["negative_prompt"]),
        params=params,
        output_path=_path(doc["output_path"]),
    )


def load_job(manifest_path: str | Path) -> Job:
    path = Path(manifest_path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path} is not valid JSON: {exc}") from exc
    return parse_job(doc, base_dir=path.parent)

"""Serve one job: manifest in, exact-size PNG out, or a failure file.

The output either satisfies the manifest's width/height or the job is
marked failed with a `failure.json` next to the output path; a wrong-size
image is never written."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

from PIL import Image

from .capabilities import BackendCapabilities, CapabilityError
from .manifest import Job, ManifestError, load_job
from .pipelines import DiffusersProvider, WeightLoadError


class JobFailed(Exception):
    def __init__(self, reason: str, kind: str):
        super().__init__(reason)
        self.reason = reason
        self.kind = kind


def write_failure(job_output_path: Path, reason: str, kind: str) -> Path:
    failure_path = Path(job_output_path).parent / "failure.json"
    failure_path.parent.mkdir(parents=True, exist_ok=True)
    failure_path.write_text(
        json.dumps({"reason": reason, "kind": kind}, indent=2, sort_keys=True) + "\n"
    )
    return failure_path


def _open_image(path: Path, what: str) -> Image.Image:
    try:
        with Image.open(path) as img:
            return img.copy()
    except (OSError, FileNotFoundError) as exc:
        raise JobFailed(f"cannot read {what} at {path}: {exc}", "input") from exc


def run_job(
    job: Job,
    provider,
    capabilities: BackendCapabilities | None = None,
) -> Path:
    """Generate the job's image; raises JobFailed with a classified reason."""
    capabilities = capabilities or BackendCapabilities()
    try:
        capabilities.check(job)
    except CapabilityError as exc:
        raise JobFailed(str(exc), "capability") from exc

    mask_image = _open_image(job.mask_path, "conditioning mask")
    try:
        if job.pipeline == "Base":
            image = provider.generate_base(job, mask_image)
        else:
            before_image = _open_image(job.before_path, "before image")
            image = provider.generate_inpaint(job, mask_image, before_image)
    except JobFailed:
        raise
    except WeightLoadError as exc:
        raise JobFailed(str(exc), "weights") from exc
    except (MemoryError, RuntimeError) as exc:  # CUDA/host OOM and kin
        raise JobFailed(f"generation failed: {exc}", "runtime") from exc

    if image.size != (job.params.width, job.params.height):
        raise JobFailed(
            f"pipeline produced {image.size[0]}x{image.size[1]}, manifest "
            f"requires {job.params.width}x{job.params.height}",
            "contract",
        )
    job.output_path.parent.mkdir(parents=True, exist_ok=True)
    image.convert("RGB").save(job.output_path, format="PNG")
    _write_job_metadata(job, provider)
    return job.output_path


def _write_job_metadata(job: Job, provider) -> None:
    weights = getattr(provider, "weights", None)
    meta = {
        "job_id": job.job_id,
        "pipeline": job.pipeline,
        "seed": job.params.seed,
        "scheduler": job.params.scheduler,
        "weights": asdict(weights) if weights is not None else None,
    }
    meta_path = job.output_path.parent / "generation_meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def serve_manifest_file(
    manifest_path: str | Path,
    provider=None,
    capabilities: BackendCapabilities | None = None,
) -> tuple[bool, str]:
    """File-contract entry point; returns (ok, detail).

    Failures land in failure.json beside the output path and never leave a
    truncated image behind.
    """
    manifest_path = Path(manifest_path)
    try:
        job = load_job(manifest_path)
    except ManifestError as exc:
        # no trustworthy output path; report next to the manifest
        write_failure(manifest_path.parent / "output.png", str(exc), "manifest")
        return False, str(exc)

    provider = provider or DiffusersProvider()
    try:
        output = run_job(job, provider, capabilities)
    except JobFailed as exc:
        write_failure(job.output_path, exc.reason, exc.kind)
        return False, exc.reason
    return True, str(output)

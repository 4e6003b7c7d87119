"""Experiment-matrix planning and execution over a file-based backend contract.

Each job is a manifest JSON written under the run directory; a backend
(stub, subprocess command, or HTTP endpoint) turns it into a PNG at the
manifest's output path. The runner then downsamples to the evaluation
resolution, applies optional color matching, and evaluates the metrics.
Failed jobs land in the failure ledger and never abort the run.
"""

from __future__ import annotations

import hashlib
import json
import subprocess
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import stub_backend
from .color_match import ColorMatchPolicy, apply_color_matching
from .core import (
    BurnbenchError,
    ExperimentSetting,
    EXPERIMENT_TABLE,
    MetricRecord,
    PaletteStats,
    SampleRecord,
    read_tile,
    write_mask,
    write_tile,
)
from .metrics import DEFAULT_SP_EPSILON, evaluate_sample
from .prompts import DEFAULT_TOKEN_BUDGET, PromptBundle, build_prompt
from .resample import downsample_tile_area, upsample_mask_nearest, upsample_tile_nearest

DEFAULT_TIMEOUT_S = 600
CONDITIONING_SIZE = 512

PROMPT_ORDER = {"P1": 0, "P2": 1, "P3": 2, "VLM": 3}

CSV_HEADER = (
    "experiment,prompt,sample,burn_iou,delta_c_burn,"
    "darkness_contrast,spectral_plausibility"
)


class PlanningError(BurnbenchError):
    pass


class JobFailure(BurnbenchError):
    pass


@dataclass(frozen=True)
class GenerationParams:
    """Diffusion sampling parameters; the fixed defaults all experiments use."""

    steps: int = 35
    guidance_scale: float = 7.5
    scheduler: str = "UniPC"
    width: int = 512
    height: int = 512
    seed: int = 0


@dataclass(frozen=True)
class JobManifest:
    """One generation job in the file contract.

    ``before_path`` is present exactly when the pipeline is Inpaint.
    """

    job_id: str
    sample_id: str
    pipeline: str
    mask_path: str
    before_path: str | None
    prompt: str
    negative_prompt: str
    params: GenerationParams
    output_path: str

    def __post_init__(self):
        if self.pipeline == "Base" and self.before_path is not None:
            raise ValueError(f"{self.job_id}: Base jobs must not carry before_path")
        if self.pipeline == "Inpaint" and self.before_path is None:
            raise ValueError(f"{self.job_id}: Inpaint jobs require before_path")

    def to_dict(self) -> dict:
        doc = asdict(self)
        if self.before_path is None:
            del doc["before_path"]
        return doc


@dataclass(frozen=True)
class RunPlan:
    settings: tuple[ExperimentSetting, ...]
    samples: tuple[str, ...]
    jobs: tuple[JobManifest, ...]

    def __post_init__(self):
        if len(self.jobs) != len(self.settings) * len(self.samples):
            raise ValueError(
                f"plan has {len(self.jobs)} jobs for {len(self.settings)} settings "
                f"x {len(self.samples)} samples"
            )


def enumerate_matrix(experiments=None, prompts=None) -> list[ExperimentSetting]:
    """All experiment x prompt settings, optionally restricted.

    The full matrix is 14 settings: E1-E4 with the three hand-crafted
    prompts, E5/E6 with the VLM prompt.
    """
    settings = []
    for experiment_id, (_, _, sources) in EXPERIMENT_TABLE.items():
        if experiments is not None and experiment_id not in experiments:
            continue
        for source in sources:
            if prompts is not None and source not in prompts:
                continue
            settings.append(ExperimentSetting.create(experiment_id, source))
    return settings


def job_seed(run_seed: int, setting: ExperimentSetting, sample_id: str) -> int:
    """Deterministic, platform-stable per-job seed."""
    key = f"{run_seed}|{setting.experiment_id}|{setting.prompt_source}|{sample_id}"
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _conditioning_paths(run_dir: Path, sample_id: str) -> tuple[Path, Path]:
    cond = run_dir / "conditioning" / sample_id
    return cond / "mask_512.png", cond / "before_512.png"


def plan_run(
    settings,
    samples,
    palette: PaletteStats,
    vlm_responses: dict[str, PromptBundle] | None = None,
    run_seed: int = 0,
    run_dir: str | Path = "run",
    token_budget: int = DEFAULT_TOKEN_BUDGET,
) -> RunPlan:
    """Resolve prompts and lay out one JobManifest per (setting, sample).

    VLM settings require a validated response bundle for every sample.
    """
    # manifests must be self-contained for external backends
    run_dir = Path(run_dir).resolve()
    vlm_responses = vlm_responses or {}
    settings = tuple(settings)
    samples = tuple(samples)

    needs_vlm = [s for s in settings if s.prompt_source == "VLM"]
    if needs_vlm:
        missing = [s.sample_id for s in samples if s.sample_id not in vlm_responses]
        if missing:
            raise PlanningError(
                f"VLM settings {[s.experiment_id for s in needs_vlm]} need validated "
                f"responses; missing for samples: {missing}"
            )

    hand_crafted: dict[str, PromptBundle] = {}
    for source in {s.prompt_source for s in settings} - {"VLM"}:
        hand_crafted[source] = build_prompt(source, palette=palette, budget=token_budget)

    jobs = []
    for setting in settings:
        for sample in samples:
            if setting.prompt_source == "VLM":
                bundle = vlm_responses[sample.sample_id]
            else:
                bundle = hand_crafted[setting.prompt_source]
            job_id = f"{setting.experiment_id}-{setting.prompt_source}-{sample.sample_id}"
            mask_path, before_path = _conditioning_paths(run_dir, sample.sample_id)
            job_dir = run_dir / "jobs" / job_id
            jobs.append(
                JobManifest(
                    job_id=job_id,
                    sample_id=sample.sample_id,
                    pipeline=setting.pipeline,
                    mask_path=str(mask_path),
                    before_path=str(before_path) if setting.pipeline == "Inpaint" else None,
                    prompt=bundle.positive,
                    negative_prompt=bundle.negative,
                    params=GenerationParams(seed=job_seed(run_seed, setting, sample.sample_id)),
                    output_path=str(job_dir / "output.png"),
                )
            )
    return RunPlan(settings=settings, samples=tuple(s.sample_id for s in samples), jobs=tuple(jobs))


def write_plan(plan: RunPlan, path: str | Path) -> None:
    doc = {
        "settings": [
            {
                "experiment_id": s.experiment_id,
                "pipeline": s.pipeline,
                "color_match": s.color_match,
                "prompt_source": s.prompt_source,
            }
            for s in plan.settings
        ],
        "samples": list(plan.samples),
        "jobs": [j.to_dict() for j in plan.jobs],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Backend transports


def _dispatch_stub(manifest_path: Path, timeout_s: int) -> None:
    stub_backend.serve_manifest(manifest_path)


def _make_subprocess_dispatch(command_template: str):
    def dispatch(manifest_path: Path, timeout_s: int) -> None:
        if "{manifest}" in command_template:
            # plain replace: backend commands may contain literal braces
            command = command_template.replace("{manifest}", str(manifest_path))
        else:
            command = f"{command_template} {manifest_path}"
        proc = subprocess.run(
            command,
            shell=True,
            capture_output=True,
            text=True,
            timeout=timeout_s,
        )
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout or "").strip().splitlines()
            raise JobFailure(
                f"backend command exited {proc.returncode}: "
                f"{tail[-1] if tail else 'no output'}"
            )

    return dispatch


def _make_http_dispatch(url: str):
    def dispatch(manifest_path: Path, timeout_s: int) -> None:
        body = Path(manifest_path).read_bytes()
        req = urllib.request.Request(
            url, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        with urllib.request.urlopen(req, timeout=timeout_s) as resp:
            if resp.status != 200:
                raise JobFailure(f"backend endpoint returned HTTP {resp.status}")

    return dispatch


def make_dispatcher(backend: str):
    """Resolve a backend spec: 'stub', 'subprocess:<cmd>', or 'http:<url>'."""
    if backend == "stub":
        return _dispatch_stub
    if backend.startswith("subprocess:"):
        return _make_subprocess_dispatch(backend[len("subprocess:"):])
    if backend.startswith("http:"):
        return _make_http_dispatch(backend[len("http:"):])
    raise ValueError(f"unknown backend spec {backend!r}")


# ---------------------------------------------------------------------------
# Execution


@dataclass
class RunReport:
    records: list[MetricRecord] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _materialize_conditioning(run_dir: Path, samples) -> None:
    for sample in samples:
        mask_path, before_path = _conditioning_paths(run_dir, sample.sample_id)
        mask_path.parent.mkdir(parents=True, exist_ok=True)
        mask512 = upsample_mask_nearest(sample.mask, CONDITIONING_SIZE, CONDITIONING_SIZE)
        write_mask(mask512, mask_path)
        before512 = upsample_tile_nearest(sample.before, CONDITIONING_SIZE, CONDITIONING_SIZE)
        write_tile(before512, before_path)


def _setting_for_job(plan: RunPlan, job: JobManifest) -> ExperimentSetting:
    experiment_id, prompt_source, _ = job.job_id.split("-", 2)
    for s in plan.settings:
        if s.key == (experiment_id, prompt_source):
            return s
    raise PlanningError(f"job {job.job_id} matches no plan setting")


def _run_job(
    job: JobManifest,
    setting: ExperimentSetting,
    sample: SampleRecord,
    run_dir: Path,
    dispatch,
    palette: PaletteStats,
    color_policy: ColorMatchPolicy,
    timeout_s: int,
    sp_epsilon: float,
    audit: bool,
) -> MetricRecord:
    job_dir = run_dir / "jobs" / job.job_id
    job_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = job_dir / "manifest.json"
    manifest_path.write_text(json.dumps(job.to_dict(), indent=2, sort_keys=True) + "\n")
    # stale artifacts from an earlier attempt must not masquerade as results
    Path(job.output_path).unlink(missing_ok=True)
    (Path(job.output_path).parent / "failure.json").unlink(missing_ok=True)

    def backend_reason() -> str | None:
        failure_file = Path(job.output_path).parent / "failure.json"
        if failure_file.exists():
            try:
                return json.loads(failure_file.read_text()).get("reason")
            except (OSError, json.JSONDecodeError):
                return None
        return None

    try:
        dispatch(manifest_path, timeout_s)
    except JobFailure:
        # a structured failure file beats the transport's exit-status message
        reason = backend_reason()
        if reason:
            raise JobFailure(f"backend reported failure: {reason}") from None
        raise

    output_path = Path(job.output_path)
    if not output_path.exists():
        reason = backend_reason()
        if reason:
            raise JobFailure(f"backend reported failure: {reason}")
        raise JobFailure("backend produced no output image")
    generated = read_tile(output_path)
    if generated.shape != (job.params.height, job.params.width):
        raise JobFailure(
            f"output is {generated.shape[1]}x{generated.shape[0]}, manifest "
            f"requires {job.params.width}x{job.params.height}"
        )

    evaluated = downsample_tile_area(generated, sample.mask.width, sample.mask.height)
    if setting.color_match:
        evaluated = apply_color_matching(evaluated, sample.mask, palette, color_policy)
        write_tile(evaluated, job_dir / "matched.png")

    record, predicted = evaluate_sample(
        evaluated, sample, palette, setting, sp_epsilon=sp_epsilon
    )
    if audit:
        write_mask(predicted.to_burn_mask(), job_dir / "predicted_mask.png")
    return record


def execute(
    plan: RunPlan,
    samples,
    palette: PaletteStats,
    run_dir: str | Path,
    backend: str = "stub",
    color_policy: ColorMatchPolicy | None = None,
    timeout_s: int = DEFAULT_TIMEOUT_S,
    workers: int = 1,
    sp_epsilon: float = DEFAULT_SP_EPSILON,
    audit: bool = False,
) -> RunReport:
    """Run every job in the plan against the backend and evaluate results.

    Individual job failures are collected, not raised; the metric records
    of the surviving jobs are written to metrics.csv in a deterministic
    order regardless of worker count.
    """
    run_dir = Path(run_dir).resolve()
    run_dir.mkdir(parents=True, exist_ok=True)
    color_policy = color_policy or ColorMatchPolicy()
    dispatch = make_dispatcher(backend)
    samples_by_id = {s.sample_id: s for s in samples}

    missing = [sid for sid in plan.samples if sid not in samples_by_id]
    if missing:
        raise PlanningError(f"plan references unknown samples: {missing}")

    write_plan(plan, run_dir / "plan.json")
    _materialize_conditioning(run_dir, [samples_by_id[sid] for sid in plan.samples])

    report = RunReport()

    def attempt(job: JobManifest):
        setting = _setting_for_job(plan, job)
        sample = samples_by_id[job.sample_id]
        try:
            record = _run_job(
                job, setting, sample, run_dir, dispatch, palette,
                color_policy, timeout_s, sp_epsilon, audit,
            )
            return job, record, None
        except subprocess.TimeoutExpired:
            return job, None, f"backend timed out after {timeout_s}s"
        except Exception as exc:
            return job, None, str(exc)

    if workers <= 1:
        outcomes = [attempt(job) for job in plan.jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, plan.jobs))

    for job, record, error in outcomes:
        if error is None:
            report.records.append(record)
        else:
            report.failures.append({"job_id": job.job_id, "reason": error})

    report.records.sort(
        key=lambda r: (r.experiment_id, PROMPT_ORDER[r.prompt_source], r.sample_id)
    )
    report.failures.sort(key=lambda f: f["job_id"])

    write_metrics_csv(report.records, run_dir / "metrics.csv")
    (run_dir / "failures.json").write_text(
        json.dumps(report.failures, indent=2, sort_keys=True) + "\n"
    )
    return report


# ---------------------------------------------------------------------------
# Metric record persistence


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.5f}"


def write_metrics_csv(records, path: str | Path) -> None:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.experiment_id},{r.prompt_source},{r.sample_id},"
            f"{_fmt(r.burn_iou)},{_fmt(r.delta_c_burn)},"
            f"{_fmt(r.darkness_contrast)},{_fmt(r.spectral_plausibility)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _snap_sp(value: float) -> float:
    # CSV stores 5 decimals; restore the exact {0, 1/3, 2/3, 1} lattice point
    return min((0.0, 1 / 3, 2 / 3, 1.0), key=lambda v: abs(v - value))


def read_metrics_csv(path: str | Path) -> list[MetricRecord]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} is not a burnbench metrics CSV")
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        experiment, prompt, sample, iou, delta_c, dc, sp = line.split(",")
        records.append(
            MetricRecord(
                experiment_id=experiment,
                prompt_source=prompt,
                sample_id=sample,
                burn_iou=float(iou),
                delta_c_burn=float(delta_c) if delta_c else None,
                darkness_contrast=float(dc),
                spectral_plausibility=_snap_sp(float(sp)),
            )
        )
    return records

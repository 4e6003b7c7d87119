"""Command-line entry point: split, palette, run, eval, report.

Exit codes: 0 success, 1 partial failure, 2 configuration or corpus error.
All outputs are deterministic for a fixed seed and input state; artifacts
carry no timestamps.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import bpe, prompts, reporting, runner
from .color_match import ColorMatchPolicy
from .core import BurnbenchError, SampleRecord
from .ingest import (
    RATIO_HI,
    RATIO_LO,
    CorpusError,
    StratificationPlan,
    filter_by_ratio,
    load_corpus,
    read_splits,
    split_palette,
    stratify,
    write_splits,
)
from .metrics import DEFAULT_SP_EPSILON, EvaluationError
from .palette import estimate_palette, read_palette, write_palette

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run; serialized verbatim to meta.json."""

    corpus_root: str
    run_id: str
    run_seed: int
    backend: str
    palette_aggregation: str
    color_match_regions: tuple[str, ...]
    token_budget: int
    workers: int
    timeout_s: int


class CliError(BurnbenchError):
    pass


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise CliError(f"config file {path} must be a flat JSON object")
    return doc


def _setting(args, file_cfg: dict, key: str, default):
    """Precedence: CLI flag > config file > default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in file_cfg:
        return file_cfg[key]
    return default


def _load_corpus_or_die(corpus_root: str):
    result = load_corpus(corpus_root)
    for sample_id, message in result.errors:
        print(f"warning: skipped {sample_id}: {message}", file=sys.stderr)
    if not result.samples:
        raise CliError(f"no loadable samples under {corpus_root}")
    return result


def _test_records(corpus_samples, splits: dict) -> list[SampleRecord]:
    by_id = {s.sample_id: s for s in corpus_samples}
    records = []
    for entry in splits["test"]:
        source = by_id.get(entry["source_id"])
        if source is None:
            raise CliError(f"test sample {entry['source_id']} missing from corpus")
        records.append(source.with_sample_id(entry["id"]))
    return records


def _palette_records(corpus_samples, splits: dict) -> list[SampleRecord]:
    by_id = {s.sample_id: s for s in corpus_samples}
    records = []
    for palette_id in splits["palette_ids"]:
        source = by_id.get(palette_id)
        if source is None:
            raise CliError(f"palette sample {palette_id} missing from corpus")
        records.append(source)
    return records


# ---------------------------------------------------------------------------
# Commands


def cmd_split(args, file_cfg: dict) -> int:
    corpus = _setting(args, file_cfg, "corpus", None)
    out = Path(_setting(args, file_cfg, "out", "burnbench_out"))
    seed = int(_setting(args, file_cfg, "seed", 42))
    test_size = int(_setting(args, file_cfg, "test_size", 10))
    palette_count = int(_setting(args, file_cfg, "palette_count", 40))
    if corpus is None:
        raise CliError("--corpus is required")
    if test_size % 5 != 0:
        raise CliError(f"test size {test_size} is not divisible by the 5 bins")

    result = _load_corpus_or_die(corpus)
    eligible = filter_by_ratio(result.samples, RATIO_LO, RATIO_HI)
    plan = StratificationPlan(per_bin_count=test_size // 5, seed=seed)
    split = stratify(eligible, plan)
    palette_samples = split_palette(eligible, split, palette_count, seed=seed)

    out.mkdir(parents=True, exist_ok=True)
    write_splits(out / "splits.json", split, palette_samples, plan)
    print(
        f"selected {len(split.samples)} test and {len(palette_samples)} palette "
        f"samples -> {out / 'splits.json'}"
    )
    return EXIT_OK


def cmd_palette(args, file_cfg: dict) -> int:
    corpus = _setting(args, file_cfg, "corpus", None)
    out = Path(_setting(args, file_cfg, "out", "burnbench_out"))
    aggregation = _setting(args, file_cfg, "palette_aggregation", "pooled")
    if corpus is None:
        raise CliError("--corpus is required")
    splits = read_splits(out / "splits.json")
    result = _load_corpus_or_die(corpus)
    palette_samples = _palette_records(result.samples, splits)
    test_ids = {e["source_id"] for e in splits["test"]} | {e["id"] for e in splits["test"]}
    palette = estimate_palette(palette_samples, aggregation=aggregation, test_ids=test_ids)
    write_palette(palette, out / "palette.json", aggregation=aggregation)
    print(
        f"palette from {len(palette_samples)} samples "
        f"(burned n={palette.burned.pixel_count}) -> {out / 'palette.json'}"
    )
    return EXIT_OK


def _vlm_bundles(out: Path, test_records, settings) -> dict:
    """Load and validate VLM responses; emit request files for missing ones."""
    if not any(s.prompt_source == "VLM" for s in settings):
        return {}
    vlm_dir = out / "vlm"
    bundles = {}
    missing = []
    for sample in test_records:
        response_path = vlm_dir / f"{sample.sample_id}.response.json"
        if not response_path.exists():
            missing.append(sample.sample_id)
            if sample.after is not None:
                vlm_dir.mkdir(parents=True, exist_ok=True)
                request = prompts.build_vlm_request(sample)
                (vlm_dir / f"{sample.sample_id}.request.json").write_text(
                    json.dumps(request, indent=2, sort_keys=True) + "\n"
                )
            continue
        bundles[sample.sample_id] = prompts.validate_vlm_response(
            response_path.read_text()
        )
    if missing:
        raise CliError(
            f"VLM experiments need responses under {vlm_dir} for samples {missing}; "
            f"request documents were written there for each sample with an after image"
        )
    return bundles


class _RunLock:
    """Exclusive lock on a run directory; concurrent commands are refused."""

    def __init__(self, run_dir: Path):
        self.path = run_dir / ".lock"

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise CliError(
                f"run directory is locked by {self.path}; another command may be "
                f"running (delete the lock file if that's stale)"
            ) from None
        os.close(fd)
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)
        return False


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_meta(run_dir: Path, config: RunConfig, sp_epsilon: float) -> None:
    merges_path = bpe.assets_dir() / "bpe" / "merges.txt"
    meta = {
        "config": asdict(config),
        "methods": {
            "percentile": "linear interpolation at rank p*(N-1)",
            "threshold_tie_rule": "predicted = grayscale <= threshold",
            "std_convention": "population",
            "sp_epsilon": sp_epsilon,
            "downsample": "area average (box filter)",
            "mask_upsample": "nearest neighbor",
            "before_upsample": "nearest neighbor",
            "color_match": "per-region per-channel mean/std affine transfer",
            "color_match_stage": "after downsampling to evaluation resolution",
            "test_id_order": "ascending burn ratio",
        },
        "assets": {
            "descriptor_table_version": prompts.descriptor_table_version(),
            "vocabulary_sha256": _file_sha256(merges_path),
        },
    }
    (run_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_run(args, file_cfg: dict) -> int:
    corpus = _setting(args, file_cfg, "corpus", None)
    out = Path(_setting(args, file_cfg, "out", "burnbench_out"))
    if corpus is None:
        raise CliError("--corpus is required")
    regions = _setting(args, file_cfg, "color_match_regions", "burned,intact")
    if isinstance(regions, str):
        regions = regions.split(",")
    config = RunConfig(
        corpus_root=str(corpus),
        run_id=str(_setting(args, file_cfg, "run_id", "run")),
        run_seed=int(_setting(args, file_cfg, "seed", 42)),
        backend=str(_setting(args, file_cfg, "backend", "stub")),
        palette_aggregation=str(_setting(args, file_cfg, "palette_aggregation", "pooled")),
        color_match_regions=tuple(regions),
        token_budget=int(_setting(args, file_cfg, "token_budget", prompts.DEFAULT_TOKEN_BUDGET)),
        workers=int(_setting(args, file_cfg, "workers", 1)),
        timeout_s=int(_setting(args, file_cfg, "timeout_s", runner.DEFAULT_TIMEOUT_S)),
    )
    experiments = _setting(args, file_cfg, "experiments", None)
    prompt_filter = _setting(args, file_cfg, "prompts", None)
    audit = bool(_setting(args, file_cfg, "audit", False))

    splits = read_splits(out / "splits.json")
    palette, _ = read_palette(out / "palette.json")
    result = _load_corpus_or_die(config.corpus_root)
    test_records = _test_records(result.samples, splits)
    palette.check_disjoint(
        {e["source_id"] for e in splits["test"]} | {e["id"] for e in splits["test"]}
    )

    settings = runner.enumerate_matrix(
        experiments=set(experiments.split(",")) if experiments else None,
        prompts=set(prompt_filter.split(",")) if prompt_filter else None,
    )
    if not settings:
        raise CliError("experiment/prompt filters leave no settings to run")
    bundles = _vlm_bundles(out, test_records, settings)

    run_dir = out / "runs" / config.run_id
    with _RunLock(run_dir):
        plan = runner.plan_run(
            settings,
            test_records,
            palette,
            vlm_responses=bundles,
            run_seed=config.run_seed,
            run_dir=run_dir,
            token_budget=config.token_budget,
        )
        _write_meta(run_dir, config, DEFAULT_SP_EPSILON)
        report = runner.execute(
            plan,
            test_records,
            palette,
            run_dir=run_dir,
            backend=config.backend,
            color_policy=ColorMatchPolicy(regions=config.color_match_regions),
            timeout_s=config.timeout_s,
            workers=config.workers,
            audit=audit,
        )
        if report.records:
            summaries = reporting.summarize(report.records)
            pools = reporting.pooled_distributions(report.records)
            reporting.render(summaries, pools, run_dir)

    print(
        f"{len(report.records)} jobs evaluated, {len(report.failures)} failed "
        f"-> {run_dir}"
    )
    return EXIT_OK if report.ok else EXIT_PARTIAL


def cmd_eval(args, file_cfg: dict) -> int:
    corpus = _setting(args, file_cfg, "corpus", None)
    images = _setting(args, file_cfg, "images", None)
    out = Path(_setting(args, file_cfg, "out", "burnbench_out"))
    if corpus is None or images is None:
        raise CliError("--corpus and --images are required")
    images = Path(images)
    if not images.is_dir():
        raise CliError(f"images directory {images} does not exist")

    palette, _ = read_palette(out / "palette.json")
    result = _load_corpus_or_die(corpus)
    by_id = {s.sample_id: s for s in result.samples}
    splits_path = out / "splits.json"
    if splits_path.exists():
        for entry in read_splits(splits_path)["test"]:
            source = by_id.get(entry["source_id"])
            if source is not None:
                by_id[entry["id"]] = source.with_sample_id(entry["id"])

    from .core import MetricRecord, read_tile
    from .metrics import compute_sample_metrics
    from .runner import write_metrics_csv

    records = []
    skipped = []
    for png in sorted(images.glob("*.png")):
        sample_id = png.stem
        sample = by_id.get(sample_id)
        if sample is None:
            skipped.append((sample_id, "no matching corpus sample"))
            continue
        generated = read_tile(png)
        if generated.shape != sample.mask.shape:
            skipped.append(
                (sample_id, f"image is {generated.shape}, sample is {sample.mask.shape}")
            )
            continue
        try:
            m = compute_sample_metrics(generated, sample, palette)
            records.append(
                MetricRecord(
                    experiment_id="EVAL",
                    prompt_source="EXT",
                    sample_id=sample_id,
                    burn_iou=m.burn_iou,
                    delta_c_burn=m.delta_c_burn,
                    darkness_contrast=m.darkness_contrast,
                    spectral_plausibility=m.spectral_plausibility,
                )
            )
        except EvaluationError as exc:
            skipped.append((sample_id, str(exc)))

    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / "metrics.csv"
    write_metrics_csv(records, metrics_path)
    for sample_id, reason in skipped:
        print(f"skipped {sample_id}: {reason}", file=sys.stderr)
    print(f"evaluated {len(records)} images -> {metrics_path}")
    return EXIT_OK if records and not skipped else EXIT_PARTIAL


def cmd_report(args, file_cfg: dict) -> int:
    metrics = _setting(args, file_cfg, "metrics", None)
    out = Path(_setting(args, file_cfg, "out", "burnbench_out"))
    if metrics is None:
        raise CliError("--metrics is required")
    records = runner.read_metrics_csv(metrics)
    if not records:
        raise CliError(f"{metrics} has no metric rows")
    summaries = reporting.summarize(records)
    pools = reporting.pooled_distributions(records)
    written = reporting.render(summaries, pools, out)
    print(f"wrote {len(written)} report files under {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat JSON config file (CLI flags win)")
    parser.add_argument("--corpus", help="corpus root directory")
    parser.add_argument("--out", help="output root (default burnbench_out)")
    parser.add_argument("--seed", type=int, help="selection / run seed (default 42)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="burnbench",
        description="mask-conditioned burn-scar synthesis experiments and metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="build the stratified test/palette split")
    _add_common(p)
    p.add_argument("--test-size", dest="test_size", type=int)
    p.add_argument("--palette-count", dest="palette_count", type=int)

    p = sub.add_parser("palette", help="estimate palette statistics")
    _add_common(p)
    p.add_argument("--palette-aggregation", dest="palette_aggregation",
                   choices=("pooled", "per_image_mean"))

    p = sub.add_parser("run", help="plan, execute and report the experiment matrix")
    _add_common(p)
    p.add_argument("--run-id", dest="run_id")
    p.add_argument("--backend", help="stub | subprocess:<cmd with {manifest}> | http:<url>")
    p.add_argument("--experiments", help="comma-separated subset, e.g. E2,E3")
    p.add_argument("--prompts", help="comma-separated subset, e.g. P1,P2")
    p.add_argument("--workers", type=int)
    p.add_argument("--timeout-s", dest="timeout_s", type=int)
    p.add_argument("--token-budget", dest="token_budget", type=int)
    p.add_argument("--palette-aggregation", dest="palette_aggregation",
                   choices=("pooled", "per_image_mean"))
    p.add_argument("--color-match-regions", dest="color_match_regions",
                   help="comma-separated subset of burned,intact")
    p.add_argument("--audit", action="store_const", const=True,
                   help="write predicted burn masks beside metric records")

    p = sub.add_parser("eval", help="evaluate externally generated images")
    _add_common(p)
    p.add_argument("--images", help="directory of <sample_id>.png at sample resolution")

    p = sub.add_parser("report", help="re-render reports from a metrics CSV")
    _add_common(p)
    p.add_argument("--metrics", help="path to metrics.csv")

    return parser


_COMMANDS = {
    "split": cmd_split,
    "palette": cmd_palette,
    "run": cmd_run,
    "eval": cmd_eval,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_cfg = _load_config_file(args.config)
        return _COMMANDS[args.command](args, file_cfg)
    except (CliError, CorpusError, BurnbenchError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())

import json

import numpy as np
import pytest
from PIL import Image

from burnbench_backend.manifest import parse_job
from burnbench_backend.pipelines import WeightLoadError, mask_to_control_image
from burnbench_backend.service import JobFailed, run_job, serve_manifest_file

from backend_helpers import (
    FakeDiffusionProvider,
    WrongSizeProvider,
    manifest_doc,
    write_manifest,
)


class FailingWeightsProvider:
    def generate_base(self, job, mask_image):
        raise WeightLoadError("could not load controlnet 'x': offline")

    generate_inpaint = generate_base


class TestRunJob:
    def test_inpaint_emits_exact_size_png(self, job_dir):
        job = parse_job(manifest_doc(job_dir))
        out = run_job(job, FakeDiffusionProvider())
        with Image.open(out) as img:
            assert img.size == (512, 512)
            assert img.format == "PNG"

    def test_base_pipeline_runs(self, job_dir):
        job = parse_job(manifest_doc(job_dir, pipeline="Base"))
        out = run_job(job, FakeDiffusionProvider())
        assert out.exists()

    def test_seeded_reproducibility_same_provider(self, job_dir):
        job = parse_job(manifest_doc(job_dir))
        a = np.asarray(Image.open(run_job(job, FakeDiffusionProvider())))
        b = np.asarray(Image.open(run_job(job, FakeDiffusionProvider())))
        assert np.array_equal(a, b)

    def test_unsupported_scheduler_is_capability_failure(self, job_dir):
        doc = manifest_doc(job_dir)
        doc["params"]["scheduler"] = "DDIM"
        job = parse_job(doc)
        with pytest.raises(JobFailed) as err:
            run_job(job, FakeDiffusionProvider())
        assert err.value.kind == "capability"
        assert "DDIM" in err.value.reason

    def test_oversize_request_is_capability_failure(self, job_dir):
        doc = manifest_doc(job_dir)
        doc["params"]["width"] = doc["params"]["height"] = 4096
        with pytest.raises(JobFailed) as err:
            run_job(parse_job(doc), FakeDiffusionProvider())
        assert err.value.kind == "capability"

    def test_wrong_size_output_is_contract_failure(self, job_dir):
        job = parse_job(manifest_doc(job_dir))
        with pytest.raises(JobFailed) as err:
            run_job(job, WrongSizeProvider())
        assert err.value.kind == "contract"
        assert not job.output_path.exists()  # never a silently resized image

    def test_weight_load_failure_classified(self, job_dir):
        job = parse_job(manifest_doc(job_dir, pipeline="Base"))
        with pytest.raises(JobFailed) as err:
            run_job(job, FailingWeightsProvider())
        assert err.value.kind == "weights"

    def test_metadata_records_weights(self, job_dir):
        job = parse_job(manifest_doc(job_dir))
        run_job(job, FakeDiffusionProvider())
        meta = json.loads((job_dir / "generation_meta.json").read_text())
        assert meta["weights"]["controlnet_model"] == "fake/controlnet"
        assert meta["seed"] == 1234


class TestServeManifestFile:
    def test_success_path(self, job_dir):
        path = write_manifest(job_dir, manifest_doc(job_dir))
        ok, detail = serve_manifest_file(path, FakeDiffusionProvider())
        assert ok
        assert (job_dir / "output.png").exists()
        assert not (job_dir / "failure.json").exists()

    def test_capability_error_writes_failure_file(self, job_dir):
        doc = manifest_doc(job_dir)
        doc["params"]["scheduler"] = "Euler"
        path = write_manifest(job_dir, doc)
        ok, detail = serve_manifest_file(path, FakeDiffusionProvider())
        assert not ok
        failure = json.loads((job_dir / "failure.json").read_text())
        assert failure["kind"] == "capability"
        assert "Euler" in failure["reason"]
        assert not (job_dir / "output.png").exists()

    def test_manifest_error_writes_failure_file(self, job_dir):
        path = job_dir / "manifest.json"
        path.write_text(json.dumps({"job_id": "x"}))
        ok, _ = serve_manifest_file(path, FakeDiffusionProvider())
        assert not ok
        failure = json.loads((job_dir / "failure.json").read_text())
        assert failure["kind"] == "manifest"

    def test_missing_conditioning_inputs_fail(self, job_dir):
        doc = manifest_doc(job_dir, mask_path=str(job_dir / "nope.png"))
        path = write_manifest(job_dir, doc)
        ok, detail = serve_manifest_file(path, FakeDiffusionProvider())
        assert not ok and "nope.png" in detail


class TestControlImage:
    def test_mask_becomes_three_channel_binary(self, job_dir):
        control = mask_to_control_image(Image.open(job_dir / "mask_512.png"))
        arr = np.asarray(control)
        assert arr.shape == (512, 512, 3)
        assert set(np.unique(arr)) <= {0, 255}

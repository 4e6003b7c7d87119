import pytest

from burnbench_backend.manifest import ManifestError, load_job, parse_job

from backend_helpers import manifest_doc, write_manifest


class TestParseJob:
    def test_inpaint_manifest_parses(self, job_dir):
        job = parse_job(manifest_doc(job_dir))
        assert job.pipeline == "Inpaint"
        assert job.before_path is not None
        assert job.params.steps == 35
        assert job.params.scheduler == "UniPC"

    def test_base_manifest_has_no_before(self, job_dir):
        job = parse_job(manifest_doc(job_dir, pipeline="Base"))
        assert job.before_path is None

    def test_missing_fields_listed(self, job_dir):
        doc = manifest_doc(job_dir)
        del doc["prompt"], doc["output_path"]
        with pytest.raises(ManifestError, match="prompt"):
            parse_job(doc)

    def test_unknown_pipeline_rejected(self, job_dir):
        with pytest.raises(ManifestError, match="pipeline"):
            parse_job(manifest_doc(job_dir, pipeline="Img2Img"))

    def test_inpaint_requires_before_path(self, job_dir):
        doc = manifest_doc(job_dir)
        del doc["before_path"]
        with pytest.raises(ManifestError, match="before_path"):
            parse_job(doc)

    def test_base_rejects_before_path(self, job_dir):
        doc = manifest_doc(job_dir, pipeline="Base")
        doc["before_path"] = str(job_dir / "before_512.png")
        with pytest.raises(ManifestError, match="before_path"):
            parse_job(doc)

    def test_bad_params_rejected(self, job_dir):
        doc = manifest_doc(job_dir)
        doc["params"] = {"steps": "many"}
        with pytest.raises(ManifestError, match="params"):
            parse_job(doc)

    def test_relative_paths_resolve_against_manifest_dir(self, job_dir):
        doc = manifest_doc(job_dir, mask_path="mask_512.png",
                           before_path="before_512.png", output_path="output.png")
        path = write_manifest(job_dir, doc)
        job = load_job(path)
        assert job.mask_path == job_dir / "mask_512.png"
        assert job.output_path == job_dir / "output.png"

    def test_invalid_json_file(self, job_dir):
        bad = job_dir / "manifest.json"
        bad.write_text("{not json")
        with pytest.raises(ManifestError, match="JSON"):
            load_job(bad)

"""Reference generation backend for the burnbench job-manifest contract."""

from .capabilities import BackendCapabilities, CapabilityError
from .manifest import Job, ManifestError, SamplingParams, load_job, parse_job
from .pipelines import DiffusersProvider, WeightLoadError, WeightsConfig
from .service import JobFailed, run_job, serve_manifest_file
from .vlm import VlmUnavailable, serve_vlm_request

__version__ = "0.1.0"

__all__ = [
    "BackendCapabilities",
    "CapabilityError",
    "DiffusersProvider",
    "Job",
    "JobFailed",
    "ManifestError",
    "SamplingParams",
    "VlmUnavailable",
    "WeightLoadError",
    "WeightsConfig",
    "load_job",
    "parse_job",
    "run_job",
    "serve_manifest_file",
    "serve_vlm_request",
]

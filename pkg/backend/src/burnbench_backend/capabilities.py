"""What this backend can serve; jobs outside the envelope fail cleanly."""

from __future__ import annotations

from dataclasses import dataclass

from .manifest import Job


class CapabilityError(Exception):
    """The job asks for something this backend cannot do."""


@dataclass(frozen=True)
class BackendCapabilities:
    pipelines: tuple[str, ...] = ("Base", "Inpaint")
    max_resolution: int = 1024
    schedulers: tuple[str, ...] = ("UniPC",)

    def check(self, job: Job) -> None:
        if job.pipeline not in self.pipelines:
            raise CapabilityError(f"pipeline {job.pipeline!r} not supported")
        if job.params.scheduler not in self.schedulers:
            raise CapabilityError(
                f"scheduler {job.params.scheduler!r} not available "
                f"(have {list(self.schedulers)})"
            )
        if max(job.params.width, job.params.height) > self.max_resolution:
            raise CapabilityError(
                f"requested {job.params.width}x{job.params.height} exceeds "
                f"max resolution {self.max_resolution}"
            )

"""Diffusion pipeline adapters.

A provider exposes two methods returning PIL images at the requested size:

    generate_base(job, mask_image) -> Image        # full tile from mask control
    generate_inpaint(job, mask_image, before_image) -> Image

DiffusersProvider wraps the pretrained Stable Diffusion ControlNet and
ControlNet-Inpaint pipelines; imports happen lazily so the package works
(manifest validation, failure handling, serving plumbing) without torch or
diffusers installed. Anything implementing the two methods can stand in,
which is how the test suite runs without weights.
"""

from __future__ import annotations

from dataclasses import dataclass

from PIL import Image

from .manifest import Job


class WeightLoadError(Exception):
    """Pipelines or weights could not be loaded."""


@dataclass(frozen=True)
class WeightsConfig:
    """Model identifiers; the exact checkpoint revision in use is recorded
    in job metadata at generation time."""

    base_model: str = "runwayml/stable-diffusion-v1-5"
    controlnet_model: str = "jaychempan/EarthSynth"
    device: str = "cuda"
    dtype: str = "float16"


def mask_to_control_image(mask_image: Image.Image) -> Image.Image:
    """Binary mask rendered as the 3-channel control image."""
    return mask_image.convert("L").point(lambda v: 255 if v >= 128 else 0).convert("RGB")


class DiffusersProvider:
    """Adapter over pretrained diffusers pipelines; no training code."""

    def __init__(self, weights: WeightsConfig | None = None):
        self.weights = weights or WeightsConfig()
        self._base = None
        self._inpaint = None

    def _torch(self):
        try:
            import torch
        except ImportError as exc:
            raise WeightLoadError(f"torch is not installed: {exc}") from exc
        return torch

    def _dtype(self, torch):
        return getattr(torch, self.weights.dtype)

    def _load_controlnet(self):
        try:
            from diffusers import ControlNetModel
        except ImportError as exc:
            raise WeightLoadError(f"diffusers is not installed: {exc}") from exc
        torch = self._torch()
        try:
            return ControlNetModel.from_pretrained(
                self.weights.controlnet_model, torch_dtype=self._dtype(torch)
            )
        except Exception as exc:
            raise WeightLoadError(
                f"could not load controlnet {self.weights.controlnet_model!r}: {exc}"
            ) from exc

    def _finalize(self, pipe):
        from diffusers import UniPCMultistepScheduler

        pipe.scheduler = UniPCMultistepScheduler.from_config(pipe.scheduler.config)
        pipe = pipe.to(self.weights.device)
        pipe.set_progress_bar_config(disable=True)
        return pipe

    def _base_pipeline(self):
        if self._base is None:
            try:
                from diffusers import StableDiffusionControlNetPipeline
            except ImportError as exc:
                raise WeightLoadError(f"diffusers is not installed: {exc}") from exc
            torch = self._torch()
            try:
                pipe = StableDiffusionControlNetPipeline.from_pretrained(
                    self.weights.base_model,
                    controlnet=self._load_controlnet(),
                    torch_dtype=self._dtype(torch),
                    safety_checker=None,
                )
            except WeightLoadError:
                raise
            except Exception as exc:
                raise WeightLoadError(
                    f"could not load {self.weights.base_model!r}: {exc}"
                ) from exc
            self._base = self._finalize(pipe)
        return self._base

    def _inpaint_pipeline(self):
        if self._inpaint is None:
            try:
                from diffusers import StableDiffusionControlNetInpaintPipeline
            except ImportError as exc:
                raise WeightLoadError(f"diffusers is not installed: {exc}") from exc
            torch = self._torch()
            try:
                pipe = StableDiffusionControlNetInpaintPipeline.from_pretrained(
                    self.weights.base_model,
                    controlnet=self._load_controlnet(),
                    torch_dtype=self._dtype(torch),
                    safety_checker=None,
                )
            except WeightLoadError:
                raise
            except Exception as exc:
                raise WeightLoadError(
                    f"could not load {self.weights.base_model!r}: {exc}"
                ) from exc
            self._inpaint = self._finalize(pipe)
        return self._inpaint

    def _generator(self, seed: int):
        torch = self._torch()
        return torch.Generator(device=self.weights.device).manual_seed(seed)

    def generate_base(self, job: Job, mask_image: Image.Image) -> Image.Image:
        pipe = self._base_pipeline()
        result = pipe(
            prompt=job.prompt,
            negative_prompt=job.negative_prompt,
            image=mask_to_control_image(mask_image),
            num_inference_steps=job.params.steps,
            guidance_scale=job.params.guidance_scale,
            width=job.params.width,
            height=job.params.height,
            generator=self._generator(job.params.seed),
        )
        return result.images[0]

    def generate_inpaint(self, job: Job, mask_image: Image.Image,
                         before_image: Image.Image) -> Image.Image:
        pipe = self._inpaint_pipeline()
        result = pipe(
            prompt=job.prompt,
            negative_prompt=job.negative_prompt,
            image=before_image.convert("RGB"),
            mask_image=mask_image.convert("L"),
            control_image=mask_to_control_image(mask_image),
            num_inference_steps=job.params.steps,
            guidance_scale=job.params.guidance_scale,
            width=job.params.width,
            height=job.params.height,
            generator=self._generator(job.params.seed),
        )
        return result.images[0]

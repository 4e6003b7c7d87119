"""Optional VLM serving: run a prompt-generation request document.

The request document (JSON) carries an instruction, three panel image
references in before/mask/after order, and a response schema. This module
assembles the composite panel, runs a vision-language model when one is
available, and writes the raw text response; response validation stays
with the orchestrator."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from PIL import Image


class VlmUnavailable(Exception):
    """The VLM feature is disabled (weights or deps missing)."""


@dataclass(frozen=True)
class VlmConfig:
    model: str = "Qwen/Qwen2-VL-2B-Instruct"
    device: str = "cuda"
    max_new_tokens: int = 120


def load_request(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    for key in ("instruction", "panels"):
        if key not in doc:
            raise ValueError(f"request document missing {key!r}")
    roles = [p.get("role") for p in doc["panels"]]
    if roles != ["before", "mask", "after"]:
        raise ValueError(f"panels must be before/mask/after in order, got {roles}")
    return doc


def compose_panel(doc: dict, base_dir: Path) -> Image.Image:
    """Horizontal [before | mask | after] strip at a common height."""
    images = []
    for panel in doc["panels"]:
        path = Path(panel["path"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise FileNotFoundError(f"panel image missing: {path}")
        images.append(Image.open(path).convert("RGB"))
    height = min(img.height for img in images)
    resized = [
        img.resize((round(img.width * height / img.height), height))
        for img in images
    ]
    strip = Image.new("RGB", (sum(img.width for img in resized), height))
    x = 0
    for img in resized:
        strip.paste(img, (x, 0))
        x += img.width
    return strip


class QwenVlProvider:
    """Thin wrapper around a remote-sensing-adapted Qwen2-VL checkpoint."""

    def __init__(self, config: VlmConfig | None = None):
        self.config = config or VlmConfig()
        self._model = None
        self._processor = None

    def _load(self):
        if self._model is not None:
            return
        try:
            import torch
            from transformers import AutoProcessor, Qwen2VLForConditionalGeneration
        except ImportError as exc:
            raise VlmUnavailable(f"VLM dependencies not installed: {exc}") from exc
        try:
            self._model = Qwen2VLForConditionalGeneration.from_pretrained(
                self.config.model, torch_dtype=torch.float16
            ).to(self.config.device)
            self._processor = AutoProcessor.from_pretrained(self.config.model)
        except Exception as exc:
            raise VlmUnavailable(f"could not load {self.config.model!r}: {exc}") from exc

    def describe(self, instruction: str, panel: Image.Image) -> str:
        self._load()
        messages = [{
            "role": "user",
            "content": [{"type": "image"}, {"type": "text", "text": instruction}],
        }]
        prompt = self._processor.apply_chat_template(
            messages, tokenize=False, add_generation_prompt=True
        )
        inputs = self._processor(
            text=[prompt], images=[panel], return_tensors="pt"
        ).to(self.config.device)
        generated = self._model.generate(
            **inputs, max_new_tokens=self.config.max_new_tokens, do_sample=False
        )
        trimmed = generated[:, inputs["input_ids"].shape[1]:]
        return self._processor.batch_decode(trimmed, skip_special_tokens=True)[0]


def serve_vlm_request(
    request_path: str | Path,
    response_path: str | Path,
    provider=None,
) -> Path:
    """Run one request; writes the raw response text for downstream
    validation. Raises VlmUnavailable when the feature is disabled."""
    request_path = Path(request_path)
    doc = load_request(request_path)
    panel = compose_panel(doc, request_path.parent)
    provider = provider or QwenVlProvider()
    raw = provider.describe(doc["instruction"], panel)
    response_path = Path(response_path)
    response_path.parent.mkdir(parents=True, exist_ok=True)
    response_path.write_text(raw)
    return response_path

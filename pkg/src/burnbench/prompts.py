"""Prompt construction, VLM request/response handling, token budgets.

The three hand-crafted positive prompts and the shared negative prompt are
fixed strings; the data-contextual prompt is instantiated from palette
statistics through a fixed color-descriptor table. VLM inference itself is
external: this module only builds request documents and validates raw
responses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import bpe
from .core import BurnbenchError, PaletteStats, SampleRecord

DEFAULT_TOKEN_BUDGET = 75  # 77-token encoder limit minus 2 sentinel slots
VLM_BODY_BUDGET = 50

PROMPT_P1 = (
    "satellite RGB image, wildfire burn scar, charred forest, aerial nadir view, "
    "no clouds, sharp"
)

PROMPT_P2 = (
    "optical satellite RGB image, nadir view, wildfire aftermath, burned area shows "
    "dark brown charcoal and ash tones, surrounding intact green forest canopy "
    "unchanged, Sentinel-2-like, sharp detail, no clouds, no smoke"
)

PROMPT_P3_TEMPLATE = (
    "optical satellite RGB image, nadir view, wildfire burn scar aftermath, "
    "burned region: {burned_descriptor}, ash deposits, charcoal texture, "
    "intact region: {intact_descriptor}, forest canopy unchanged, "
    "Sentinel-2-like, sharp detail, no clouds, no smoke"
)

NEGATIVE_PROMPT = (
    "ground level view, eye level, forest interior, tree trunks, clouds, smoke, "
    "flames, buildings, cartoon, blurry, watermark, low resolution, artifacts, "
    "perspective distortion"
)

VLM_PREFIX = "optical satellite RGB image, nadir view, Sentinel-2-like"

VLM_REQUIRED_NEGATIVE_PHRASES = (
    "ground level view",
    "eye level",
    "forest interior",
    "tree trunks",
    "perspective distortion",
    "clouds",
    "smoke",
    "flames",
    "cartoon",
    "blurry",
)

VLM_INSTRUCTION = (
    "These satellite images are viewed from directly above (nadir view), like "
    "Google Maps satellite mode. Each row shows: "
    "[BEFORE fire | MASK of burned area | REAL AFTER fire]. "
    "The MASK shows where vegetation burned. REAL AFTER shows what the burned "
    "scar looks like from above - TOP-DOWN satellite view, NOT a photo from "
    "inside a forest.\n\n"
    "Your task: describe ONLY what the burned region looks like in the AFTER "
    "image. Focus on: burn scar color (dark brown/black/charcoal), ash tone, "
    "texture, and contrast with surrounding forest.\n\n"
    "IMPORTANT RULES: Do NOT mention trees from ground level, forest interiors, "
    "or trunks. Do NOT use words like 'lush', 'towering', or 'canopy from "
    "below'. Keep answer under 40 words. Output will be used inside a Stable "
    "Diffusion prompt starting with 'optical satellite RGB image, nadir view, "
    "Sentinel-2-like'.\n\n"
    'Return ONLY valid JSON: {"prompt_body": "...", "neg_prompt": "..."}\n'
    "neg_prompt must include: ground level view, eye level, forest interior, "
    "tree trunks, perspective distortion, clouds, smoke, flames, cartoon, blurry"
)


class PromptBudgetError(BurnbenchError):
    """A prompt exceeds its token budget."""

    def __init__(self, text: str, token_count: int, budget: int):
        super().__init__(
            f"prompt is {token_count} tokens, budget is {budget} "
            f"({token_count - budget} over): {text[:80]}..."
        )
        self.token_count = token_count
        self.budget = budget


class VlmResponseError(BurnbenchError):
    """A raw VLM response failed parsing or validation."""


@dataclass(frozen=True)
class PromptBundle:
    """A positive/negative prompt pair with its content-token count."""

    positive: str
    negative: str
    source: str
    token_count: int


@dataclass(frozen=True)
class ColorDescriptor:
    name: str
    rgb_anchor: tuple[float, float, float]


@lru_cache(maxsize=None)
def _descriptor_table_doc(path: str) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _table_doc() -> dict:
    return _descriptor_table_doc(str(bpe.assets_dir() / "color_descriptors.json"))


def descriptor_table() -> tuple[ColorDescriptor, ...]:
    return tuple(
        ColorDescriptor(name=e["name"], rgb_anchor=tuple(float(v) for v in e["rgb"]))
        for e in _table_doc()["entries"]
    )


def descriptor_table_version() -> int:
    return int(_table_doc()["version"])


def describe_color(rgb) -> ColorDescriptor:
    """Nearest descriptor anchor by Euclidean distance; ties break toward the
    earlier table entry, so the lookup is total and deterministic."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.shape != (3,) or rgb.min() < 0 or rgb.max() > 255:
        raise ValueError(f"rgb must be 3 components in [0, 255], got {rgb}")
    best: ColorDescriptor | None = None
    best_dist = float("inf")
    for entry in descriptor_table():
        dist = float(np.sum((rgb - np.asarray(entry.rgb_anchor)) ** 2))
        if dist < best_dist:
            best, best_dist = entry, dist
    return best


def _bundle(positive: str, source: str, vocab: bpe.BpeVocabulary | None) -> PromptBundle:
    vocab = vocab or bpe.default_vocabulary()
    return PromptBundle(
        positive=positive,
        negative=NEGATIVE_PROMPT,
        source=source,
        token_count=bpe.count_tokens(positive, vocab),
    )


def build_prompt(
    source: str,
    palette: PaletteStats | None = None,
    vocab: bpe.BpeVocabulary | None = None,
    budget: int = DEFAULT_TOKEN_BUDGET,
) -> PromptBundle:
    """Build one of the hand-crafted prompt bundles.

    P3 requires palette statistics: the burned/intact mean colors are
    converted to descriptor names and substituted into the template. A
    bundle over the token budget is an error, never a truncation.
    """
    if source == "P1":
        bundle = _bundle(PROMPT_P1, "P1", vocab)
    elif source == "P2":
        bundle = _bundle(PROMPT_P2, "P2", vocab)
    elif source == "P3":
        if palette is None:
            raise ValueError("P3 requires palette statistics")
        burned = describe_color(palette.burned.mean)
        intact = describe_color(palette.intact.mean)
        text = PROMPT_P3_TEMPLATE.format(
            burned_descriptor=burned.name, intact_descriptor=intact.name
        )
        bundle = _bundle(text, "P3", vocab)
    else:
        raise ValueError(f"hand-crafted prompt source must be P1/P2/P3, got {source!r}")
    if bundle.token_count > budget:
        raise PromptBudgetError(bundle.positive, bundle.token_count, budget)
    return bundle


VLM_RESPONSE_SCHEMA = {
    "type": "object",
    "properties": {
        "prompt_body": {"type": "string"},
        "neg_prompt": {"type": "string"},
    },
    "required": ["prompt_body", "neg_prompt"],
}


def build_vlm_request(sample: SampleRecord, panel_paths: dict[str, str] | None = None) -> dict:
    """Request document for one sample: instruction, three panels in order
    before, mask, after, and the expected JSON response schema.

    Panel assembly into a single rasterized image is left to the serving
    backend; the document references the three source images separately.
    """
    if sample.after is None:
        raise ValueError(
            f"{sample.sample_id}: VLM request needs the real after image"
        )
    paths = panel_paths or {}
    panels = [
        {"role": "before", "path": paths.get("before", f"{sample.sample_id}/before.png")},
        {"role": "mask", "path": paths.get("mask", f"{sample.sample_id}/mask.png")},
        {"role": "after", "path": paths.get("after", f"{sample.sample_id}/after.png")},
    ]
    return {
        "sample_id": sample.sample_id,
        "instruction": VLM_INSTRUCTION,
        "panels": panels,
        "response_schema": VLM_RESPONSE_SCHEMA,
    }


def _strip_code_fence(raw: str) -> str:
    text = raw.strip()
    if text.startswith("```"):
        lines = text.splitlines()
        if lines[0].startswith("```"):
            lines = lines[1:]
        if lines and lines[-1].strip() == "```":
            lines = lines[:-1]
        text = "\n".join(lines).strip()
    return text


def validate_vlm_response(
    raw: str,
    vocab: bpe.BpeVocabulary | None = None,
    body_budget: int = VLM_BODY_BUDGET,
) -> PromptBundle:
    """Parse and validate a raw VLM response into a prompt bundle.

    The body must parse as JSON with prompt_body/neg_prompt, stay within the
    body token budget before prefixing, and the negative prompt must contain
    every mandated phrase.
    """
    vocab = vocab or bpe.default_vocabulary()
    try:
        doc = json.loads(_strip_code_fence(raw))
    except json.JSONDecodeError as exc:
        raise VlmResponseError(f"response is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise VlmResponseError(f"response must be a JSON object, got {type(doc).__name__}")
    for key in ("prompt_body", "neg_prompt"):
        if key not in doc or not isinstance(doc[key], str):
            raise VlmResponseError(f"response is missing string field {key!r}")

    body = doc["prompt_body"].strip()
    neg = doc["neg_prompt"].strip()
    body_tokens = bpe.count_tokens(body, vocab)
    if body_tokens > body_budget:
        raise PromptBudgetError(body, body_tokens, body_budget)
    for phrase in VLM_REQUIRED_NEGATIVE_PHRASES:
        if phrase not in neg:
            raise VlmResponseError(f"neg_prompt is missing mandated phrase {phrase!r}")

    positive = f"{VLM_PREFIX}, {body}"
    return PromptBundle(
        positive=positive,
        negative=neg,
        source="VLM",
        token_count=bpe.count_tokens(positive, vocab),
    )

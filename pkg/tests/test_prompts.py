import hashlib
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from burnbench.core import PaletteStats, RegionStats
from burnbench.prompts import (
    NEGATIVE_PROMPT,
    PROMPT_P1,
    PROMPT_P2,
    PromptBudgetError,
    VLM_PREFIX,
    VLM_REQUIRED_NEGATIVE_PHRASES,
    VlmResponseError,
    build_prompt,
    build_vlm_request,
    describe_color,
    descriptor_table,
    validate_vlm_response,
)

from burnbench.core import BurnMask

from helpers import make_sample, tile_from_gray

# byte-identity pins for the fixed prompt strings
GOLDEN_SHA256 = {
    "P1": "f699262a27dc18ece116a2a113ae82e647cda22c6253710b6407458a0f406250",
    "P2": "9f0b48f763c9507b0c50a9fea9ed0cc8acc9f06aefa35fe3f35c7b3c526be708",
    "negative": "a760643b09865b5485ac53ff36730c307ffc7743ad8331c12cb2f8be28ec2768",
    "vlm_prefix": "69dd7837e8b3ab1035c9dda823b3b0b0eedb794f5638505d4714bcd956686b9c",
}

# content-token count of P2 under the bundled vocabulary, frozen at first
# computation
P2_TOKEN_COUNT = 42


def sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def palette_from_means(burned_mean, intact_mean):
    return PaletteStats(
        burned=RegionStats(mean=np.asarray(burned_mean, float),
                           std=np.full(3, 5.0), pixel_count=10),
        intact=RegionStats(mean=np.asarray(intact_mean, float),
                           std=np.full(3, 5.0), pixel_count=10),
        source_sample_ids=("p0",),
    )


class TestFixedPrompts:
    def test_p1_byte_identity(self):
        assert PROMPT_P1 == (
            "satellite RGB image, wildfire burn scar, charred forest, "
            "aerial nadir view, no clouds, sharp"
        )
        assert sha(PROMPT_P1) == GOLDEN_SHA256["P1"]

    def test_p2_byte_identity(self):
        assert PROMPT_P2 == (
            "optical satellite RGB image, nadir view, wildfire aftermath, "
            "burned area shows dark brown charcoal and ash tones, surrounding "
            "intact green forest canopy unchanged, Sentinel-2-like, sharp "
            "detail, no clouds, no smoke"
        )
        assert sha(PROMPT_P2) == GOLDEN_SHA256["P2"]

    def test_negative_byte_identity(self):
        assert NEGATIVE_PROMPT == (
            "ground level view, eye level, forest interior, tree trunks, "
            "clouds, smoke, flames, buildings, cartoon, blurry, watermark, "
            "low resolution, artifacts, perspective distortion"
        )
        assert sha(NEGATIVE_PROMPT) == GOLDEN_SHA256["negative"]

    def test_vlm_prefix_byte_identity(self):
        assert VLM_PREFIX == "optical satellite RGB image, nadir view, Sentinel-2-like"
        assert sha(VLM_PREFIX) == GOLDEN_SHA256["vlm_prefix"]

    def test_p2_token_count_fixture(self):
        bundle = build_prompt("P2")
        assert bundle.token_count == P2_TOKEN_COUNT
        assert bundle.token_count <= 75


class TestBuildPrompt:
    def test_p1_p2_bundles(self):
        for source, text in (("P1", PROMPT_P1), ("P2", PROMPT_P2)):
            bundle = build_prompt(source)
            assert bundle.positive == text
            assert bundle.negative == NEGATIVE_PROMPT
            assert bundle.source == source
            assert bundle.token_count <= 75

    def test_p3_descriptor_instantiation(self):
        palette = palette_from_means([45, 35, 30], [60, 90, 50])
        bundle = build_prompt("P3", palette=palette)
        assert "burned region: dark charcoal brown" in bundle.positive
        assert "intact region: muted forest green" in bundle.positive
        assert bundle.positive.startswith("optical satellite RGB image, nadir view")
        assert bundle.negative == NEGATIVE_PROMPT
        assert bundle.token_count <= 75

    def test_p3_requires_palette(self):
        with pytest.raises(ValueError):
            build_prompt("P3")

    def test_budget_overflow_errors(self):
        palette = palette_from_means([45, 35, 30], [60, 90, 50])
        with pytest.raises(PromptBudgetError) as err:
            build_prompt("P3", palette=palette, budget=10)
        assert err.value.budget == 10
        assert err.value.token_count > 10

    def test_unknown_source(self):
        with pytest.raises(ValueError):
            build_prompt("P4")


class TestDescribeColor:
    def test_origin_anchor(self):
        assert describe_color((0, 0, 0)).name == "near-black charcoal"

    def test_brightest_anchor(self):
        brightest = max(descriptor_table(), key=lambda d: sum(d.rgb_anchor))
        assert describe_color((255, 255, 255)).name == brightest.name

    def test_tie_breaks_to_earlier_entry(self):
        table = descriptor_table()
        a, b = table[0], table[1]
        midpoint = tuple((x + y) / 2 for x, y in zip(a.rgb_anchor, b.rgb_anchor))
        assert describe_color(midpoint).name == a.name

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            describe_color((300, 0, 0))

    @given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
    @settings(max_examples=150)
    def test_total_and_deterministic(self, r, g, b):
        first = describe_color((r, g, b))
        second = describe_color((r, g, b))
        assert first == second
        assert any(first.name == d.name for d in descriptor_table())


class TestAssetsOverride:
    def test_env_var_points_at_alternate_assets(self, tmp_path, monkeypatch):
        import shutil

        from burnbench import bpe as bpe_module

        assets = tmp_path / "assets"
        shutil.copytree(bpe_module.assets_dir(), assets)
        doc = json.loads((assets / "color_descriptors.json").read_text())
        doc["entries"][0]["name"] = "void black"
        (assets / "color_descriptors.json").write_text(json.dumps(doc))
        monkeypatch.setenv("BURNBENCH_ASSETS", str(assets))
        assert describe_color((0, 0, 0)).name == "void black"

    def test_permuted_table_preserves_non_tied_lookups(self, tmp_path, monkeypatch):
        import shutil

        from burnbench import bpe as bpe_module

        probes = [(0, 0, 0), (45, 35, 30), (60, 90, 50), (255, 255, 255),
                  (120, 118, 121), (33, 47, 68)]
        original = [describe_color(p).name for p in probes]

        assets = tmp_path / "assets"
        shutil.copytree(bpe_module.assets_dir(), assets)
        doc = json.loads((assets / "color_descriptors.json").read_text())
        doc["entries"] = doc["entries"][::-1]
        (assets / "color_descriptors.json").write_text(json.dumps(doc))
        monkeypatch.setenv("BURNBENCH_ASSETS", str(assets))
        assert [describe_color(p).name for p in probes] == original


def _full_sample():
    mask = BurnMask(np.array([[1, 0], [0, 0]]))
    tile = tile_from_gray([[100.0, 100.0], [100.0, 100.0]])
    return make_sample("S02", tile, mask, tile)


class TestBuildVlmRequest:
    def test_contains_instruction_markers(self):
        request = build_vlm_request(_full_sample())
        assert "Return ONLY valid JSON" in request["instruction"]
        assert "nadir view" in request["instruction"]

    def test_three_panels_in_order(self):
        request = build_vlm_request(_full_sample())
        assert [p["role"] for p in request["panels"]] == ["before", "mask", "after"]

    def test_response_schema_fields(self):
        request = build_vlm_request(_full_sample())
        assert set(request["response_schema"]["required"]) == {"prompt_body", "neg_prompt"}

    def test_missing_after_rejected(self):
        sample = _full_sample()
        bare = make_sample("S02", sample.before, sample.mask, None)
        with pytest.raises(ValueError, match="after"):
            build_vlm_request(bare)


VALID_RESPONSE = json.dumps(
    {
        "prompt_body": "dark charcoal burn scar with gray ash, sharp contrast "
                       "against green forest",
        "neg_prompt": "ground level view, eye level, forest interior, tree trunks, "
                      "perspective distortion, clouds, smoke, flames, cartoon, blurry",
    }
)


class TestValidateVlmResponse:
    def test_valid_response_prefixed(self):
        bundle = validate_vlm_response(VALID_RESPONSE)
        assert bundle.positive.startswith(
            "optical satellite RGB image, nadir view, Sentinel-2-like, dark charcoal"
        )
        assert bundle.source == "VLM"

    def test_not_json(self):
        with pytest.raises(VlmResponseError, match="JSON"):
            validate_vlm_response("not json")

    def test_missing_phrase_named(self):
        doc = json.loads(VALID_RESPONSE)
        doc["neg_prompt"] = doc["neg_prompt"].replace("tree trunks, ", "")
        with pytest.raises(VlmResponseError, match="tree trunks"):
            validate_vlm_response(json.dumps(doc))

    def test_over_budget_body(self):
        doc = json.loads(VALID_RESPONSE)
        doc["prompt_body"] = " ".join(f"word{i}" for i in range(80))
        with pytest.raises(PromptBudgetError):
            validate_vlm_response(json.dumps(doc))

    def test_missing_field(self):
        with pytest.raises(VlmResponseError, match="neg_prompt"):
            validate_vlm_response(json.dumps({"prompt_body": "x"}))

    def test_code_fenced_json_accepted(self):
        fenced = f"```json\n{VALID_RESPONSE}\n```"
        assert validate_vlm_response(fenced).source == "VLM"

    def test_body_budget_is_fifty(self):
        body_49 = " ".join(["ash"] * 50)  # 50 one-token words
        doc = {"prompt_body": body_49,
               "neg_prompt": ", ".join(VLM_REQUIRED_NEGATIVE_PHRASES)}
        bundle = validate_vlm_response(json.dumps(doc))
        assert bundle.positive.endswith(body_49)
        doc["prompt_body"] = " ".join(["ash"] * 51)
        with pytest.raises(PromptBudgetError):
            validate_vlm_response(json.dumps(doc))

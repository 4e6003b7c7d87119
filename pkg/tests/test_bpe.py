import string

import pytest
from hypothesis import given, settings, strategies as st

from burnbench import bpe
from burnbench.bpe import (
    VocabularyFormatError,
    count_tokens,
    decode,
    default_vocabulary,
    encode,
    load_vocabulary,
)


@pytest.fixture
def toy_vocab(tmp_path):
    merges = tmp_path / "merges.txt"
    merges.write_text("#version: test\nl o\nlo w\nlo w</w>\n")
    return load_vocabulary(merges)


class TestLoadVocabulary:
    def test_toy_file_ranks(self, tmp_path):
        merges = tmp_path / "merges.txt"
        merges.write_text("a b\nab c\nabc d</w>\nx y\n")
        vocab = load_vocabulary(merges)
        assert len(vocab.merges) == 4
        assert [vocab.ranks[m] for m in vocab.merges] == [0, 1, 2, 3]

    def test_header_skipped(self, tmp_path):
        merges = tmp_path / "merges.txt"
        merges.write_text("#version: 0.2\na b\n")
        vocab = load_vocabulary(merges)
        assert vocab.merges == (("a", "b"),)

    def test_three_fields_is_parse_error(self, tmp_path):
        merges = tmp_path / "merges.txt"
        merges.write_text("a b\nx y z\n")
        with pytest.raises(VocabularyFormatError, match=":2"):
            load_vocabulary(merges)

    def test_merge_outputs_in_table(self, toy_vocab):
        for a, b in toy_vocab.merges:
            assert a + b in toy_vocab.token_table


class TestEncode:
    def test_empty_string(self, toy_vocab):
        assert encode("", toy_vocab) == []
        assert count_tokens("", toy_vocab) == 0

    def test_low_low_merges_to_single_token_twice(self, toy_vocab):
        ids = encode("low low", toy_vocab)
        assert len(ids) == 2
        assert ids[0] == ids[1]
        assert ids[0] == toy_vocab.token_table["low</w>"]

    def test_low_lower_partial_merge(self, toy_vocab):
        ids = encode("low lower", toy_vocab)
        # "low" -> [low</w>]; "lower" -> lo+w merge then e, r</w> remain
        assert ids[0] == toy_vocab.token_table["low</w>"]
        rest = ids[1:]
        assert rest[0] == toy_vocab.token_table["low"]
        assert len(rest) == 3  # low, e, r</w>

    def test_lowercases(self, toy_vocab):
        assert encode("LOW", toy_vocab) == encode("low", toy_vocab)

    def test_single_symbol_word(self, tmp_path):
        merges = tmp_path / "merges.txt"
        merges.write_text("c a\nca t</w>\n")
        vocab = load_vocabulary(merges)
        assert count_tokens("cat", vocab) == 1

    def test_unknown_characters_fall_back_to_bytes(self, toy_vocab):
        ids = encode("løw", toy_vocab)  # ø is not in the table
        assert ids
        assert decode(ids, toy_vocab) == "løw"


class TestBundledVocabulary:
    def test_loads_and_counts(self):
        vocab = default_vocabulary()
        assert count_tokens("burned area", vocab) == 2

    def test_punctuation_isolated(self):
        vocab = default_vocabulary()
        with_comma = count_tokens("no clouds, no smoke", vocab)
        without = count_tokens("no clouds no smoke", vocab)
        assert with_comma == without + 1

    @given(st.text(alphabet=string.printable, max_size=120))
    @settings(max_examples=200)
    def test_deterministic(self, text):
        vocab = default_vocabulary()
        assert encode(text, vocab) == encode(text, vocab)

    @given(
        st.text(alphabet=string.ascii_letters + string.digits + " ", max_size=60),
        st.text(alphabet=string.ascii_letters + string.digits + " ", max_size=60),
    )
    @settings(max_examples=150)
    def test_word_boundary_subadditivity(self, a, b):
        vocab = default_vocabulary()
        joined = count_tokens(a + " " + b, vocab)
        assert joined <= count_tokens(a, vocab) + count_tokens(b, vocab) + 1

    @given(st.text(alphabet=string.ascii_lowercase + string.digits + " ", max_size=80))
    @settings(max_examples=150)
    def test_word_text_round_trip(self, text):
        vocab = default_vocabulary()
        normalized = " ".join(text.lower().split())
        assert decode(encode(text, vocab), vocab) == normalized

    def test_punctuation_reattaches_on_decode(self):
        vocab = default_vocabulary()
        assert decode(encode("no clouds, no smoke", vocab), vocab) == "no clouds, no smoke"


@pytest.mark.skipif(bpe.clip_vocabulary() is None,
                    reason="real CLIP merges not installed")
class TestRealClipVocabulary:
    def test_prompt_budgets_hold(self):
        from burnbench.prompts import NEGATIVE_PROMPT, PROMPT_P1, PROMPT_P2

        vocab = bpe.clip_vocabulary()
        for text in (PROMPT_P1, PROMPT_P2, NEGATIVE_PROMPT):
            assert count_tokens(text, vocab) <= 75

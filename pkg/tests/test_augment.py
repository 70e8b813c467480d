"""Tokenization contract and augmented group construction."""

import random

import pytest
import torch

from zsrte.augment import all_candidates, build_group, build_group_from_words, sample_candidates
from zsrte.corpus import Instance, RelationLabel, Triplet
from zsrte.errors import ConfigError
from zsrte.tokenization import HashTokenizer

LABELS = [
    RelationLabel(0, "country of citizenship"),
    RelationLabel(1, "member of political party"),
    RelationLabel(2, "position held"),
    RelationLabel(3, "works for company"),
    RelationLabel(4, "born in city"),
]

RICHARD = Instance(
    id="richard",
    words=("Richard", "is", "a", "Democratic", "politician", "in", "the",
           "United", "States", "."),
    triplets=(
        Triplet((0, 0), (3, 4), LABELS[1]),
        Triplet((0, 0), (6, 8), LABELS[0]),
    ),
)


@pytest.fixture
def tok():
    return HashTokenizer(vocab_size=4096, piece_chars=4)


class TestHashTokenizer:
    def test_deterministic(self, tok):
        assert tok.word_ids("Democratic") == tok.word_ids("Democratic")
        assert tok.word_ids("Democratic") == HashTokenizer(4096, 4).word_ids("democratic")

    def test_multi_piece_words(self, tok):
        assert len(tok.word_ids("Democratic")) == 3  # demo|crat|ic
        assert len(tok.word_ids("is")) == 1

    def test_ids_in_range(self, tok):
        for word in ("a", "Democratic", "ührwerk", "x" * 40):
            for i in tok.word_ids(word):
                assert 3 <= i < tok.vocab_size

    def test_text_ids_concatenate_words(self, tok):
        text = "country of citizenship"
        flat = []
        for w in text.split():
            flat.extend(tok.word_ids(w))
        assert tok.text_ids(text) == flat


class TestSampleCandidates:
    def test_includes_all_golds(self):
        rng = random.Random(0)
        cands = sample_candidates(RICHARD, LABELS, 3, rng)
        assert len(cands) == 3
        texts = {c.text for c in cands}
        assert {"member of political party", "country of citizenship"} <= texts

    def test_exact_gold_count(self):
        rng = random.Random(0)
        cands = sample_candidates(RICHARD, LABELS, 2, rng)
        assert {c.text for c in cands} == RICHARD.relation_texts()

    def test_deterministic_per_seed(self):
        a = sample_candidates(RICHARD, LABELS, 4, random.Random(5))
        b = sample_candidates(RICHARD, LABELS, 4, random.Random(5))
        assert a == b

    def test_distinct_candidates(self):
        for seed in range(20):
            cands = sample_candidates(RICHARD, LABELS, 5, random.Random(seed))
            assert len({c.text for c in cands}) == 5

    def test_too_many_golds(self):
        with pytest.raises(ConfigError):
            sample_candidates(RICHARD, LABELS, 1, random.Random(0))


class TestAllCandidates:
    def test_fixed_order(self):
        shuffled = [LABELS[3], LABELS[0], LABELS[4]]
        assert all_candidates(shuffled) == [LABELS[0], LABELS[3], LABELS[4]]

    def test_sizes(self):
        assert len(all_candidates(LABELS[:1])) == 1
        assert len(all_candidates(LABELS)) == 5

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            all_candidates([])


class TestBuildGroup:
    def test_table_layout(self, tok):
        cands = [LABELS[1], LABELS[2], LABELS[0]]
        group = build_group(RICHARD, cands, tok, max_len=64)
        assert group.token_ids.shape == (3, 64)
        assert group.gold_mask.tolist() == [1.0, 0.0, 1.0]
        # every row: CLS, shared sentence, SEP, relation, SEP
        sent = group.token_ids[0, 1 : group.sentence_token_count + 1]
        for row in range(3):
            assert group.token_ids[row, 0] == tok.cls_id
            assert torch.equal(group.token_ids[row, 1 : group.sentence_token_count + 1], sent)
            assert group.token_ids[row, group.sentence_token_count + 1] == tok.sep_id

    def test_segment_ids_mark_relation_exactly(self, tok):
        group = build_group(RICHARD, [LABELS[0]], tok, max_len=64)
        rel_ids = tok.text_ids(LABELS[0].text)
        start = group.sentence_token_count + 2
        row = group.segment_ids[0]
        assert row[: start].sum() == 0
        assert row[start : start + len(rel_ids) + 1].tolist() == [1] * (len(rel_ids) + 1)
        assert row[start + len(rel_ids) + 1 :].sum() == 0

    def test_alignment_round_trip(self, tok):
        group = build_group(RICHARD, [LABELS[0]], tok, max_len=64)
        row = group.token_ids[0].tolist()
        for idx, word in enumerate(RICHARD.words):
            first, last = group.word_alignment[idx]
            assert row[first : last + 1] == tok.word_ids(word)
            assert first <= last <= group.sentence_token_count

    def test_candidate_permutation_permutes_rows(self, tok):
        cands = [LABELS[0], LABELS[1], LABELS[2]]
        g1 = build_group(RICHARD, cands, tok, 64)
        g2 = build_group(RICHARD, [cands[2], cands[0], cands[1]], tok, 64)
        perm = [2, 0, 1]
        for new_row, old_row in enumerate(perm):
            assert torch.equal(g2.token_ids[new_row], g1.token_ids[old_row])

    def test_gold_mask_count(self, tok):
        rng = random.Random(3)
        cands = sample_candidates(RICHARD, LABELS, 4, rng)
        group = build_group(RICHARD, cands, tok, 64)
        assert int(group.gold_mask.sum()) == 2

    def test_truncation_keeps_relation_text(self, tok, caplog):
        long_instance = Instance(
            id="long",
            words=tuple(f"word{i}" for i in range(60)),
            triplets=(Triplet((0, 0), (1, 1), LABELS[0]),),
        )
        group = build_group(long_instance, [LABELS[0]], tok, max_len=32)
        rel_ids = tok.text_ids(LABELS[0].text)
        row = group.token_ids[0].tolist()
        sep = row.index(tok.sep_id)
        assert row[sep + 1 : sep + 1 + len(rel_ids)] == rel_ids
        assert group.sentence_token_count < 60
        # alignment only covers fully kept words
        assert all(last <= group.sentence_token_count
                   for _, last in group.word_alignment.values())

    def test_truncation_at_word_boundary(self, tok):
        words = tuple(["abcdefgh"] * 20)  # 2 pieces per word
        group = build_group_from_words(words, [LABELS[0]], tok, 24)
        assert group.sentence_token_count % 2 == 0

    def test_boundary_position_mask(self, tok):
        group = build_group(RICHARD, [LABELS[0]], tok, 64)
        mask = group.boundary_position_mask()
        assert mask[0]
        assert mask[1 : group.sentence_token_count + 1].all()
        assert not mask[group.sentence_token_count + 1 :].any()

    def test_relation_too_long_rejected(self, tok):
        with pytest.raises(ValueError):
            build_group(RICHARD, [RelationLabel(9, "x " * 40)], tok, max_len=16)


class TestHFTokenizerAdapter:
    @pytest.fixture
    def hf_tok(self):
        transformers = pytest.importorskip("transformers")
        vocab = {w: i for i, w in enumerate(
            ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "richard", "is", "a",
             "demo", "##cratic", "politician", "in", "the", "united", "states", ".",
             "member", "of", "political", "party", "country", "citizenship",
             "position", "held"])}
        from zsrte.tokenization import HFTokenizer
        return HFTokenizer(transformers.BertTokenizer(vocab=vocab, do_lower_case=True))

    def test_contract_fields(self, hf_tok):
        assert hf_tok.pad_id != hf_tok.cls_id != hf_tok.sep_id
        assert hf_tok.vocab_size == 24

    def test_wordpiece_split_aligns(self, hf_tok):
        assert len(hf_tok.word_ids("Democratic")) == 2
        assert hf_tok.word_ids("unknownword") == [1]  # unk fallback

    def test_group_round_trip(self, hf_tok):
        group = build_group(RICHARD, [LABELS[0], LABELS[1]], hf_tok, max_len=48)
        row = group.token_ids[0].tolist()
        for idx, word in enumerate(RICHARD.words):
            first, last = group.word_alignment[idx]
            assert row[first : last + 1] == hf_tok.word_ids(word)
        rel = hf_tok.text_ids(LABELS[0].text)
        start = group.sentence_token_count + 2
        assert group.token_ids[0, start : start + len(rel)].tolist() == rel
        assert group.segment_ids[0, start : start + len(rel) + 1].tolist() == [1] * (len(rel) + 1)

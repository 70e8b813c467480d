"""Corpus loading and zero-shot split protocol."""

import json

import pytest

from zsrte.corpus import (
    Instance,
    RelationLabel,
    Triplet,
    load_corpus,
    make_splits,
    read_manifest,
    split_to_manifest,
    write_manifest,
)
from zsrte.errors import ConfigError, CorpusFormatError, SpanValidationError

RICHARD = {
    "id": "richard",
    "tokens": ["Richard", "is", "a", "Democratic", "politician", "in", "the",
               "United", "States", "."],
    "triplets": [
        {"head": [0], "tail": [3, 4], "label": "member of political party"},
        {"head": [0], "tail": [6, 7, 8], "label": "country of citizenship"},
    ],
}


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")


class TestLoadCorpus:
    def test_single_record_two_triplets(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, [RICHARD])
        instances, labels = load_corpus(path)
        assert len(instances) == 1
        assert len(instances[0].triplets) == 2
        assert {lab.text for lab in labels} == {
            "member of political party", "country of citizenship",
        }
        inst = instances[0]
        assert inst.triplets[0].head == (0, 0)
        assert inst.triplets[0].tail == (3, 4)
        assert inst.triplets[1].tail == (6, 8)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        instances, labels = load_corpus(path)
        assert instances == []
        assert labels == []

    def test_span_out_of_range(self, tmp_path):
        bad = dict(RICHARD)
        bad["triplets"] = [{"head": [0], "tail": [9, 10], "label": "x"}]
        path = tmp_path / "bad.jsonl"
        write_jsonl(path, [bad])
        with pytest.raises(SpanValidationError):
            load_corpus(path)

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "broken.jsonl"
        path.write_text(json.dumps(RICHARD) + "\n{not json\n")
        with pytest.raises(CorpusFormatError) as excinfo:
            load_corpus(path)
        assert excinfo.value.line_number == 2

    def test_non_consecutive_span_rejected(self, tmp_path):
        bad = dict(RICHARD)
        bad["triplets"] = [{"head": [0, 2], "tail": [3], "label": "x"}]
        path = tmp_path / "bad.jsonl"
        write_jsonl(path, [bad])
        with pytest.raises(CorpusFormatError):
            load_corpus(path)

    def test_missing_triplets_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        write_jsonl(path, [{"tokens": ["a"], "triplets": []}])
        with pytest.raises(CorpusFormatError):
            load_corpus(path)

    def test_label_ids_stable_under_record_order(self, tmp_path):
        other = {
            "tokens": ["Ann", "works", "for", "Acme", "."],
            "triplets": [{"head": [0], "tail": [3], "label": "works for company"}],
        }
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_jsonl(p1, [RICHARD, other])
        write_jsonl(p2, [other, RICHARD])
        _, labels1 = load_corpus(p1)
        _, labels2 = load_corpus(p2)
        assert labels1 == labels2


def synthetic_corpus(n_labels, per_label):
    """per_label instances for each of n_labels single-relation labels."""
    labels = [RelationLabel(i, f"relation {i:03d}") for i in range(n_labels)]
    instances = []
    for lab in labels:
        for k in range(per_label):
            instances.append(
                Instance(
                    id=f"{lab.id}-{k}",
                    words=("w0", "w1", "w2"),
                    triplets=(Triplet((0, 0), (2, 2), lab),),
                )
            )
    return instances, labels


class TestMakeSplits:
    def test_eighty_label_protocol_counts(self):
        instances, labels = synthetic_corpus(80, 1)
        for m, expected_train in ((5, 70), (10, 65), (15, 60)):
            splits = make_splits(instances, labels, m, 1, [0])
            split = splits[0]
            assert len(split.seen_labels) == expected_train
            assert len(split.validation_labels) == 5
            assert len(split.unseen_labels) == m

    def test_larger_label_set_counts(self):
        instances, labels = synthetic_corpus(113, 1)
        split = make_splits(instances, labels, 15, 1, [3])[0]
        assert len(split.seen_labels) == 93

    def test_partitions_disjoint(self):
        instances, labels = synthetic_corpus(30, 2)
        for split in make_splits(instances, labels, 5, 3, [0, 1, 2]):
            seen = {lab.text for lab in split.seen_labels}
            val = {lab.text for lab in split.validation_labels}
            unseen = {lab.text for lab in split.unseen_labels}
            assert seen & unseen == set()
            assert seen & val == set()
            assert val & unseen == set()

    def test_same_seed_identical(self):
        instances, labels = synthetic_corpus(30, 2)
        a = make_splits(instances, labels, 5, 1, [42])[0]
        b = make_splits(instances, labels, 5, 1, [42])[0]
        assert a == b

    def test_instances_respect_partitions(self):
        instances, labels = synthetic_corpus(30, 3)
        split = make_splits(instances, labels, 5, 1, [7])[0]
        seen = {lab.text for lab in split.seen_labels}
        unseen = {lab.text for lab in split.unseen_labels}
        for inst in split.test:
            assert inst.relation_texts() <= unseen
        for inst in split.train:
            assert inst.relation_texts() <= seen

    def test_mixed_instances_dropped(self):
        instances, labels = synthetic_corpus(20, 1)
        mixed = Instance(
            id="mixed",
            words=("a", "b"),
            triplets=(
                Triplet((0, 0), (1, 1), labels[0]),
                Triplet((0, 0), (1, 1), labels[10]),
            ),
        )
        split = make_splits(instances + [mixed], labels, 5, 1, [0])[0]
        all_ids = {i.id for i in split.train + split.validation + split.test}
        # mixed can only survive if labels 0 and 10 landed in the same partition
        seen = {lab.text for lab in split.seen_labels}
        if not mixed.relation_texts() <= seen:
            assert "mixed" not in all_ids

    def test_m_too_large(self):
        instances, labels = synthetic_corpus(12, 1)
        with pytest.raises(ConfigError):
            make_splits(instances, labels, 10, 1, [0])

    def test_seed_count_mismatch(self):
        instances, labels = synthetic_corpus(30, 1)
        with pytest.raises(ConfigError):
            make_splits(instances, labels, 5, 2, [0])


class TestManifest:
    def test_round_trip(self, tmp_path):
        instances, labels = synthetic_corpus(30, 2)
        split = make_splits(instances, labels, 5, 1, [9])[0]
        path = tmp_path / "fold-0.json"
        write_manifest(split, path)
        rebuilt = read_manifest(path, instances, labels)
        assert split_to_manifest(rebuilt) == split_to_manifest(split)

    def test_byte_identical_for_same_seed(self, tmp_path):
        instances, labels = synthetic_corpus(30, 2)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        write_manifest(make_splits(instances, labels, 5, 1, [9])[0], p1)
        write_manifest(make_splits(instances, labels, 5, 1, [9])[0], p2)
        assert p1.read_bytes() == p2.read_bytes()

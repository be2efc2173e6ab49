"""Dataset manifest parsing, validation, and split semantics."""

import json

import pytest

from signet import manifest
from signet.manifest import (DatasetManifest, LabelSet, ManifestError,
                             SampleRecord, load_manifest, save_manifest,
                             split, validate_manifest)


def _write(tmp_path, lines):
    path = tmp_path / "m.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def _rec(clip_id, label, split_name="train", frames_dir=None):
    return json.dumps({
        "clip_id": clip_id,
        "frames_dir": frames_dir or f"clips/{clip_id}",
        "label": label, "signer_id": "s0", "split": split_name})


def test_load_basic_and_label_first_appearance_order(tmp_path):
    path = _write(tmp_path, [
        _rec("a", "dog"), _rec("b", "cat"), _rec("c", "dog", "test")])
    man = load_manifest(path)
    assert len(man) == 3
    assert man.labels.names == ("dog", "cat")
    assert man.labels.index("cat") == 1
    assert man.labels.name_of(0) == "dog"


def test_comments_and_blank_lines_skipped(tmp_path):
    path = _write(tmp_path, ["# header", "", _rec("a", "dog"), "   ", "# tail"])
    assert len(load_manifest(path)) == 1


def test_malformed_line_reports_line_number(tmp_path):
    path = _write(tmp_path, [_rec("a", "dog"), "{not json"])
    with pytest.raises(ManifestError, match="line 2"):
        load_manifest(path)


def test_non_object_line_rejected(tmp_path):
    path = _write(tmp_path, ['["list"]'])
    with pytest.raises(ManifestError, match="line 1"):
        load_manifest(path)


def test_missing_keys_named(tmp_path):
    path = _write(tmp_path, ['{"clip_id": "a", "label": "dog"}'])
    with pytest.raises(ManifestError, match="frames_dir"):
        load_manifest(path)


def test_duplicate_clip_id_rejected(tmp_path):
    path = _write(tmp_path, [_rec("a", "dog"), _rec("a", "cat")])
    with pytest.raises(ManifestError, match="duplicate clip_id"):
        load_manifest(path)


def test_unknown_split_rejected(tmp_path):
    path = _write(tmp_path, [_rec("a", "dog", "validation")])
    with pytest.raises(ManifestError, match="unknown split"):
        load_manifest(path)


def test_unknown_label_index_raises():
    ls = LabelSet(names=("dog", "cat"))
    with pytest.raises(KeyError):
        ls.index("horse")


def test_save_load_round_trip(tmp_path):
    path = _write(tmp_path, [_rec("a", "dog"), _rec("b", "cat", "test")])
    man = load_manifest(path)
    out = tmp_path / "saved.jsonl"
    save_manifest(str(out), man)
    again = load_manifest(str(out))
    assert again.records == man.records
    assert again.labels.names == man.labels.names


def test_save_is_byte_stable(tmp_path):
    path = _write(tmp_path, [_rec("a", "dog"), _rec("b", "cat", "test")])
    man = load_manifest(path)
    p1, p2 = tmp_path / "s1.jsonl", tmp_path / "s2.jsonl"
    save_manifest(str(p1), man)
    save_manifest(str(p2), man)
    assert p1.read_bytes() == p2.read_bytes()


def test_split_preserves_order():
    recs = tuple(
        SampleRecord(clip_id=f"c{i}", frames_dir=f"d{i}", label="dog",
                     signer_id="s", split="train" if i % 2 == 0 else "test")
        for i in range(6))
    man = DatasetManifest(records=recs, labels=LabelSet(names=("dog",)))
    train, test = split(man)
    assert [r.clip_id for r in train] == ["c0", "c2", "c4"]
    assert [r.clip_id for r in test] == ["c1", "c3", "c5"]


class TestValidation:
    def _man(self, records):
        labels = []
        for r in records:
            if r.label not in labels:
                labels.append(r.label)
        return DatasetManifest(records=tuple(records), labels=LabelSet(names=tuple(labels)))

    def test_clean_dataset_has_no_issues(self, tiny_dataset):
        path, root = tiny_dataset
        man = load_manifest(path)
        report = validate_manifest(man, root)
        assert report.ok
        assert report.issues == []
        assert all(count == 5 for count in report.frame_counts.values())

    def test_missing_dir_flagged_by_clip_id(self, tiny_dataset):
        path, root = tiny_dataset
        man = load_manifest(path)
        bad = man.records + (SampleRecord(
            clip_id="ghost", frames_dir="nowhere/ghost", label="wave",
            signer_id="s9", split="train"),)
        man2 = DatasetManifest(records=bad, labels=man.labels)
        report = validate_manifest(man2, root)
        assert report.missing_dirs == ["ghost"]
        assert not report.ok

    def test_empty_dir_flagged(self, tmp_path):
        (tmp_path / "clips" / "e1").mkdir(parents=True)
        man = self._man([SampleRecord(
            clip_id="e1", frames_dir="clips/e1", label="dog",
            signer_id="s", split="train")])
        report = validate_manifest(man, str(tmp_path))
        assert report.empty_dirs == ["e1"]

    def test_label_only_in_train_reported_missing_from_test(self, tmp_path):
        recs = []
        for cid, label, sp in (("a", "horse", "train"), ("b", "dog", "train"),
                               ("c", "dog", "test")):
            d = tmp_path / "clips" / cid
            d.mkdir(parents=True)
            (d / "0.ppm").write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
            recs.append(SampleRecord(clip_id=cid, frames_dir=f"clips/{cid}",
                                     label=label, signer_id="s", split=sp))
        report = validate_manifest(self._man(recs), str(tmp_path))
        assert report.labels_missing_test == ["horse"]
        assert report.labels_missing_train == []
        assert not report.ok

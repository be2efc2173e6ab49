"""Dataset catalogs: load, validate, and split gesture-clip manifests.

A manifest is a UTF-8 JSON-lines file; each non-blank line that does not
start with '#' is an object with keys clip_id, frames_dir, label,
signer_id, split. frames_dir is relative to a caller-supplied data root.
Class ids are assigned by first appearance in the file, which makes the
manifest the single source of truth for confusion-matrix ordering.
"""

import json
import os
from dataclasses import dataclass, field

VALID_SPLITS = ("train", "test")


class ManifestError(ValueError):
    """Manifest file cannot be parsed or violates a structural invariant."""


@dataclass(frozen=True)
class SampleRecord:
    clip_id: str
    frames_dir: str
    label: str
    signer_id: str
    split: str


@dataclass(frozen=True)
class LabelSet:
    """Ordered class names with a bijective name <-> id mapping."""

    names: tuple

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ManifestError(f"duplicate label names: {list(self.names)}")

    @property
    def k(self):
        return len(self.names)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown label {name!r}") from None

    def name_of(self, class_id):
        return self.names[class_id]


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple
    labels: LabelSet

    def __len__(self):
        return len(self.records)


@dataclass
class ValidationReport:
    missing_dirs: list = field(default_factory=list)       # clip_ids
    empty_dirs: list = field(default_factory=list)         # clip_ids
    frame_counts: dict = field(default_factory=dict)       # clip_id -> int
    labels_missing_train: list = field(default_factory=list)
    labels_missing_test: list = field(default_factory=list)

    @property
    def issues(self):
        out = []
        for cid in self.missing_dirs:
            out.append(f"frames_dir missing for clip {cid!r}")
        for cid in self.empty_dirs:
            out.append(f"no frames found for clip {cid!r}")
        for name in self.labels_missing_train:
            out.append(f"label {name!r} has no train clips")
        for name in self.labels_missing_test:
            out.append(f"label {name!r} has no test clips")
        return out

    @property
    def ok(self):
        return not self.issues


def _parse_line(line, lineno):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ManifestError(f"line {lineno}: invalid record: {e.msg}") from e
    if not isinstance(obj, dict):
        raise ManifestError(f"line {lineno}: record must be an object, got {type(obj).__name__}")
    missing = [k for k in ("clip_id", "frames_dir", "label", "signer_id", "split") if k not in obj]
    if missing:
        raise ManifestError(f"line {lineno}: missing keys {missing}")
    rec = SampleRecord(
        clip_id=str(obj["clip_id"]),
        frames_dir=str(obj["frames_dir"]),
        label=str(obj["label"]),
        signer_id=str(obj["signer_id"]),
        split=str(obj["split"]),
    )
    if rec.split not in VALID_SPLITS:
        raise ManifestError(f"line {lineno}: unknown split {rec.split!r} (expected one of {VALID_SPLITS})")
    if not rec.frames_dir:
        raise ManifestError(f"line {lineno}: empty frames_dir for clip {rec.clip_id!r}")
    return rec


def load_manifest(path):
    """Parse a manifest file into records plus a first-appearance label set."""
    records = []
    seen_ids = set()
    label_order = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            rec = _parse_line(line, lineno)
            if rec.clip_id in seen_ids:
                raise ManifestError(f"line {lineno}: duplicate clip_id {rec.clip_id!r}")
            seen_ids.add(rec.clip_id)
            if rec.label not in label_order:
                label_order.append(rec.label)
            records.append(rec)
    return DatasetManifest(records=tuple(records), labels=LabelSet(names=tuple(label_order)))


def save_manifest(path, manifest, header_comment=None):
    """Write records as JSON lines (one per record, stable key order)."""
    lines = []
    if header_comment:
        lines.extend(f"# {c}" for c in header_comment.splitlines())
    for rec in manifest.records:
        lines.append(json.dumps({
            "clip_id": rec.clip_id,
            "frames_dir": rec.frames_dir,
            "label": rec.label,
            "signer_id": rec.signer_id,
            "split": rec.split,
        }, sort_keys=True))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def validate_manifest(manifest, root):
    """Check frames_dirs exist and every label is covered in both splits.

    Always returns a report; callers decide what is fatal.
    """
    from .videoio import list_frame_files  # local import avoids a cycle

    report = ValidationReport()
    for rec in manifest.records:
        d = os.path.join(root, rec.frames_dir)
        if not os.path.isdir(d):
            report.missing_dirs.append(rec.clip_id)
            report.frame_counts[rec.clip_id] = 0
            continue
        n = len(list_frame_files(d))
        report.frame_counts[rec.clip_id] = n
        if n == 0:
            report.empty_dirs.append(rec.clip_id)
    covered = {s: set() for s in VALID_SPLITS}
    for rec in manifest.records:
        covered[rec.split].add(rec.label)
    for name in manifest.labels.names:
        if name not in covered["train"]:
            report.labels_missing_train.append(name)
        if name not in covered["test"]:
            report.labels_missing_test.append(name)
    return report


def split(manifest):
    """Partition records by their split field, order preserved."""
    train = [r for r in manifest.records if r.split == "train"]
    test = [r for r in manifest.records if r.split == "test"]
    return train, test

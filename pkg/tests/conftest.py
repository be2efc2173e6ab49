import numpy as np
import pytest

from signet import features, manifest, videoio
from signet.rng import Xoshiro256StarStar


@pytest.fixture
def rng():
    return Xoshiro256StarStar(12345)


def random_frames(rng, t, h, w):
    """uint8 (t, h, w, 3) frames from the package RNG."""
    flat = rng.fill_unit(t * h * w * 3)
    return (flat * 256).clip(0, 255).astype(np.uint8).reshape(t, h, w, 3)


def write_clip(dirpath, frames):
    dirpath.mkdir(parents=True, exist_ok=True)
    for i in range(frames.shape[0]):
        videoio.write_ppm(str(dirpath / f"{i:03d}.ppm"), frames[i])


def make_seq(clip_id, vectors, backend="test"):
    return features.EmbeddingSequence(
        clip_id=clip_id, vectors=np.asarray(vectors, dtype=np.float32),
        backend_name=backend)


@pytest.fixture
def tiny_dataset(tmp_path):
    """Two-class, four-clip dataset on disk with a manifest; returns (manifest_path, root)."""
    r = Xoshiro256StarStar(7)
    records = []
    for li, label in enumerate(("wave", "point")):
        for i in range(2):
            clip_id = f"{label}{i}"
            frames = random_frames(r, 5, 8, 8)
            write_clip(tmp_path / label / clip_id, frames)
            records.append(manifest.SampleRecord(
                clip_id=clip_id, frames_dir=f"{label}/{clip_id}", label=label,
                signer_id=f"s{i}", split="train" if i == 0 else "test"))
    man = manifest.DatasetManifest(
        records=tuple(records),
        labels=manifest.LabelSet(names=("wave", "point")))
    path = tmp_path / "manifest.jsonl"
    manifest.save_manifest(str(path), man)
    return str(path), str(tmp_path)

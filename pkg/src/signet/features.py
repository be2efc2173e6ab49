"""Frame embeddings: pretrained-backbone inference behind a narrow interface,
plus deterministic stand-in extractors and an on-disk feature cache.

Three backends implement the same contract (embed a prepared 1x3xHxW
float32 tensor into a D-vector):

  - OnnxBackend: runs an exported model file (single image input, single
    1xD output with global average pooling already baked in). Sidecar JSON
    next to the model carries the preprocessing constants.
  - TinyBackend: block-averaged pixel features. Real image content, no
    model file; smooth under pixel noise, so it generalizes and can carry
    an end-to-end run on its own.
  - MockExtractor: hash-based vectors for tests. Deterministic function of
    (seed, component index, input bytes); identical frames give identical
    vectors, but it is content-blind and will not generalize.

Cache file format (one file per clip x backend, "<clip_id>.<backend>.feat"):
  magic "FEATSEQ1" | u32 T | u32 D (little-endian) | T*D float32 LE
  row-major (time-major) | u64 blake2b-8 checksum of the float payload.
Writes are atomic; concurrent writers of the same key are last-writer-wins.
"""

import json
import os
import struct
from dataclasses import dataclass, replace
from hashlib import blake2b

import numpy as np

from . import binio
from .rng import mix64_array
from .videoio import resize_bilinear

CACHE_MAGIC = b"FEATSEQ1"
SCALE_UNIT = "[0,1]"
SCALE_SYMMETRIC = "[-1,1]"


class BackendError(RuntimeError):
    """Backend failed to load or produced out-of-contract output."""


@dataclass(frozen=True)
class BackendSpec:
    name: str
    input_size: tuple          # (width, height)
    channel_means: tuple
    channel_stds: tuple
    value_scale: str           # SCALE_UNIT or SCALE_SYMMETRIC
    embedding_dim: int
    model_path: str = None

    def __post_init__(self):
        if self.embedding_dim < 1:
            raise ValueError(f"embedding_dim must be >= 1, got {self.embedding_dim}")
        if self.input_size[0] < 1 or self.input_size[1] < 1:
            raise ValueError(f"input_size must be >= 1x1, got {self.input_size}")
        if any(s <= 0 for s in self.channel_stds):
            raise ValueError(f"channel stds must be positive, got {self.channel_stds}")
        if self.value_scale not in (SCALE_UNIT, SCALE_SYMMETRIC):
            raise ValueError(f"value_scale must be {SCALE_UNIT!r} or {SCALE_SYMMETRIC!r}")


_IMAGENET_MEANS = (0.485, 0.456, 0.406)
_IMAGENET_STDS = (0.229, 0.224, 0.225)

# Published input sizes and pooled feature widths of the supported
# architectures; the exported model is checked against these at load time.
PRESETS = {
    "densenet201": BackendSpec("densenet201", (224, 224), _IMAGENET_MEANS, _IMAGENET_STDS, SCALE_UNIT, 1920),
    "inceptionv3": BackendSpec("inceptionv3", (299, 299), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0), SCALE_SYMMETRIC, 2048),
    "inceptionresnetv2": BackendSpec("inceptionresnetv2", (299, 299), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0), SCALE_SYMMETRIC, 1536),
    "resnet50": BackendSpec("resnet50", (224, 224), _IMAGENET_MEANS, _IMAGENET_STDS, SCALE_UNIT, 2048),
    "vgg16": BackendSpec("vgg16", (224, 224), _IMAGENET_MEANS, _IMAGENET_STDS, SCALE_UNIT, 512),
    "vgg19": BackendSpec("vgg19", (224, 224), _IMAGENET_MEANS, _IMAGENET_STDS, SCALE_UNIT, 512),
}


@dataclass(frozen=True)
class EmbeddingSequence:
    """Per-frame feature vectors of one clip, shape (T, D) float32."""

    clip_id: str
    vectors: np.ndarray
    backend_name: str

    def __post_init__(self):
        v = self.vectors
        if v.ndim != 2 or v.dtype != np.float32:
            raise ValueError(f"vectors must be (T, D) float32, got {v.shape} {v.dtype}")
        if v.shape[0] < 1:
            raise ValueError("empty embedding sequence")
        if not np.isfinite(v).all():
            raise ValueError(f"non-finite embedding values for clip {self.clip_id!r}")
        v.flags.writeable = False

    @property
    def t(self):
        return self.vectors.shape[0]

    @property
    def d(self):
        return self.vectors.shape[1]


def prepare_input(frame, spec):
    """Resize, rescale, and normalize a frame into a 1x3xHxW float32 tensor.

    The 8-bit frame is bilinearly resized to spec.input_size, scaled to
    [0,1] (v/255) or [-1,1] (2v/255 - 1), then per channel shifted by the
    mean and divided by the std. Channels-first layout.
    """
    w, h = spec.input_size
    resized = resize_bilinear(np.asarray(frame, dtype=np.uint8), w, h)
    x = resized.astype(np.float64)
    if spec.value_scale == SCALE_UNIT:
        x = x / 255.0
    else:
        x = x * (2.0 / 255.0) - 1.0
    for c in range(3):
        x[:, :, c] = (x[:, :, c] - spec.channel_means[c]) / spec.channel_stds[c]
    chw = np.transpose(x, (2, 0, 1)).astype(np.float32)
    return np.ascontiguousarray(chw[None, :, :, :])


def input_digest(prepared):
    """64-bit blake2b digest of the prepared tensor's little-endian bytes."""
    canon = np.ascontiguousarray(prepared, dtype="<f4").tobytes()
    return int.from_bytes(blake2b(canon, digest_size=8).digest(), "little")


class MockExtractor:
    """Deterministic hash-based embedding backend for tests.

    Component j of the embedding is splitmix64's output mix applied to
    (digest XOR j XOR seed), where digest is the 64-bit blake2b of the
    prepared-input bytes; the top 53 bits are mapped to [0, 1) and then
    affinely to [-1, 1). Bit-exact and content-blind by design.
    """

    def __init__(self, seed, d, input_size=(32, 32)):
        if d < 1:
            raise ValueError(f"embedding dim must be >= 1, got {d}")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.spec = BackendSpec(
            name=f"mock-{seed}-{d}",
            input_size=input_size,
            channel_means=(0.0, 0.0, 0.0),
            channel_stds=(1.0, 1.0, 1.0),
            value_scale=SCALE_UNIT,
            embedding_dim=d,
        )

    def embed(self, prepared):
        digest = np.uint64(input_digest(prepared))
        j = np.arange(self.spec.embedding_dim, dtype=np.uint64)
        mixed = mix64_array(digest ^ j ^ np.uint64(self.seed))
        unit = (mixed >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return (2.0 * unit - 1.0).astype(np.float32)


class TinyBackend:
    """Block-averaged pixel features: a g x g grid per channel, D = 3*g*g.

    The prepared input (4g x 4g after resize) is averaged over
    non-overlapping 4x4 blocks; the embedding is the (C, g, g) pool
    flattened row-major. Cheap, deterministic, and smooth under noise.
    """

    def __init__(self, grid=4):
        if grid < 1:
            raise ValueError(f"grid must be >= 1, got {grid}")
        self.grid = grid
        side = 4 * grid
        self.spec = BackendSpec(
            name=f"tiny{grid}",
            input_size=(side, side),
            channel_means=(0.0, 0.0, 0.0),
            channel_stds=(1.0, 1.0, 1.0),
            value_scale=SCALE_UNIT,
            embedding_dim=3 * grid * grid,
        )

    def embed(self, prepared):
        g = self.grid
        x = prepared[0].astype(np.float64)          # (3, 4g, 4g)
        pooled = x.reshape(3, g, 4, g, 4).mean(axis=(2, 4))
        return pooled.reshape(-1).astype(np.float32)


class OnnxBackend:
    """Runs an exported interchange model via onnxruntime (CPU provider)."""

    def __init__(self, spec):
        if not spec.model_path:
            raise BackendError(f"backend {spec.name!r} has no model_path")
        if not os.path.isfile(spec.model_path):
            raise BackendError(f"model file not found: {spec.model_path}")
        try:
            import onnxruntime
        except ImportError as e:
            raise BackendError(
                "onnxruntime is required to run exported models "
                "(pip install signet[onnx]); tests use the mock/tiny backends instead") from e
        try:
            self._session = onnxruntime.InferenceSession(
                spec.model_path, providers=["CPUExecutionProvider"])
        except Exception as e:
            raise BackendError(f"failed to load model {spec.model_path!r}: {e}") from e
        inputs = self._session.get_inputs()
        outputs = self._session.get_outputs()
        if len(inputs) != 1 or len(outputs) != 1:
            raise BackendError(
                f"model {spec.model_path!r} must have exactly one input and one output, "
                f"got {len(inputs)}/{len(outputs)}")
        self._input_name = inputs[0].name
        out_shape = outputs[0].shape
        if len(out_shape) >= 2 and isinstance(out_shape[-1], int) and out_shape[-1] != spec.embedding_dim:
            raise BackendError(
                f"model output width {out_shape[-1]} != expected embedding_dim {spec.embedding_dim}")
        self.spec = spec

    def embed(self, prepared):
        out = self._session.run(None, {self._input_name: prepared})[0]
        return np.asarray(out, dtype=np.float32).reshape(-1)


def extract_clip_embeddings(clip, extractor, spec):
    """One D-vector per frame, frame order preserved."""
    rows = []
    for i in range(len(clip)):
        prepared = prepare_input(clip.frames[i], spec)
        vec = np.asarray(extractor.embed(prepared), dtype=np.float32).reshape(-1)
        if vec.shape[0] != spec.embedding_dim:
            raise BackendError(
                f"backend {spec.name!r} produced {vec.shape[0]} values, "
                f"expected embedding_dim {spec.embedding_dim}")
        if not np.isfinite(vec).all():
            raise BackendError(f"backend {spec.name!r} produced non-finite values on frame {i}")
        rows.append(vec)
    return EmbeddingSequence(clip_id=clip.clip_id, vectors=np.stack(rows), backend_name=spec.name)


def load_sidecar(path):
    """Read a backend sidecar JSON into a BackendSpec.

    Schema: {name, input_size: [w, h], means: [3], stds: [3],
    value_scale: "[0,1]"|"[-1,1]", embedding_dim}. The model file defaults
    to <name>.onnx next to the sidecar unless model_path is given.
    """
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        spec = BackendSpec(
            name=str(obj["name"]),
            input_size=tuple(int(v) for v in obj["input_size"]),
            channel_means=tuple(float(v) for v in obj["means"]),
            channel_stds=tuple(float(v) for v in obj["stds"]),
            value_scale=str(obj["value_scale"]),
            embedding_dim=int(obj["embedding_dim"]),
        )
    except KeyError as e:
        raise BackendError(f"sidecar {path}: missing key {e}") from e
    model_path = obj.get("model_path")
    if model_path is None:
        model_path = os.path.join(os.path.dirname(path), f"{spec.name}.onnx")
    elif not os.path.isabs(model_path):
        model_path = os.path.join(os.path.dirname(path), model_path)
    return replace(spec, model_path=model_path)


def cache_path(cache_dir, clip_id, backend_name):
    return os.path.join(cache_dir, f"{clip_id}.{backend_name}.feat")


def write_cache(seq, cache_dir):
    """Serialize an embedding sequence; returns the file path."""
    os.makedirs(cache_dir, exist_ok=True)
    payload = np.ascontiguousarray(seq.vectors, dtype="<f4").tobytes()
    blob = (CACHE_MAGIC
            + struct.pack("<II", seq.t, seq.d)
            + payload
            + struct.pack("<Q", binio.u64_digest(payload)))
    path = cache_path(cache_dir, seq.clip_id, seq.backend_name)
    binio.write_atomic(path, blob)
    return path


def read_cache(cache_dir, clip_id, backend_name):
    path = cache_path(cache_dir, clip_id, backend_name)
    with open(path, "rb") as fh:
        data = fh.read()
    what = os.path.basename(path)
    binio.check_magic(data, CACHE_MAGIC, what)
    if len(data) < len(CACHE_MAGIC) + 8:
        raise binio.TruncatedFileError(f"{what}: header incomplete")
    t, d = struct.unpack_from("<II", data, len(CACHE_MAGIC))
    body = data[len(CACHE_MAGIC) + 8:]
    if len(body) < 8:
        raise binio.TruncatedFileError(f"{what}: missing checksum")
    payload, (stored,) = body[:-8], struct.unpack("<Q", body[-8:])
    expected = t * d * 4
    if len(payload) != expected:
        # a still-valid checksum means the writer meant this payload and the
        # header fields are the lie; otherwise the file was cut short
        if binio.u64_digest(payload) == stored:
            raise binio.FieldMismatchError(
                f"{what}: header declares T={t}, D={d} ({expected} bytes) "
                f"but payload has {len(payload)}")
        raise binio.TruncatedFileError(
            f"{what}: payload has {len(payload)} bytes, header declares {expected}")
    binio.check_checksum(payload, stored, what)
    if t < 1 or d < 1:
        raise binio.FieldMismatchError(f"{what}: degenerate dimensions T={t}, D={d}")
    vectors = np.frombuffer(payload, dtype="<f4").reshape(t, d).copy()
    return EmbeddingSequence(clip_id=clip_id, vectors=vectors, backend_name=backend_name)

"""Frame-sequence I/O and temporal sampling.

Clips are directories of numbered raster images, not video containers;
an external decode step (ffmpeg or similar, see README) produces frames.
PPM (P6, maxval 255) is read and written natively; PNG/JPEG decode is
available when Pillow is installed. Frames are ordered by the first
integer embedded in the filename, then lexicographically.
"""

import os
import re
from dataclasses import dataclass

import numpy as np

from . import kernels

DEFAULT_FRAME_GRID = (2, 4, 12, 24)

_RASTER_EXTS = (".ppm", ".pgm", ".png", ".jpg", ".jpeg", ".bmp")
_INT_RE = re.compile(r"\d+")


class ClipError(ValueError):
    """A frame directory cannot be loaded as a clip."""


@dataclass(frozen=True)
class SamplingPlan:
    """Sequence-length hyperparameter: how many frames to keep per clip."""

    frames_per_clip: int

    def __post_init__(self):
        if self.frames_per_clip < 1:
            raise ValueError(f"frames_per_clip must be >= 1, got {self.frames_per_clip}")


@dataclass(frozen=True)
class FrameClip:
    """Ordered RGB frames of one gesture clip, shape (T, H, W, 3) uint8."""

    clip_id: str
    frames: np.ndarray

    def __post_init__(self):
        f = self.frames
        if f.ndim != 4 or f.shape[3] != 3 or f.dtype != np.uint8:
            raise ClipError(f"clip {self.clip_id!r}: frames must be (T, H, W, 3) uint8, got {f.shape} {f.dtype}")
        if f.shape[0] < 1:
            raise ClipError(f"clip {self.clip_id!r}: empty frame stack")
        f.flags.writeable = False

    def __len__(self):
        return self.frames.shape[0]

    @property
    def height(self):
        return self.frames.shape[1]

    @property
    def width(self):
        return self.frames.shape[2]


def natural_key(name):
    """Sort key: first embedded integer (if any), then the full name."""
    m = _INT_RE.search(name)
    return (0, int(m.group()), name) if m else (1, 0, name)


def list_frame_files(frames_dir):
    names = [n for n in os.listdir(frames_dir)
             if os.path.splitext(n)[1].lower() in _RASTER_EXTS]
    names.sort(key=natural_key)
    return [os.path.join(frames_dir, n) for n in names]


def _read_token(fh):
    # PPM header tokens are whitespace separated; '#' starts a comment to EOL
    tok = b""
    while True:
        ch = fh.read(1)
        if not ch:
            if tok:
                return tok
            raise ClipError("unexpected end of PPM header")
        if ch == b"#":
            while ch and ch != b"\n":
                ch = fh.read(1)
            continue
        if ch.isspace():
            if tok:
                return tok
            continue
        tok += ch


def read_ppm(path):
    """Decode a binary PPM (P6) file to an (H, W, 3) uint8 array."""
    with open(path, "rb") as fh:
        magic = _read_token(fh)
        if magic != b"P6":
            raise ClipError(f"{path}: not a P6 PPM (magic {magic!r})")
        try:
            width = int(_read_token(fh))
            height = int(_read_token(fh))
            maxval = int(_read_token(fh))
        except ValueError as e:
            raise ClipError(f"{path}: malformed PPM header") from e
        if maxval != 255:
            raise ClipError(f"{path}: unsupported maxval {maxval} (only 255)")
        data = fh.read(width * height * 3)
    if len(data) != width * height * 3:
        raise ClipError(f"{path}: truncated pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(path, frame):
    frame = np.ascontiguousarray(frame, dtype=np.uint8)
    h, w = frame.shape[0], frame.shape[1]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + frame.tobytes())


def write_pgm(path, image):
    """Write a single-channel uint8 image as binary PGM (P5)."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w = image.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + image.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        magic = _read_token(fh)
        if magic != b"P5":
            raise ClipError(f"{path}: not a P5 PGM (magic {magic!r})")
        width = int(_read_token(fh))
        height = int(_read_token(fh))
        maxval = int(_read_token(fh))
        if maxval != 255:
            raise ClipError(f"{path}: unsupported maxval {maxval}")
        data = fh.read(width * height)
    if len(data) != width * height:
        raise ClipError(f"{path}: truncated pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width).copy()


def _decode_frame(path):
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ppm":
        return read_ppm(path)
    if ext == ".pgm":
        gray = read_pgm(path)
        return np.repeat(gray[:, :, None], 3, axis=2)
    try:
        from PIL import Image
    except ImportError:
        raise ClipError(f"{path}: decoding {ext} requires Pillow (pip install signet[png])") from None
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except Exception as e:
        raise ClipError(f"{path}: undecodable image: {e}") from e


def load_clip(frames_dir, clip_id=None):
    """Load all frames in a directory as one clip, natural-numeric order."""
    if clip_id is None:
        clip_id = os.path.basename(os.path.normpath(frames_dir))
    if not os.path.isdir(frames_dir):
        raise ClipError(f"clip {clip_id!r}: frames_dir {frames_dir!r} does not exist")
    paths = list_frame_files(frames_dir)
    if not paths:
        raise ClipError(f"clip {clip_id!r}: no raster frames in {frames_dir!r}")
    frames = []
    shape = None
    for p in paths:
        arr = _decode_frame(p)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise ClipError(
                f"clip {clip_id!r}: frame {os.path.basename(p)} is {arr.shape[1]}x{arr.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}")
        frames.append(arr)
    return FrameClip(clip_id=clip_id, frames=np.stack(frames))


def uniform_sample(total, n):
    """Indices floor(i*total/n) for i in 0..n-1.

    Non-decreasing, in [0, total-1], repeats frames when total < n. For
    n=2 this picks the first frame and the middle frame.
    """
    if total < 1:
        raise ValueError(f"total must be >= 1, got {total}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return [i * total // n for i in range(n)]


def sample_clip(clip, n):
    idx = uniform_sample(len(clip), n)
    return FrameClip(clip_id=clip.clip_id, frames=clip.frames[idx].copy())


def resize_bilinear(frame, out_w, out_h):
    """Half-pixel-centered bilinear resize of an (H, W, C) uint8 frame.

    Source coordinate per output pixel is (dst + 0.5)*scale - 0.5, clamped
    to the image; channels are interpolated independently; the result is
    rounded half-up to 8 bits.
    """
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be >= 1x1, got {out_w}x{out_h}")
    frame = np.ascontiguousarray(frame, dtype=np.uint8)
    squeeze = False
    if frame.ndim == 2:
        frame = frame[:, :, None]
        squeeze = True
    if frame.shape[0] == out_h and frame.shape[1] == out_w:
        out = frame.copy()
    else:
        out = kernels.resize_bilinear_u8(frame, out_h, out_w)
    return out[:, :, 0] if squeeze else out

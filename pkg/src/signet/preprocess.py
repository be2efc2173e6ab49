"""Background subtraction and denoising applied before feature extraction.

With a history window of 1 the subtractor is previous-frame differencing:
a pixel is foreground when its luma changed by more than the threshold
between consecutive frames. Masks are cleaned with a median blur, applied
to the current frame, and the first frame is dropped (it has no
predecessor to difference against). Background pixels are zeroed rather
than cropped so frame geometry stays stable for the backbone.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .videoio import FrameClip

DEFAULT_THRESHOLD = 50
DEFAULT_BLUR_KERNEL = 5


@dataclass(frozen=True)
class SubtractorConfig:
    history: int = 1
    threshold: int = DEFAULT_THRESHOLD
    blur_kernel: int = DEFAULT_BLUR_KERNEL

    def __post_init__(self):
        if self.history != 1:
            raise ValueError(f"only history=1 is supported, got {self.history}")
        if not 0 <= self.threshold <= 255:
            raise ValueError(f"threshold must be in [0, 255], got {self.threshold}")
        if self.blur_kernel < 1 or self.blur_kernel % 2 == 0:
            raise ValueError(f"blur_kernel must be odd and >= 1, got {self.blur_kernel}")


def to_luma(frame):
    """BT.601 luma: round(0.299*R + 0.587*G + 0.114*B), half-up."""
    frame = np.ascontiguousarray(frame, dtype=np.uint8)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB frame, got shape {frame.shape}")
    return kernels.to_luma_u8(frame)


def foreground_mask(prev, cur, threshold):
    """Binary mask: 1 where |cur - prev| > threshold, else 0."""
    if prev.shape != cur.shape:
        raise ValueError(f"frame dimensions differ: {prev.shape} vs {cur.shape}")
    prev = np.ascontiguousarray(prev, dtype=np.uint8)
    cur = np.ascontiguousarray(cur, dtype=np.uint8)
    return kernels.abs_diff_mask_u8(prev, cur, int(threshold))


def median_blur(mask, k):
    """Exact k x k median filter with edge replication; k odd."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 1, got {k}")
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    return kernels.median_filter_u8(mask, int(k))


def apply_mask(frame, mask):
    """Keep frame pixels where mask is set, black out the rest."""
    if frame.shape[:2] != mask.shape:
        raise ValueError(f"mask {mask.shape} does not match frame {frame.shape[:2]}")
    frame = np.ascontiguousarray(frame, dtype=np.uint8)
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    return kernels.apply_mask_u8(frame, mask)


def preprocess_clip(clip, cfg=SubtractorConfig()):
    """Difference, denoise, and mask every frame against its predecessor.

    Output has length T-1: the first frame is dropped because it carries
    the raw background the subtraction leaves behind.
    """
    t = len(clip)
    if t < 2:
        raise ValueError(f"clip {clip.clip_id!r} has {t} frame(s); need >= 2 to difference")
    lumas = [kernels.to_luma_u8(np.ascontiguousarray(clip.frames[i])) for i in range(t)]
    out = np.empty((t - 1,) + clip.frames.shape[1:], dtype=np.uint8)
    for i in range(1, t):
        mask = kernels.abs_diff_mask_u8(lumas[i - 1], lumas[i], cfg.threshold)
        mask = kernels.median_filter_u8(mask, cfg.blur_kernel)
        out[i - 1] = kernels.apply_mask_u8(np.ascontiguousarray(clip.frames[i]), mask)
    return FrameClip(clip_id=clip.clip_id, frames=out)

"""Pure numpy implementations of the hot per-pixel kernels and the PRNG core.

These are the fallback used when the compiled extension is unavailable
(or when SIGNET_PURE_PY=1). Every function here is the semantic reference:
the Cython versions in _compiled.pyx must produce bit-identical output for
identical input, which tests/test_kernels_parity.py enforces.

Numeric conventions shared by both implementations:
  - luma:   floor(0.299*R + 0.587*G + 0.114*B + 0.5), BT.601 weights
  - resize: half-pixel-centered bilinear, src = (dst + 0.5)*scale - 0.5
            clamped to [0, size-1], output floor(value + 0.5)
  - median: exact k x k window median (sorted middle element), edge-replicated
            borders
  - PRNG:   xoshiro256** with the state update and output scramble from the
            reference C implementation; unit doubles are (x >> 11) * 2**-53
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_U53_SCALE = 2.0 ** -53


def to_luma_u8(rgb):
    r = rgb[:, :, 0].astype(np.float64)
    g = rgb[:, :, 1].astype(np.float64)
    b = rgb[:, :, 2].astype(np.float64)
    return np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5).astype(np.uint8)


def abs_diff_mask_u8(prev, cur, threshold):
    diff = np.abs(cur.astype(np.int32) - prev.astype(np.int32))
    return (diff > threshold).astype(np.uint8)


def median_filter_u8(img, k):
    if k == 1:
        return img.copy()
    pad = k // 2
    padded = np.pad(img, pad, mode="edge")
    windows = sliding_window_view(padded, (k, k))
    h, w = img.shape
    flat = windows.reshape(h, w, k * k)
    return np.sort(flat, axis=-1)[:, :, (k * k) // 2].copy()


def apply_mask_u8(frame, mask):
    return np.where(mask[:, :, None] != 0, frame, np.uint8(0))


def resize_bilinear_u8(src, out_h, out_w):
    in_h, in_w = src.shape[0], src.shape[1]
    scale_y = in_h / out_h
    scale_x = in_w / out_w

    sy = (np.arange(out_h, dtype=np.float64) + 0.5) * scale_y - 0.5
    sx = (np.arange(out_w, dtype=np.float64) + 0.5) * scale_x - 0.5
    sy = np.clip(sy, 0.0, in_h - 1.0)
    sx = np.clip(sx, 0.0, in_w - 1.0)

    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    fy = sy - y0
    fx = sx - x0
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)

    img = src.astype(np.float64)
    a = img[np.ix_(y0, x0)]
    b = img[np.ix_(y0, x1)]
    c = img[np.ix_(y1, x0)]
    d = img[np.ix_(y1, x1)]

    wx = fx[None, :, None]
    wy = fy[:, None, None]
    top = a * (1.0 - wx) + b * wx
    bot = c * (1.0 - wx) + d * wx
    val = top * (1.0 - wy) + bot * wy
    return np.floor(val + 0.5).astype(np.uint8)


def _rotl(x, r):
    return ((x << r) | (x >> (64 - r))) & 0xFFFFFFFFFFFFFFFF


def _xoshiro_next(s):
    """One xoshiro256** step on a 4-element python-int state list."""
    result = (_rotl((s[1] * 5) & 0xFFFFFFFFFFFFFFFF, 7) * 9) & 0xFFFFFFFFFFFFFFFF
    t = (s[1] << 17) & 0xFFFFFFFFFFFFFFFF
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def xoshiro_fill_u64(state, n):
    """Draw n raw u64 values; `state` is a uint64[4] ndarray updated in place."""
    s = [int(x) for x in state]
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        out[i] = _xoshiro_next(s)
    state[:] = s
    return out


def xoshiro_fill_unit(state, n):
    """Draw n doubles in [0, 1): top 53 bits of each u64, scaled by 2**-53."""
    raw = xoshiro_fill_u64(state, n)
    return ((raw >> np.uint64(11)).astype(np.float64)) * _U53_SCALE

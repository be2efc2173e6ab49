# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of signet.kernels._pure.

Same algorithms, same arithmetic, same rounding: output must be
bit-identical to the numpy fallback for every input. Scalar loops here
exist purely for speed on large frames and long parameter fills.
"""

from libc.math cimport floor
from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef unsigned char u8
ctypedef unsigned long long u64


def to_luma_u8(const u8[:, :, :] rgb):
    cdef Py_ssize_t h = rgb.shape[0], w = rgb.shape[1]
    cdef Py_ssize_t y, x
    cdef double lum
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef u8[:, :] out = out_arr
    for y in range(h):
        for x in range(w):
            lum = 0.299 * <double> rgb[y, x, 0] + 0.587 * <double> rgb[y, x, 1] \
                + 0.114 * <double> rgb[y, x, 2]
            out[y, x] = <u8> floor(lum + 0.5)
    return out_arr


def abs_diff_mask_u8(const u8[:, :] prev, const u8[:, :] cur, int threshold):
    cdef Py_ssize_t h = prev.shape[0], w = prev.shape[1]
    cdef Py_ssize_t y, x
    cdef int d
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef u8[:, :] out = out_arr
    for y in range(h):
        for x in range(w):
            d = <int> cur[y, x] - <int> prev[y, x]
            if d < 0:
                d = -d
            out[y, x] = 1 if d > threshold else 0
    return out_arr


def median_filter_u8(const u8[:, :] img, int k):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t y, x
    cdef int pad = k // 2
    cdef int dy, dx, yy, xx, n, i, j
    cdef u8 v
    cdef u8 *win
    if k == 1:
        return np.asarray(img).copy()
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef u8[:, :] out = out_arr
    win = <u8 *> malloc(k * k * sizeof(u8))
    if win == NULL:
        raise MemoryError()
    try:
        for y in range(h):
            for x in range(w):
                n = 0
                for dy in range(-pad, pad + 1):
                    yy = <int> y + dy
                    if yy < 0:
                        yy = 0
                    elif yy >= h:
                        yy = <int> h - 1
                    for dx in range(-pad, pad + 1):
                        xx = <int> x + dx
                        if xx < 0:
                            xx = 0
                        elif xx >= w:
                            xx = <int> w - 1
                        # insertion sort keeps the window ordered
                        v = img[yy, xx]
                        i = n
                        while i > 0 and win[i - 1] > v:
                            win[i] = win[i - 1]
                            i -= 1
                        win[i] = v
                        n += 1
                out[y, x] = win[(k * k) // 2]
    finally:
        free(win)
    return out_arr


def apply_mask_u8(const u8[:, :, :] frame, const u8[:, :] mask):
    cdef Py_ssize_t h = frame.shape[0], w = frame.shape[1]
    cdef Py_ssize_t y, x, c
    out_arr = np.zeros((h, w, 3), dtype=np.uint8)
    cdef u8[:, :, :] out = out_arr
    for y in range(h):
        for x in range(w):
            if mask[y, x] != 0:
                for c in range(3):
                    out[y, x, c] = frame[y, x, c]
    return out_arr


def resize_bilinear_u8(const u8[:, :, :] src, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t in_h = src.shape[0], in_w = src.shape[1], nc = src.shape[2]
    cdef double scale_y = <double> in_h / <double> out_h
    cdef double scale_x = <double> in_w / <double> out_w
    cdef Py_ssize_t y, x, c, y0, x0, y1, x1
    cdef double sy, sx, fy, fx, a, b, cc, d, top, bot, val
    out_arr = np.empty((out_h, out_w, nc), dtype=np.uint8)
    cdef u8[:, :, :] out = out_arr
    for y in range(out_h):
        sy = (<double> y + 0.5) * scale_y - 0.5
        if sy < 0.0:
            sy = 0.0
        elif sy > <double> (in_h - 1):
            sy = <double> (in_h - 1)
        y0 = <Py_ssize_t> floor(sy)
        fy = sy - <double> y0
        y1 = y0 + 1
        if y1 > in_h - 1:
            y1 = in_h - 1
        for x in range(out_w):
            sx = (<double> x + 0.5) * scale_x - 0.5
            if sx < 0.0:
                sx = 0.0
            elif sx > <double> (in_w - 1):
                sx = <double> (in_w - 1)
            x0 = <Py_ssize_t> floor(sx)
            fx = sx - <double> x0
            x1 = x0 + 1
            if x1 > in_w - 1:
                x1 = in_w - 1
            for c in range(nc):
                a = <double> src[y0, x0, c]
                b = <double> src[y0, x1, c]
                cc = <double> src[y1, x0, c]
                d = <double> src[y1, x1, c]
                top = a * (1.0 - fx) + b * fx
                bot = cc * (1.0 - fx) + d * fx
                val = top * (1.0 - fy) + bot * fy
                out[y, x, c] = <u8> floor(val + 0.5)
    return out_arr


cdef inline u64 _rotl(u64 x, int r) noexcept nogil:
    return (x << r) | (x >> (64 - r))


def xoshiro_fill_u64(u64[:] state, Py_ssize_t n):
    cdef u64 s0 = state[0], s1 = state[1], s2 = state[2], s3 = state[3]
    cdef u64 result, t
    cdef Py_ssize_t i
    out_arr = np.empty(n, dtype=np.uint64)
    cdef u64[:] out = out_arr
    for i in range(n):
        result = _rotl(s1 * <u64> 5, 7) * <u64> 9
        t = s1 << 17
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        out[i] = result
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return out_arr


def xoshiro_fill_unit(u64[:] state, Py_ssize_t n):
    cdef u64 s0 = state[0], s1 = state[1], s2 = state[2], s3 = state[3]
    cdef u64 result, t
    cdef Py_ssize_t i
    cdef double scale = 2.0 ** -53
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[:] out = out_arr
    for i in range(n):
        result = _rotl(s1 * <u64> 5, 7) * <u64> 9
        t = s1 << 17
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        out[i] = <double> (result >> 11) * scale
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return out_arr

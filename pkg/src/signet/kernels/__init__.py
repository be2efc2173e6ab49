"""Hot-loop kernels with a compiled (Cython) core and a pure numpy fallback.

The implementation is picked once at import time: the compiled extension if
it built and imported cleanly, otherwise the numpy fallback. Setting
SIGNET_PURE_PY=1 forces the fallback. Both paths are bit-identical by
contract (see tests/test_kernels.py and benchmarks/bench_kernels.py).
"""

import os

from . import _pure

BACKEND = "pure"

if os.environ.get("SIGNET_PURE_PY", "") != "1":
    try:
        from . import _compiled as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
else:
    _impl = _pure

to_luma_u8 = _impl.to_luma_u8
abs_diff_mask_u8 = _impl.abs_diff_mask_u8
median_filter_u8 = _impl.median_filter_u8
apply_mask_u8 = _impl.apply_mask_u8
resize_bilinear_u8 = _impl.resize_bilinear_u8
xoshiro_fill_u64 = _impl.xoshiro_fill_u64
xoshiro_fill_unit = _impl.xoshiro_fill_unit

__all__ = [
    "BACKEND",
    "to_luma_u8",
    "abs_diff_mask_u8",
    "median_filter_u8",
    "apply_mask_u8",
    "resize_bilinear_u8",
    "xoshiro_fill_u64",
    "xoshiro_fill_unit",
]

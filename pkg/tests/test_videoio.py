"""Frame I/O: PPM/PGM codecs, natural ordering, sampling, resize."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signet import videoio
from signet.videoio import (ClipError, FrameClip, SamplingPlan, load_clip,
                            natural_key, read_pgm, read_ppm, resize_bilinear,
                            sample_clip, uniform_sample, write_pgm, write_ppm)
from signet.rng import Xoshiro256StarStar

from conftest import random_frames, write_clip


def test_ppm_round_trip(tmp_path, rng):
    frame = random_frames(rng, 1, 6, 4)[0]
    p = tmp_path / "f.ppm"
    write_ppm(str(p), frame)
    assert np.array_equal(read_ppm(str(p)), frame)


def test_ppm_header_comments_tolerated(tmp_path):
    p = tmp_path / "c.ppm"
    p.write_bytes(b"P6\n# a comment\n2 1\n# another\n255\n" + bytes([1, 2, 3, 4, 5, 6]))
    frame = read_ppm(str(p))
    assert frame.shape == (1, 2, 3)
    assert frame[0, 0].tolist() == [1, 2, 3]


def test_ppm_bad_magic_rejected(tmp_path):
    p = tmp_path / "b.ppm"
    p.write_bytes(b"P5\n1 1\n255\n\x00")
    with pytest.raises(ClipError):
        read_ppm(str(p))


def test_ppm_truncated_pixels_rejected(tmp_path):
    p = tmp_path / "t.ppm"
    p.write_bytes(b"P6\n2 2\n255\n\x00\x00\x00")
    with pytest.raises(ClipError, match="truncated"):
        read_ppm(str(p))


def test_pgm_round_trip(tmp_path, rng):
    img = (rng.fill_unit(12).reshape(3, 4) * 255).astype(np.uint8)
    p = tmp_path / "g.pgm"
    write_pgm(str(p), img)
    assert np.array_equal(read_pgm(str(p)), img)


def test_natural_sort_orders_numerically():
    names = ["frame10.ppm", "frame2.ppm", "frame1.ppm"]
    assert sorted(names, key=natural_key) == ["frame1.ppm", "frame2.ppm", "frame10.ppm"]


def test_natural_sort_mixed_names_stable():
    names = ["b.ppm", "10.ppm", "a.ppm", "2.ppm"]
    ordered = sorted(names, key=natural_key)
    assert ordered == ["2.ppm", "10.ppm", "a.ppm", "b.ppm"]


def test_load_clip_natural_order(tmp_path):
    frames = np.stack([np.full((2, 2, 3), v, dtype=np.uint8) for v in (7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17)])
    d = tmp_path / "clip"
    d.mkdir()
    # write with names whose lexicographic order differs from numeric order
    for i in range(11):
        write_ppm(str(d / f"{i}.ppm"), frames[i])
    clip = load_clip(str(d), clip_id="c")
    assert [int(clip.frames[t, 0, 0, 0]) for t in range(11)] == list(range(7, 18))


def test_load_clip_empty_dir_raises(tmp_path):
    d = tmp_path / "empty"
    d.mkdir()
    with pytest.raises(ClipError, match="no raster frames"):
        load_clip(str(d))


def test_load_clip_dimension_mismatch_names_file(tmp_path, rng):
    d = tmp_path / "clip"
    write_clip(d, random_frames(rng, 2, 4, 4))
    write_ppm(str(d / "002.ppm"), random_frames(rng, 1, 3, 4)[0])
    with pytest.raises(ClipError, match="002.ppm"):
        load_clip(str(d))


def test_frame_clip_is_read_only(rng):
    clip = FrameClip(clip_id="x", frames=random_frames(rng, 2, 3, 3))
    with pytest.raises(ValueError):
        clip.frames[0, 0, 0, 0] = 1


def test_sampling_plan_validation():
    assert SamplingPlan(frames_per_clip=12).frames_per_clip == 12
    with pytest.raises(ValueError):
        SamplingPlan(frames_per_clip=0)


# --- uniform_sample ---------------------------------------------------------

def test_uniform_sample_examples():
    assert uniform_sample(10, 2) == [0, 5]
    assert uniform_sample(13, 2) == [0, 6]
    assert uniform_sample(5, 5) == [0, 1, 2, 3, 4]
    assert uniform_sample(3, 6) == [0, 0, 1, 1, 2, 2]
    assert uniform_sample(24, 12) == list(range(0, 24, 2))


def test_uniform_sample_rejects_bad_args():
    with pytest.raises(ValueError):
        uniform_sample(0, 2)
    with pytest.raises(ValueError):
        uniform_sample(5, 0)


@given(st.integers(min_value=1, max_value=500), st.integers(min_value=1, max_value=100))
@settings(max_examples=200)
def test_uniform_sample_bounds_and_monotonicity(total, n):
    idx = uniform_sample(total, n)
    assert len(idx) == n
    assert idx[0] == 0
    assert all(0 <= i < total for i in idx)
    assert all(a <= b for a, b in zip(idx, idx[1:]))


def test_nested_selection_equals_direct_when_divisible():
    # picking n of m cached rows (m = k*n) lands on exactly the rows direct
    # sampling of the original t frames would pick
    for t in (24, 30, 100):
        for m, n in ((24, 12), (24, 4), (24, 2), (12, 4)):
            direct = uniform_sample(t, n)
            cached = uniform_sample(t, m)
            nested = [cached[i] for i in uniform_sample(m, n)]
            assert nested == direct, (t, m, n)


def test_sample_clip_picks_rows(rng):
    frames = random_frames(rng, 10, 2, 2)
    clip = FrameClip(clip_id="c", frames=frames)
    out = sample_clip(clip, 2)
    assert len(out) == 2
    assert np.array_equal(out.frames[0], frames[0])
    assert np.array_equal(out.frames[1], frames[5])


# --- resize -----------------------------------------------------------------

def test_resize_identity_returns_equal_pixels(rng):
    frame = random_frames(rng, 1, 6, 5)[0]
    assert np.array_equal(resize_bilinear(frame, 5, 6), frame)


def test_resize_2d_input_round_trips_shape(rng):
    img = (rng.fill_unit(30).reshape(5, 6) * 255).astype(np.uint8)
    out = resize_bilinear(img, 3, 4)
    assert out.shape == (4, 3)


def test_resize_rejects_degenerate_size(rng):
    frame = random_frames(rng, 1, 4, 4)[0]
    with pytest.raises(ValueError):
        resize_bilinear(frame, 0, 4)

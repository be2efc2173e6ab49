"""Procedural clip generator for tests and demos: temporal-order classes.

Each class is a trajectory of a bright square over 12 positions arranged
on a circle. Four trajectory entries are the same for every class --
path[0]=0, path[1]=1, path[12]=6, path[13]=7 -- which makes the two
frames a 2-frame sampling plan sees (after frame differencing: rows 0 and
12 of 24) class-ambiguous by construction, while denser plans see
class-specific motion. Any two class trajectories differ in at least 8 of
the 10 free odd positions, so 12-frame sampling has plenty of signal.

Per-clip nuisance variation (background and foreground intensity, +-1 px
jitter, +-2 intensity noise) forces heads to generalize rather than match
pixels; the differencing threshold of 50 cleanly separates noise (<= 4)
from object motion (>= 135).

Everything is driven by the package PRNG, so a given seed always yields
byte-identical frames and manifest.
"""

import math
import os

import numpy as np

from . import manifest as manifest_mod
from . import videoio
from .rng import Xoshiro256StarStar, derive_seed

CLASS_NAMES = ("cat", "dog", "mouse", "bear", "love",
               "horse", "bird", "fish", "frog", "deer")
CLIPS_PER_CLASS = 15
TRAIN_PER_CLASS = 10
FRAMES_PER_CLIP = 25
FRAME_SIZE = 32
NUM_SLOTS = 12
SQUARE = 6          # object side length in pixels
RING_RADIUS = 10

# (frame index, slot) pairs identical across classes; the sampled rows at
# N=2 depend only on these, which is what keeps 2 frames uninformative.
FIXED_STEPS = {0: 0, 1: 1, 12: 6, 13: 7}
FREE_ODD_STEPS = (3, 5, 7, 9, 11, 15, 17, 19, 21, 23)
MIN_ODD_HAMMING = 8

BG_RANGE = (25, 55)
FG_RANGE = (190, 250)
NOISE = 2
JITTER = 1


def slot_centers(size=FRAME_SIZE, slots=NUM_SLOTS, radius=RING_RADIUS):
    """Pixel centers of the object positions, on a circle."""
    c = size / 2.0
    out = []
    for s in range(slots):
        ang = 2.0 * math.pi * s / slots
        out.append((int(round(c + radius * math.sin(ang))),
                    int(round(c + radius * math.cos(ang)))))
    return out


def _circ_dist(a, b, n=NUM_SLOTS):
    d = abs(a - b) % n
    return min(d, n - d)


def _draw_path(rng):
    path = [None] * FRAMES_PER_CLIP
    for t, slot in FIXED_STEPS.items():
        path[t] = slot
    for t in range(FRAMES_PER_CLIP):
        if path[t] is not None:
            continue
        allowed = []
        for s in range(NUM_SLOTS):
            if _circ_dist(s, path[t - 1]) < 2:
                continue
            nxt = path[t + 1] if t + 1 < FRAMES_PER_CLIP and path[t + 1] is not None else None
            if nxt is not None and _circ_dist(s, nxt) < 2:
                continue
            allowed.append(s)
        path[t] = allowed[rng.randint(0, len(allowed) - 1)]
    return path


def class_paths(seed):
    """One trajectory per class, pairwise distinct on the free odd steps."""
    rng = Xoshiro256StarStar(derive_seed(str(seed), "synth", "paths"))
    paths = []
    attempts = 0
    while len(paths) < len(CLASS_NAMES):
        cand = _draw_path(rng)
        ok = all(
            sum(1 for t in FREE_ODD_STEPS if cand[t] != prev[t]) >= MIN_ODD_HAMMING
            for prev in paths)
        if ok:
            paths.append(cand)
        attempts += 1
        if attempts > 10000:
            raise RuntimeError("could not draw sufficiently distinct class paths")
    return paths


def render_clip(path, rng, size=FRAME_SIZE):
    """Frames (T, size, size, 3) uint8 for one clip of a class trajectory."""
    centers = slot_centers(size=size)
    bg = rng.randint(*BG_RANGE)
    fg = rng.randint(*FG_RANGE)
    half = SQUARE // 2
    frames = np.empty((len(path), size, size, 3), dtype=np.uint8)
    for t, slot in enumerate(path):
        cy, cx = centers[slot]
        cy += rng.randint(-JITTER, JITTER)
        cx += rng.randint(-JITTER, JITTER)
        img = np.full((size, size), bg, dtype=np.int32)
        y0, y1 = max(0, cy - half), min(size, cy + half)
        x0, x1 = max(0, cx - half), min(size, cx + half)
        img[y0:y1, x0:x1] = fg
        noise = rng.fill_unit(size * size).reshape(size, size)
        img += (noise * (2 * NOISE + 1)).astype(np.int32) - NOISE
        gray = np.clip(img, 0, 255).astype(np.uint8)
        frames[t] = gray[:, :, None]
    return frames


def generate(out_dir, seed=2024, size=FRAME_SIZE):
    """Write the full dataset under out_dir; returns the manifest path.

    Layout: out_dir/<label>/<clip_id>/NNN.ppm plus out_dir/manifest.jsonl
    with 10 train and 5 test clips per class.
    """
    if size < 8:
        raise ValueError(f"frame size must be >= 8, got {size}")
    paths = class_paths(seed)
    records = []
    for cls, label in enumerate(CLASS_NAMES):
        for idx in range(CLIPS_PER_CLASS):
            clip_id = f"{label}{idx:02d}"
            rel = os.path.join(label, clip_id)
            rng = Xoshiro256StarStar(derive_seed(str(seed), "synth", label, str(idx)))
            frames = render_clip(paths[cls], rng, size=size)
            frame_dir = os.path.join(out_dir, rel)
            os.makedirs(frame_dir, exist_ok=True)
            for t in range(frames.shape[0]):
                videoio.write_ppm(os.path.join(frame_dir, f"{t:03d}.ppm"), frames[t])
            records.append(manifest_mod.SampleRecord(
                clip_id=clip_id,
                frames_dir=rel,
                label=label,
                signer_id=f"synth{idx:02d}",
                split="train" if idx < TRAIN_PER_CLASS else "test",
            ))
    man = manifest_mod.DatasetManifest(
        records=tuple(records),
        labels=manifest_mod.LabelSet(names=CLASS_NAMES))
    path = os.path.join(out_dir, "manifest.jsonl")
    manifest_mod.save_manifest(path, man, header_comment="synthetic gesture dataset")
    return path

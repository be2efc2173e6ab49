"""Clip-to-features provisioning: preprocessing, sampling, and the cache.

The expensive step is running the feature backend, so embeddings are
computed once per (clip, preprocessing variant, frame count) and stored
under:

    <cache_dir>/<variant>/n<frames>/<clip_id>.<backend>.feat

where variant is "raw" or "pre-t<threshold>-k<blur>". Preprocessing runs
on the full clip before any temporal sampling -- frame differencing needs
consecutive frames -- and drops the first frame, so a T-frame clip yields
T-1 candidate frames.

When a head needs n frames and a cached sequence with m rows exists where
n divides m, rows floor(i*m/n) of the cached sequence are exactly the
frames direct sampling would have picked, so sweeps featurize once at the
largest grid entry and slice for the smaller ones.
"""

import os

from . import binio, features, preprocess, videoio


def variant_name(subtractor=None):
    """Cache bucket for a preprocessing choice."""
    if subtractor is None:
        return "raw"
    return f"pre-t{subtractor.threshold}-k{subtractor.blur_kernel}"


def prepared_frame_count(clip_len, subtractor=None):
    """Frames available for sampling after optional preprocessing."""
    if subtractor is None:
        return clip_len
    if clip_len < 2:
        raise videoio.ClipError(
            f"frame differencing needs at least 2 frames, clip has {clip_len}")
    return clip_len - 1


def featurize_clip(frames_dir, clip_id, extractor, spec, n_frames, subtractor=None):
    """Load, optionally preprocess, sample n_frames, and embed one clip."""
    clip = videoio.load_clip(frames_dir, clip_id=clip_id)
    if subtractor is not None:
        clip = preprocess.preprocess_clip(clip, subtractor)
    sampled = videoio.sample_clip(clip, n_frames)
    return features.extract_clip_embeddings(sampled, extractor, spec)


def select_rows(seq, n):
    """Uniformly pick n rows of a cached sequence (floor(i*t/n))."""
    if n == seq.t:
        return seq
    idx = videoio.uniform_sample(seq.t, n)
    return features.EmbeddingSequence(
        clip_id=seq.clip_id,
        vectors=seq.vectors[idx].copy(),
        backend_name=seq.backend_name)


def source_length(n, n_max):
    """Length to featurize at so n rows can be sliced out exactly."""
    return n_max if n_max % n == 0 else n


def provision_features(records, root, extractor, spec, n_frames,
                       subtractor=None, cache_dir=None, progress=None):
    """Embeddings for every record at n_frames rows; returns {clip_id: seq}.

    With cache_dir set, valid cached sequences are reused and fresh ones
    written; unreadable or corrupt cache files are silently rebuilt.
    progress, if given, is called with (done, total, clip_id).
    """
    bucket = None
    if cache_dir is not None:
        bucket = os.path.join(cache_dir, variant_name(subtractor), f"n{n_frames}")
    out = {}
    for done, rec in enumerate(records):
        seq = None
        if bucket is not None:
            try:
                seq = features.read_cache(bucket, rec.clip_id, spec.name)
                if seq.t != n_frames or seq.d != spec.embedding_dim:
                    seq = None
            except FileNotFoundError:
                seq = None
            except (OSError, binio.FormatError):
                seq = None
        if seq is None:
            seq = featurize_clip(
                os.path.join(root, rec.frames_dir), rec.clip_id,
                extractor, spec, n_frames, subtractor=subtractor)
            if bucket is not None:
                features.write_cache(seq, bucket)
        out[rec.clip_id] = seq
        if progress is not None:
            progress(done + 1, len(records), rec.clip_id)
    return out


def labeled_set(records, feats, labels, n=None):
    """Pair sequences with integer labels: [(EmbeddingSequence, class_id)].

    With n set, each sequence is sliced to n rows first.
    """
    out = []
    for rec in records:
        seq = feats[rec.clip_id]
        if n is not None:
            seq = select_rows(seq, n)
        out.append((seq, labels.index(rec.label)))
    return out

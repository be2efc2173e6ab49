"""Command-line entry point: featurize | train | eval | sweep | synth.

Exit codes: 0 success, 2 configuration/usage errors (bad flags, missing
files, malformed manifests), 1 runtime failures (backend, training, I/O).
A sweep with some failed cells still writes the completed cells and exits
1. The feature cache lives under <root>/.feature-cache unless the
SIGNET_CACHE_DIR environment variable points elsewhere.
"""

import argparse
import json
import os
import re
import sys
from dataclasses import asdict, replace

import numpy as np

from . import binio, evaluate, features, manifest as manifest_mod
from . import nets, pipeline, preprocess, sweep as sweep_mod, synth, videoio

CACHE_ENV = "SIGNET_CACHE_DIR"
DEFAULT_FRAME_GRID = "2,4,12,24"


class ConfigError(Exception):
    """Raised for problems argparse cannot catch; mapped to exit 2."""


def _parse_int_list(text, flag):
    try:
        vals = [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise ConfigError(f"{flag} values must be >= 1, got {text!r}")
    return vals


def _parse_heads(text):
    heads = [h.strip() for h in text.split(",") if h.strip()]
    for h in heads:
        if h not in nets.HEAD_KINDS:
            raise ConfigError(f"unknown head {h!r} (choose from {', '.join(nets.HEAD_KINDS)})")
    if not heads:
        raise ConfigError("--heads is empty")
    return heads


def _extractor_from_name(name):
    """Rebuild a mock/tiny extractor from its recorded backend name."""
    m = re.fullmatch(r"mock-(\d+)-(\d+)", name)
    if m:
        return features.MockExtractor(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"tiny(\d+)", name)
    if m:
        return features.TinyBackend(int(m.group(1)))
    return None


def _resolve_backend(args):
    """Map --mock-features/--backend to (extractor, BackendSpec)."""
    if getattr(args, "mock_features", None):
        m = re.fullmatch(r"(\d+):(\d+)", args.mock_features)
        if not m:
            raise ConfigError(
                f"--mock-features expects SEED:DIM (e.g. 7:64), got {args.mock_features!r}")
        ext = features.MockExtractor(int(m.group(1)), int(m.group(2)))
        return ext, ext.spec
    name = getattr(args, "backend", None)
    if not name:
        raise ConfigError("give a feature backend: --backend or --mock-features")
    ext = _extractor_from_name(name)
    if ext is not None:
        return ext, ext.spec
    if name.endswith(".json"):
        if not os.path.isfile(name):
            raise ConfigError(f"backend sidecar not found: {name}")
        spec = features.load_sidecar(name)
    elif name in features.PRESETS:
        base = features.PRESETS[name]
        model = f"{name}.onnx"
        if not os.path.isfile(model):
            raise ConfigError(
                f"preset {name!r} needs {model} in the working directory "
                f"(or pass the sidecar JSON path)")
        spec = replace(base, model_path=model)
    else:
        raise ConfigError(
            f"unknown backend {name!r}: pass a preset ({', '.join(sorted(features.PRESETS))}), "
            f"a sidecar .json path, tiny<G>, or use --mock-features")
    try:
        return features.OnnxBackend(spec), spec
    except features.BackendError as e:
        raise ConfigError(str(e))


def _subtractor_from(args):
    if not getattr(args, "preprocess", False):
        return None
    return preprocess.SubtractorConfig(
        threshold=args.threshold, blur_kernel=args.blur_kernel)


def _load_manifest(args):
    if not os.path.isfile(args.manifest):
        raise ConfigError(f"manifest file not found: {args.manifest}")
    try:
        man = manifest_mod.load_manifest(args.manifest)
    except manifest_mod.ManifestError as e:
        raise ConfigError(f"{args.manifest}: {e}")
    root = args.root or os.path.dirname(os.path.abspath(args.manifest))
    return man, root


def _cache_dir(root):
    return os.environ.get(CACHE_ENV) or os.path.join(root, ".feature-cache")


def _train_config(args):
    try:
        return nets.TrainConfig(
            learning_rate=args.lr, epochs=args.epochs,
            batch_size=args.batch, seed=args.seed)
    except ValueError as e:
        raise ConfigError(str(e))


def _add_dataset_flags(p, preprocessing=True):
    p.add_argument("--manifest", required=True, help="dataset manifest (JSON lines)")
    p.add_argument("--root", default=None,
                   help="data root for frames_dir entries (default: manifest directory)")
    p.add_argument("--backend", default=None,
                   help="feature backend: preset name, sidecar .json, or tiny<G>")
    p.add_argument("--mock-features", default=None, metavar="SEED:DIM",
                   help="hash-based mock backend (tests/CI)")
    if preprocessing:
        p.add_argument("--preprocess", action="store_true",
                       help="apply frame differencing + median-filtered masking")
        p.add_argument("--threshold", type=int, default=50,
                       help="luma difference threshold (default 50)")
        p.add_argument("--blur-kernel", type=int, default=5,
                       help="median filter size, odd (default 5)")


def _add_train_flags(p):
    p.add_argument("--lr", type=float, default=1e-3, help="learning rate (default 1e-3)")
    p.add_argument("--epochs", type=int, default=50, help="training epochs (default 50)")
    p.add_argument("--batch", type=int, default=10, help="minibatch size (default 10)")
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="signet",
        description="Dynamic-gesture clip classification: feature extraction, "
                    "training, evaluation, and sequence-length sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="fill the on-disk feature cache")
    _add_dataset_flags(p)
    p.add_argument("--frames", type=int, default=24,
                   help="frames sampled per clip (default 24)")

    p = sub.add_parser("train", help="train one head and write a checkpoint")
    _add_dataset_flags(p)
    p.add_argument("--frames", type=int, default=12,
                   help="frames sampled per clip (default 12)")
    p.add_argument("--heads", default="lstm", help="head kind: mlp or lstm")
    _add_train_flags(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("eval", help="score a checkpoint on the test split")
    _add_dataset_flags(p, preprocessing=False)
    p.add_argument("--checkpoint", required=True, help="checkpoint file from train")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sweep", help="grid over frames-per-clip x heads")
    _add_dataset_flags(p)
    p.add_argument("--frames", default=DEFAULT_FRAME_GRID,
                   help=f"comma list of frame counts (default {DEFAULT_FRAME_GRID})")
    p.add_argument("--heads", default="mlp,lstm", help="comma list of head kinds")
    _add_train_flags(p)
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel training cells (default 1)")

    p = sub.add_parser("synth", help="generate the synthetic benchmark dataset")
    p.add_argument("--out", required=True, help="dataset output directory")
    p.add_argument("--seed", type=int, default=2024, help="generator seed (default 2024)")
    p.add_argument("--size", type=int, default=synth.FRAME_SIZE,
                   help=f"square frame size >= 8 (default {synth.FRAME_SIZE})")
    return ap


def _cmd_featurize(args):
    man, root = _load_manifest(args)
    extractor, spec = _resolve_backend(args)
    sub = _subtractor_from(args)
    cache = _cache_dir(root)
    pipeline.provision_features(
        man.records, root, extractor, spec, args.frames,
        subtractor=sub, cache_dir=cache)
    print(f"cached {len(man.records)} clips x {args.frames} frames "
          f"({spec.name}, {pipeline.variant_name(sub)}) under {cache}")
    return 0


def _cmd_train(args):
    man, root = _load_manifest(args)
    heads = _parse_heads(args.heads)
    if len(heads) != 1:
        raise ConfigError("train takes exactly one head; use sweep for several")
    head = heads[0]
    extractor, spec = _resolve_backend(args)
    sub = _subtractor_from(args)
    cfg = _train_config(args)

    feats = pipeline.provision_features(
        man.records, root, extractor, spec, args.frames,
        subtractor=sub, cache_dir=_cache_dir(root))
    train_records, test_records = manifest_mod.split(man)
    if not train_records:
        raise ConfigError("manifest has no train records")
    train_set = pipeline.labeled_set(train_records, feats, man.labels)
    eval_set = pipeline.labeled_set(test_records, feats, man.labels) or None

    params, history = nets.train(head, train_set, cfg, man.labels.k, eval_set=eval_set)

    os.makedirs(args.out, exist_ok=True)
    ckpt = os.path.join(args.out, "model.ckpt")
    nets.save_checkpoint(ckpt, head, params, cfg, extra={
        "backend": spec.name,
        "frames_per_clip": args.frames,
        "variant": pipeline.variant_name(sub),
        "subtractor": None if sub is None else
            {"threshold": sub.threshold, "blur_kernel": sub.blur_kernel},
        "label_names": list(man.labels.names),
    })
    sweep_mod.write_history_csv(os.path.join(args.out, "history.csv"), asdict(history))
    final = history.test_accuracy[-1] if history.test_accuracy else None
    print(f"trained {head} (N={args.frames}, {spec.name}) -> {ckpt}")
    print(f"final train accuracy {history.train_accuracy[-1]:.4f}"
          + (f", test accuracy {final:.4f}" if final is not None else ""))
    return 0


def _cmd_eval(args):
    man, root = _load_manifest(args)
    if not os.path.isfile(args.checkpoint):
        raise ConfigError(f"checkpoint not found: {args.checkpoint}")
    try:
        kind, params, header = nets.load_checkpoint(args.checkpoint)
    except binio.FormatError as e:
        raise ConfigError(f"unreadable checkpoint: {e}")

    backend_name = header.get("backend")
    n_frames = header.get("frames_per_clip")
    if backend_name is None or n_frames is None:
        raise ConfigError(
            f"{args.checkpoint}: header lacks backend/frames_per_clip; "
            f"re-train with this tool's train command")
    if args.backend or args.mock_features:
        extractor, spec = _resolve_backend(args)
        if spec.name != backend_name:
            raise ConfigError(
                f"checkpoint was trained on backend {backend_name!r}, "
                f"but {spec.name!r} was given")
    else:
        extractor = _extractor_from_name(backend_name)
        if extractor is None:
            raise ConfigError(
                f"backend {backend_name!r} needs its sidecar: pass --backend <path.json>")
        spec = extractor.spec
    sub = None
    if header.get("subtractor"):
        sub = preprocess.SubtractorConfig(
            threshold=header["subtractor"]["threshold"],
            blur_kernel=header["subtractor"]["blur_kernel"])

    feats = pipeline.provision_features(
        man.records, root, extractor, spec, n_frames,
        subtractor=sub, cache_dir=_cache_dir(root))
    train_records, test_records = manifest_mod.split(man)
    if not test_records:
        raise ConfigError("manifest has no test records to evaluate")

    metrics = {"backend": spec.name, "frames_per_clip": n_frames,
               "head": kind, "variant": pipeline.variant_name(sub)}
    os.makedirs(args.out, exist_ok=True)
    for name, records in (("train", train_records), ("test", test_records)):
        if not records:
            continue
        ds = pipeline.labeled_set(records, feats, man.labels)
        x = np.stack([s.vectors for s, _ in ds]).astype(np.float64)
        y = [lab for _, lab in ds]
        preds, _ = nets.predict_batch(params, x)
        cm = evaluate.confusion(preds, y, man.labels)
        metrics[f"{name}_accuracy"] = cm.accuracy()
        if name == "test":
            sweep_mod.write_confusion_csv(
                os.path.join(args.out, "confusion.csv"),
                cm.counts.tolist(), man.labels.names)
            videoio.write_pgm(os.path.join(args.out, "confusion.pgm"),
                              sweep_mod.heatmap_u8(cm.counts))
            worst = evaluate.top_confusions(cm, 5)
            metrics["top_confusions"] = [list(w) for w in worst]
    blob = json.dumps(metrics, sort_keys=True, indent=2) + "\n"
    binio.write_atomic(os.path.join(args.out, "metrics.json"), blob.encode("utf-8"))
    print(f"test accuracy {metrics['test_accuracy']:.4f} "
          f"({kind}, N={n_frames}, {spec.name}) -> {args.out}")
    return 0


def _cmd_sweep(args):
    man, root = _load_manifest(args)
    frames = _parse_int_list(args.frames, "--frames")
    heads = _parse_heads(args.heads)
    if args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    extractor, spec = _resolve_backend(args)
    sub = _subtractor_from(args)
    cfg = _train_config(args)

    report = sweep_mod.run_sweep(
        man, root, extractor, spec, frames, heads, cfg,
        subtractor=sub, cache_dir=_cache_dir(root), workers=args.workers)
    sweep_mod.emit_report(report, args.out)

    failed = [c for c in report.cells if c.error is not None]
    for cell in report.cells:
        if cell.error is None:
            print(f"{cell.head:>4} N={cell.frames:<3} "
                  f"train {cell.train_accuracy:.4f}  test {cell.test_accuracy:.4f}")
        else:
            print(f"{cell.head:>4} N={cell.frames:<3} FAILED: {cell.error}",
                  file=sys.stderr)
    print(f"report written to {os.path.join(args.out, sweep_mod.REPORT_FILENAME)}")
    return 1 if failed else 0


def _cmd_synth(args):
    try:
        path = synth.generate(args.out, seed=args.seed, size=args.size)
    except ValueError as e:
        raise ConfigError(str(e))
    print(f"synthetic dataset written: {path}")
    return 0


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    handler = {
        "featurize": _cmd_featurize,
        "train": _cmd_train,
        "eval": _cmd_eval,
        "sweep": _cmd_sweep,
        "synth": _cmd_synth,
    }[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (videoio.ClipError, features.BackendError, binio.FormatError,
            manifest_mod.ManifestError, OSError, ValueError,
            FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: signet-export.

    signet-export export --arch densenet201 --out models/ [--probe img.png]

Writes <arch>.onnx and <arch>.sidecar.json (and with --probe the native
reference embedding <arch>.probe.feat) under the output directory.
Exit codes: 0 success, 1 runtime failure (weights, export, verification),
2 usage errors.
"""

import argparse
import os
import sys

from . import ExporterError, UnsupportedArchitectureError
from . import archs, export, probe


def build_parser():
    ap = argparse.ArgumentParser(
        prog="signet-export",
        description="Export pretrained backbones for the signet runtime.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="export one architecture + sidecar")
    p.add_argument("--arch", required=True,
                   help=f"one of: {', '.join(sorted(archs.SUPPORTED))}")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--probe", default=None, metavar="IMAGE",
                   help="also write a native reference embedding of IMAGE")
    p.add_argument("--random-weights", action="store_true",
                   help="skip the zoo download; random weights (testing only)")
    return ap


def _cmd_export(args):
    try:
        info = archs.info(args.arch)
    except UnsupportedArchitectureError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.probe is not None and not os.path.isfile(args.probe):
        print(f"error: probe image not found: {args.probe}", file=sys.stderr)
        return 2

    pretrained = not args.random_weights
    model = archs.build(args.arch, pretrained=pretrained)
    model_path, sidecar_path = export.export_model(
        args.arch, args.out, pretrained=pretrained, model=model)
    print(f"wrote {model_path}")
    print(f"wrote {sidecar_path} (embedding_dim {info.embedding_dim}, "
          f"input {info.input_size[0]}x{info.input_size[1]})")
    if args.probe is not None:
        out = probe.parity_probe(model_path, args.probe, model=model)
        print(f"wrote {out}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return {"export": _cmd_export}[args.command](args)
    except ExporterError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

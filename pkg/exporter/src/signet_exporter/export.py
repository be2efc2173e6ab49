"""ONNX export with output-shape verification and sidecar emission."""

import json
import os

from . import ExportVerificationError
from . import archs, onnxwire

OPSET = 17


def _export_onnx(model, example, out_path, opset=OPSET):
    import torch

    # The TorchScript exporter finishes by inlining functions from the
    # optional onnxscript package; without it installed that step must be
    # the identity on the serialized bytes.
    try:
        import onnxscript  # noqa: F401
    except ImportError:
        from torch.onnx._internal.torchscript_exporter import onnx_proto_utils
        onnx_proto_utils._add_onnxscript_fn = lambda model_bytes, custom_opsets: model_bytes

    kwargs = dict(input_names=["image"], output_names=["embedding"],
                  opset_version=opset)
    try:
        torch.onnx.export(model, (example,), out_path, dynamo=False, **kwargs)
    except TypeError:
        # older torch without the dynamo switch
        torch.onnx.export(model, (example,), out_path, **kwargs)


def verify_model_file(path, expected_dim):
    """Check the exported graph: one image input, one (1, D) output.

    Returns the measured output width; raises ExportVerificationError on
    any contract violation.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        inputs, outputs = onnxwire.graph_io(raw)
        width = onnxwire.output_width(raw)
    except onnxwire.WireError as e:
        raise ExportVerificationError(f"{path}: {e}") from e
    if len(inputs) != 1:
        raise ExportVerificationError(
            f"{path}: expected one graph input, found {len(inputs)}")
    if width != expected_dim:
        raise ExportVerificationError(
            f"{path}: graph output width {width} != expected {expected_dim} "
            f"(output {outputs[0][0]!r} dims {outputs[0][1]})")
    return width


def write_sidecar(path, info, measured_dim, model_filename):
    """Preprocessing sidecar consumed by the runtime's backend loader."""
    obj = {
        "name": info.name,
        "input_size": list(info.input_size),
        "means": list(info.channel_means),
        "stds": list(info.channel_stds),
        "value_scale": info.value_scale,
        "embedding_dim": int(measured_dim),
        "model_path": model_filename,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def export_model(arch, out_dir, pretrained=True, model=None):
    """Export one architecture; returns (model_path, sidecar_path).

    Writes <arch>.onnx and <arch>.sidecar.json under out_dir. The sidecar
    records the width measured from the exported graph, which must match
    the architecture's published value. A pre-built module can be passed
    to skip the zoo lookup.
    """
    import torch

    info = archs.info(arch)
    if model is None:
        model = archs.build(arch, pretrained=pretrained)
    os.makedirs(out_dir, exist_ok=True)
    model_path = os.path.join(out_dir, f"{arch}.onnx")
    w, h = info.input_size
    with torch.no_grad():
        _export_onnx(model, torch.zeros(1, 3, h, w), model_path)
    measured = verify_model_file(model_path, info.embedding_dim)
    sidecar_path = write_sidecar(
        os.path.join(out_dir, f"{arch}.sidecar.json"),
        info, measured, f"{arch}.onnx")
    return model_path, sidecar_path

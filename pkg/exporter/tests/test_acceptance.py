"""Release gates for the exporter.

The graph-width contract is verifiable offline: exported width must equal
the sidecar's embedding_dim for densenet201 (1920) and inceptionv3 (2048).
The numeric parity gate additionally needs pretrained weights and an ONNX
runtime; it skips (rather than fails) where the zoo or onnxruntime is
unavailable, and runs everywhere else.
"""

import json
import os

import numpy as np
import pytest

torch = pytest.importorskip("torch")

from signet_exporter import WeightsUnavailableError, archs, export, featfile, onnxwire, probe

PARITY_TOL = 1e-3


@pytest.mark.parametrize("arch, width", [("densenet201", 1920), ("inceptionv3", 2048)])
def test_exported_width_equals_sidecar_dim(arch, width, tmp_path):
    model = archs.build(arch, pretrained=False)
    model_path, sidecar_path = export.export_model(
        arch, str(tmp_path), pretrained=False, model=model)
    raw = open(model_path, "rb").read()
    measured = onnxwire.output_width(raw)
    sidecar = json.loads(open(sidecar_path, encoding="utf-8").read())
    assert measured == width
    assert sidecar["embedding_dim"] == measured


def test_probe_parity_with_runtime_embedding(tmp_path):
    onnxruntime = pytest.importorskip("onnxruntime")  # noqa: F401
    signet_features = pytest.importorskip("signet.features")
    arch = "densenet201"
    try:
        model = archs.build(arch, pretrained=True)
    except WeightsUnavailableError as e:
        pytest.skip(f"model zoo unreachable: {e}")
    model_path, sidecar_path = export.export_model(
        arch, str(tmp_path), pretrained=True, model=model)

    rng = np.random.default_rng(3)
    rgb = rng.integers(0, 256, (240, 320, 3), dtype=np.uint8)
    img = tmp_path / "probe.ppm"
    with open(img, "wb") as fh:
        fh.write(b"P6\n320 240\n255\n" + rgb.tobytes())
    ref_path = probe.parity_probe(str(model_path), str(img), model=model)
    reference = featfile.read_feat(ref_path)[0]

    spec = signet_features.load_sidecar(str(sidecar_path))
    backend = signet_features.OnnxBackend(spec)
    runtime = backend.embed(signet_features.prepare_input(rgb, spec))
    assert runtime.shape == reference.shape
    worst = float(np.max(np.abs(runtime - reference)))
    assert worst <= PARITY_TOL, f"max per-component drift {worst:.2e}"

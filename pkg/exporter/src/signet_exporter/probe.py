"""Parity probes: reference embeddings from the native framework.

A probe runs the zoo's own preprocessing and forward pass on one image and
stores the resulting D-vector as a single-row sequence in the runtime's
feature format. Comparing it against the runtime's embedding of the same
image (exported model + sidecar constants) bounds the numeric drift
between the two inference stacks.
"""

import os

import numpy as np

from . import archs, featfile


def load_image_rgb(path):
    """Image file -> (H, W, 3) uint8 RGB array."""
    from PIL import Image

    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def native_preprocess(rgb, info):
    """Zoo preprocessing: bilinear resize, rescale, per-channel normalize.

    Returns a (1, 3, H, W) float32 torch tensor. Resizing happens in
    float with half-pixel-centered bilinear interpolation (no antialias),
    matching the runtime's resampling convention; remaining differences
    come from the runtime quantizing resized frames back to 8 bits.
    """
    import torch

    w, h = info.input_size
    x = torch.from_numpy(rgb.astype(np.float32))
    x = x.permute(2, 0, 1).unsqueeze(0)          # 1x3xHxW, values 0..255
    x = torch.nn.functional.interpolate(
        x, size=(h, w), mode="bilinear", align_corners=False, antialias=False)
    if info.value_scale == archs.SCALE_UNIT:
        x = x / 255.0
    else:
        x = x * (2.0 / 255.0) - 1.0
    means = torch.tensor(info.channel_means, dtype=torch.float32).view(1, 3, 1, 1)
    stds = torch.tensor(info.channel_stds, dtype=torch.float32).view(1, 3, 1, 1)
    return (x - means) / stds


def probe_embedding(model, info, rgb):
    """Native-framework embedding of one RGB frame; (D,) float32."""
    import torch

    with torch.no_grad():
        out = model(native_preprocess(rgb, info))
    vec = out.detach().cpu().numpy().reshape(-1).astype(np.float32)
    if vec.shape[0] != info.embedding_dim:
        raise ValueError(
            f"{info.name}: native forward produced {vec.shape[0]} values, "
            f"expected {info.embedding_dim}")
    return vec


def parity_probe(model_path, image_path, out_path=None, pretrained=True, model=None):
    """Write the reference embedding for (exported model, image).

    The architecture is taken from the model file's stem (<arch>.onnx).
    Output defaults to <arch>.probe.feat next to the model -- the runtime's
    cache reader parses it as clip "<arch>", backend "probe", T=1.
    """
    arch = os.path.basename(model_path).split(".")[0]
    info = archs.info(arch)
    if model is None:
        model = archs.build(arch, pretrained=pretrained)
    rgb = load_image_rgb(image_path)
    vec = probe_embedding(model, info, rgb)
    if out_path is None:
        out_path = os.path.join(os.path.dirname(model_path) or ".",
                                f"{arch}.probe.feat")
    featfile.write_feat(out_path, vec.reshape(1, -1))
    return out_path

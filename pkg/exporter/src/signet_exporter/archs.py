"""Supported backbone architectures and their pooled-feature builders.

Each entry knows the zoo's documented input size and preprocessing
constants and how to build a torch module whose output is the flat
D-vector of globally average-pooled last-convolutional features. Models
whose stock classifier already sits behind an adaptive average pool just
get the classifier replaced with identity; the VGGs (whose classifier
consumes a 7x7 grid instead) get an explicit pooling head.
"""

from dataclasses import dataclass

from . import DependencyError, UnsupportedArchitectureError, WeightsUnavailableError

_IMAGENET_MEANS = (0.485, 0.456, 0.406)
_IMAGENET_STDS = (0.229, 0.224, 0.225)
# TF-ported weights (timm's inception_resnet_v2) were trained on inputs
# normalized with 0.5/0.5, i.e. the symmetric 2x-1 scaling.
_TF_MEANS = (0.5, 0.5, 0.5)
_TF_STDS = (0.5, 0.5, 0.5)
SCALE_UNIT = "[0,1]"


@dataclass(frozen=True)
class ArchInfo:
    name: str
    embedding_dim: int
    input_size: tuple            # (width, height)
    channel_means: tuple = _IMAGENET_MEANS
    channel_stds: tuple = _IMAGENET_STDS
    value_scale: str = SCALE_UNIT


SUPPORTED = {
    "densenet201": ArchInfo("densenet201", 1920, (224, 224)),
    # torchvision's pretrained inception_v3 sets transform_input=True, so
    # the TF-style rescale lives inside the graph and callers feed plain
    # ImageNet-normalized input like every other torchvision model.
    "inceptionv3": ArchInfo("inceptionv3", 2048, (299, 299)),
    "inceptionresnetv2": ArchInfo("inceptionresnetv2", 1536, (299, 299),
                                  _TF_MEANS, _TF_STDS),
    "resnet50": ArchInfo("resnet50", 2048, (224, 224)),
    "vgg16": ArchInfo("vgg16", 512, (224, 224)),
    "vgg19": ArchInfo("vgg19", 512, (224, 224)),
}


def info(name):
    try:
        return SUPPORTED[name]
    except KeyError:
        raise UnsupportedArchitectureError(
            f"unsupported architecture {name!r}; choose one of "
            f"{', '.join(sorted(SUPPORTED))}") from None


def _gap_module(features):
    import torch
    from torch import nn

    class Gap(nn.Module):
        def __init__(self, feats):
            super().__init__()
            self.feats = feats

        def forward(self, x):
            y = self.feats(x)
            y = nn.functional.adaptive_avg_pool2d(y, 1)
            return torch.flatten(y, 1)

    return Gap(features)


def build(name, pretrained=True):
    """Torch module emitting (1, D) pooled features; eval mode.

    With pretrained=False the architecture is built with random weights,
    which is enough for export-shape verification and offline tests.
    """
    arch = info(name)
    import torchvision.models as tvm
    from torch import nn

    def weights_of(enum):
        return enum.DEFAULT if pretrained else None

    try:
        if name == "densenet201":
            m = tvm.densenet201(weights=weights_of(tvm.DenseNet201_Weights))
            # stock forward relu-activates the feature map before pooling
            model = _gap_module(nn.Sequential(m.features, nn.ReLU()))
        elif name == "inceptionv3":
            if pretrained:
                m = tvm.inception_v3(weights=weights_of(tvm.Inception_V3_Weights))
            else:
                m = tvm.inception_v3(weights=None, aux_logits=False, init_weights=False)
            m.fc = nn.Identity()     # output of the built-in adaptive pool
            model = m
        elif name == "resnet50":
            m = tvm.resnet50(weights=weights_of(tvm.ResNet50_Weights))
            m.fc = nn.Identity()
            model = m
        elif name == "vgg16":
            m = tvm.vgg16(weights=weights_of(tvm.VGG16_Weights))
            model = _gap_module(m.features)
        elif name == "vgg19":
            m = tvm.vgg19(weights=weights_of(tvm.VGG19_Weights))
            model = _gap_module(m.features)
        elif name == "inceptionresnetv2":
            try:
                import timm
            except ImportError:
                raise DependencyError(
                    "inceptionresnetv2 needs the timm package "
                    "(pip install signet-exporter[timm])") from None
            model = timm.create_model("inception_resnet_v2",
                                      pretrained=pretrained, num_classes=0)
        else:  # pragma: no cover - info() already rejects unknowns
            raise UnsupportedArchitectureError(name)
    except (DependencyError, UnsupportedArchitectureError):
        raise
    except Exception as e:
        # weight fetch is the only fallible step once the arch is known
        raise WeightsUnavailableError(
            f"could not obtain pretrained weights for {name}: {e}") from e
    return model.eval()

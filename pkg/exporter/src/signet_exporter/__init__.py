"""Backbone exporter: pretrained CNNs -> ONNX + preprocessing sidecar.

The signet runtime consumes frame embeddings from an exported model with a
single image input and a single D-vector output (global average pooling
already applied). This package produces those artifacts from the
torchvision model zoo, records the zoo's preprocessing constants in a
sidecar JSON, and can emit a reference embedding ("parity probe") in the
runtime's binary feature format so the two inference stacks can be
compared numerically.
"""

__version__ = "0.1.0"


class ExporterError(RuntimeError):
    """Base class for exporter failures."""


class UnsupportedArchitectureError(ExporterError):
    """Requested architecture is not in the supported set."""


class DependencyError(ExporterError):
    """An optional package needed for this architecture is missing."""


class WeightsUnavailableError(ExporterError):
    """Pretrained weights could not be fetched from the model zoo."""


class ExportVerificationError(ExporterError):
    """The exported graph does not meet the output contract."""

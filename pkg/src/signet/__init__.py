"""Dynamic sign-gesture clip classification.

Pipeline: frame-sequence datasets (manifest, videoio) -> motion masking
(preprocess) -> per-frame embeddings from a pretrained backbone or a test
backend (features, with an on-disk cache) -> small trainable heads over
the embedding sequence (nets) -> metrics and sequence-length sweeps
(evaluate, sweep). The synth module generates a deterministic benchmark
dataset; cli ties the stages together.

Hot image kernels run through a compiled extension when available, with a
bit-identical pure numpy fallback (see signet.kernels.BACKEND).
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND  # noqa: F401

"""Trainable classifier heads: MLP and LSTM with analytic gradients.

Everything here is plain numpy in 64-bit floats: forward passes, exact
backpropagation (through time for the LSTM), SGD and Adam, and a
deterministic training loop. All randomness comes from the package's
portable xoshiro256** stream (see signet.rng), so identical inputs and
config produce bit-identical parameters and history.

Initialization: weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)),
biases zero, except the LSTM forget-gate bias which starts at 1.0 to keep
the cell state alive early in training. Draw order is fixed and documented
on the init functions.

Checkpoint format:
  magic "SGNCKPT1" | u32 header_len LE | header JSON (UTF-8, sorted keys)
  | float32 LE blob of all tensors concatenated row-major in the order
  given by params.tensors() | u64 blake2b-8 checksum of the blob.
"""

import json
import struct
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import binio
from .rng import Xoshiro256StarStar

CHECKPOINT_MAGIC = b"SGNCKPT1"
CHECKPOINT_VERSION = 1
HEAD_KINDS = ("mlp", "lstm")
LOSS_CLAMP = 1e-12

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 50
    batch_size: int = 10
    optimizer: str = "adam"
    seed: int = 42
    mlp_hidden: tuple = (512,)
    lstm_hidden: int = 256
    halve_lr_on_loss_increase: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0 and not (self.learning_rate == 0.0):
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"optimizer must be 'sgd' or 'adam', got {self.optimizer!r}")


@dataclass
class TrainHistory:
    loss: list = field(default_factory=list)
    train_accuracy: list = field(default_factory=list)
    test_accuracy: list = field(default_factory=list)  # empty when no eval set


@dataclass
class MlpParams:
    """Affine layers with ReLU between them; the last layer emits logits."""

    weights: list   # weights[i]: (out, in) float64
    biases: list    # biases[i]: (out,) float64

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("weights and biases must be non-empty and aligned")
        for i in range(1, len(self.weights)):
            if self.weights[i].shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(
                    f"layer {i} input width {self.weights[i].shape[1]} != "
                    f"layer {i - 1} output width {self.weights[i - 1].shape[0]}")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if b.shape != (w.shape[0],):
                raise ValueError(f"bias {i} shape {b.shape} != ({w.shape[0]},)")

    @property
    def input_dim(self):
        return self.weights[0].shape[1]

    @property
    def num_classes(self):
        return self.weights[-1].shape[0]

    @property
    def layer_sizes(self):
        return [self.input_dim] + [w.shape[0] for w in self.weights]

    def tensors(self):
        """(name, array) pairs in checkpoint order: w0, b0, w1, b1, ..."""
        out = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out.append((f"w{i}", w))
            out.append((f"b{i}", b))
        return out


@dataclass
class LstmParams:
    """Single-layer LSTM plus a linear classifier on the last hidden state."""

    wi: np.ndarray  # (H, D) input weights, gates i/f/g/o
    wf: np.ndarray
    wg: np.ndarray
    wo: np.ndarray
    ui: np.ndarray  # (H, H) recurrent weights
    uf: np.ndarray
    ug: np.ndarray
    uo: np.ndarray
    bi: np.ndarray  # (H,)
    bf: np.ndarray
    bg: np.ndarray
    bo: np.ndarray
    v: np.ndarray   # (K, H) classifier weight
    c: np.ndarray   # (K,) classifier bias

    def __post_init__(self):
        h, d = self.wi.shape
        k = self.v.shape[0]
        for name, arr, shape in [
            ("wf", self.wf, (h, d)), ("wg", self.wg, (h, d)), ("wo", self.wo, (h, d)),
            ("ui", self.ui, (h, h)), ("uf", self.uf, (h, h)),
            ("ug", self.ug, (h, h)), ("uo", self.uo, (h, h)),
            ("bi", self.bi, (h,)), ("bf", self.bf, (h,)),
            ("bg", self.bg, (h,)), ("bo", self.bo, (h,)),
            ("v", self.v, (k, h)), ("c", self.c, (k,)),
        ]:
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")

    @property
    def input_dim(self):
        return self.wi.shape[1]

    @property
    def hidden_dim(self):
        return self.wi.shape[0]

    @property
    def num_classes(self):
        return self.v.shape[0]

    def tensors(self):
        return [
            ("wi", self.wi), ("wf", self.wf), ("wg", self.wg), ("wo", self.wo),
            ("ui", self.ui), ("uf", self.uf), ("ug", self.ug), ("uo", self.uo),
            ("bi", self.bi), ("bf", self.bf), ("bg", self.bg), ("bo", self.bo),
            ("v", self.v), ("c", self.c),
        ]


def _uniform_matrix(rng, rows, cols, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, rows * cols).reshape(rows, cols)


def init_mlp(layer_sizes, rng):
    """Draw order: per layer, the (out, in) weight matrix row-major."""
    if len(layer_sizes) < 2:
        raise ValueError(f"need at least input and output sizes, got {layer_sizes}")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(_uniform_matrix(rng, fan_out, fan_in, fan_in))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases)


def init_lstm(input_dim, hidden_dim, num_classes, rng):
    """Draw order: wi, wf, wg, wo, ui, uf, ug, uo, v; biases zero, bf = 1."""
    d, h, k = input_dim, hidden_dim, num_classes
    ws = [_uniform_matrix(rng, h, d, d) for _ in range(4)]
    us = [_uniform_matrix(rng, h, h, h) for _ in range(4)]
    v = _uniform_matrix(rng, k, h, h)
    return LstmParams(
        wi=ws[0], wf=ws[1], wg=ws[2], wo=ws[3],
        ui=us[0], uf=us[1], ug=us[2], uo=us[3],
        bi=np.zeros(h), bf=np.ones(h), bg=np.zeros(h), bo=np.zeros(h),
        v=v, c=np.zeros(k),
    )


def softmax(logits):
    """Max-shifted softmax; rejects non-finite input."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.isfinite(z).all():
        raise ValueError("softmax input contains non-finite values")
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs, label):
    """-ln(p_label), clamped at 1e-12 so a zero probability stays finite."""
    probs = np.asarray(probs, dtype=np.float64)
    if not 0 <= label < probs.shape[-1]:
        raise ValueError(f"label {label} out of range for {probs.shape[-1]} classes")
    return -np.log(max(float(probs[label]), LOSS_CLAMP))


def _as_batch(seqs):
    """Stack sequences to (B, T, D) float64, checking shape consistency."""
    first = seqs[0].vectors.shape
    for s in seqs[1:]:
        if s.vectors.shape != first:
            raise ValueError(
                f"inconsistent sequence shapes: {s.vectors.shape} vs {first} "
                f"(clip {s.clip_id!r})")
    return np.stack([s.vectors for s in seqs]).astype(np.float64)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def mlp_forward_batch(params, x):
    """x: (B, input_dim) -> logits (B, K)."""
    if x.shape[1] != params.input_dim:
        raise ValueError(
            f"input width {x.shape[1]} != MLP input layer width {params.input_dim} "
            f"(frames-per-clip times feature dim must match the trained head)")
    a = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        a = z if i == last else np.maximum(z, 0.0)
    return a


def mlp_forward(params, seq):
    """Flatten the (T, D) sequence time-major and run the affine/ReLU stack."""
    x = seq.vectors.astype(np.float64).reshape(1, -1)
    return mlp_forward_batch(params, x)[0]


def lstm_scan(params, x):
    """Run the LSTM over x (B, T, D); returns (logits, cache) for BPTT.

    Standard gate equations: i/f/o sigmoid, g tanh, c_t = f*c + i*g,
    h_t = o*tanh(c_t); the classifier reads h_T only.
    """
    b, t, d = x.shape
    if d != params.input_dim:
        raise ValueError(f"feature dim {d} != LSTM input width {params.input_dim}")
    h = np.zeros((b, params.hidden_dim))
    c = np.zeros((b, params.hidden_dim))
    steps = []
    for step in range(t):
        xt = x[:, step, :]
        ai = xt @ params.wi.T + h @ params.ui.T + params.bi
        af = xt @ params.wf.T + h @ params.uf.T + params.bf
        ag = xt @ params.wg.T + h @ params.ug.T + params.bg
        ao = xt @ params.wo.T + h @ params.uo.T + params.bo
        gi = _sigmoid(ai)
        gf = _sigmoid(af)
        gg = np.tanh(ag)
        go = _sigmoid(ao)
        c_new = gf * c + gi * gg
        tanh_c = np.tanh(c_new)
        h_new = go * tanh_c
        steps.append({"x": xt, "h_prev": h, "c_prev": c,
                      "i": gi, "f": gf, "g": gg, "o": go, "tanh_c": tanh_c})
        h, c = h_new, c_new
    logits = h @ params.v.T + params.c
    return logits, {"steps": steps, "h_last": h, "c_last": c}


def lstm_forward_batch(params, x):
    return lstm_scan(params, x)[0]


def lstm_forward(params, seq):
    x = seq.vectors.astype(np.float64)[None, :, :]
    return lstm_forward_batch(params, x)[0]


def forward_batch(params, x):
    """Dispatch on parameter type; x is (B, T, D)."""
    if isinstance(params, MlpParams):
        return mlp_forward_batch(params, x.reshape(x.shape[0], -1))
    return lstm_forward_batch(params, x)


def _loss_and_dlogits(logits, labels):
    probs = softmax(logits)
    n = logits.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(np.mean(-np.log(np.maximum(picked, LOSS_CLAMP))))
    dlogits = probs
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits


def _check_grads(named_grads):
    for name, g in named_grads:
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient for parameter {name}")


def mlp_backward_batch(params, x, labels):
    """Gradients of mean cross-entropy w.r.t. every tensor; returns (grads, loss)."""
    acts = [x]
    zs = []
    a = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        zs.append(z)
        a = z if i == last else np.maximum(z, 0.0)
        acts.append(a)
    loss, delta = _loss_and_dlogits(acts[-1], labels)

    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.biases)
    for i in range(last, -1, -1):
        grads_w[i] = delta.T @ acts[i]
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i]) * (zs[i - 1] > 0.0)
    grads = []
    for i in range(len(params.weights)):
        grads.append((f"w{i}", grads_w[i]))
        grads.append((f"b{i}", grads_b[i]))
    _check_grads(grads)
    return grads, loss


def lstm_backward_batch(params, x, labels):
    """Backpropagation through time over the full sequence; returns (grads, loss)."""
    logits, cache = lstm_scan(params, x)
    loss, dlogits = _loss_and_dlogits(logits, labels)

    g = {name: np.zeros_like(arr) for name, arr in params.tensors()}
    g["v"] = dlogits.T @ cache["h_last"]
    g["c"] = dlogits.sum(axis=0)

    dh = dlogits @ params.v
    dc = np.zeros_like(cache["c_last"])
    for step in reversed(cache["steps"]):
        gi, gf, gg, go = step["i"], step["f"], step["g"], step["o"]
        tanh_c = step["tanh_c"]
        do = dh * tanh_c
        dc = dc + dh * go * (1.0 - tanh_c * tanh_c)
        di = dc * gg
        dg = dc * gi
        df = dc * step["c_prev"]

        dai = di * gi * (1.0 - gi)
        daf = df * gf * (1.0 - gf)
        dag = dg * (1.0 - gg * gg)
        dao = do * go * (1.0 - go)

        xt, h_prev = step["x"], step["h_prev"]
        g["wi"] += dai.T @ xt
        g["wf"] += daf.T @ xt
        g["wg"] += dag.T @ xt
        g["wo"] += dao.T @ xt
        g["ui"] += dai.T @ h_prev
        g["uf"] += daf.T @ h_prev
        g["ug"] += dag.T @ h_prev
        g["uo"] += dao.T @ h_prev
        g["bi"] += dai.sum(axis=0)
        g["bf"] += daf.sum(axis=0)
        g["bg"] += dag.sum(axis=0)
        g["bo"] += dao.sum(axis=0)

        dh = dai @ params.ui + daf @ params.uf + dag @ params.ug + dao @ params.uo
        dc = dc * gf
    grads = [(name, g[name]) for name, _ in params.tensors()]
    _check_grads(grads)
    return grads, loss


def backward(params, batch):
    """Mean-loss gradients for a batch of (EmbeddingSequence, label) pairs."""
    if not batch:
        raise ValueError("empty batch")
    seqs = [s for s, _ in batch]
    labels = np.array([int(y) for _, y in batch])
    x = _as_batch(seqs)
    if isinstance(params, MlpParams):
        return mlp_backward_batch(params, x.reshape(x.shape[0], -1), labels)
    return lstm_backward_batch(params, x, labels)


@dataclass
class OptimizerState:
    kind: str
    step: int = 0
    m: list = None
    v: list = None


def init_optimizer(params, cfg):
    if cfg.optimizer == "sgd":
        return OptimizerState(kind="sgd")
    shapes = [arr for _, arr in params.tensors()]
    return OptimizerState(
        kind="adam",
        m=[np.zeros_like(a) for a in shapes],
        v=[np.zeros_like(a) for a in shapes],
    )


def optimizer_step(params, grads, state, cfg):
    """Apply one update in place; returns (params, state)."""
    lr = cfg.learning_rate
    tensors = [arr for _, arr in params.tensors()]
    gs = [g for _, g in grads]
    if state.kind == "sgd":
        for arr, g in zip(tensors, gs):
            arr -= lr * g
        return params, state
    state.step += 1
    b1t = 1.0 - ADAM_BETA1 ** state.step
    b2t = 1.0 - ADAM_BETA2 ** state.step
    for arr, g, m, v in zip(tensors, gs, state.m, state.v):
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * (g * g)
        m_hat = m / b1t
        v_hat = v / b2t
        arr -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return params, state


def predict_batch(params, x):
    """Class ids and probabilities for stacked sequences (B, T, D)."""
    logits = forward_batch(params, x)
    probs = softmax(logits)
    return np.argmax(probs, axis=1), probs


def predict(params, kind, seq):
    """Argmax class (ties broken toward the lowest id) plus probabilities."""
    if kind not in HEAD_KINDS:
        raise ValueError(f"unknown head kind {kind!r}")
    expected = MlpParams if kind == "mlp" else LstmParams
    if not isinstance(params, expected):
        raise ValueError(f"params are {type(params).__name__}, not a {kind} head")
    x = seq.vectors.astype(np.float64)[None, :, :]
    ids, probs = predict_batch(params, x)
    return int(ids[0]), probs[0]


def _dataset_arrays(dataset):
    seqs = [s for s, _ in dataset]
    labels = np.array([int(y) for _, y in dataset])
    return _as_batch(seqs), labels


def train(kind, train_set, cfg, num_classes, eval_set=None):
    """Seeded minibatch training; returns (params, TrainHistory).

    Fully deterministic: parameter init and the per-epoch Fisher-Yates
    shuffle both consume the single xoshiro stream seeded with cfg.seed.
    With halve_lr_on_loss_increase, the learning rate is halved whenever
    the epoch loss rose above the previous epoch's.
    """
    if kind not in HEAD_KINDS:
        raise ValueError(f"unknown head kind {kind!r}")
    if not train_set:
        raise ValueError("empty training set")
    x, y = _dataset_arrays(train_set)
    if y.min() < 0 or y.max() >= num_classes:
        raise ValueError(f"labels outside [0, {num_classes}): {sorted(set(y.tolist()))}")
    n, t, d = x.shape

    rng = Xoshiro256StarStar(cfg.seed)
    if kind == "mlp":
        sizes = [t * d] + list(cfg.mlp_hidden) + [num_classes]
        params = init_mlp(sizes, rng)
        xt = x.reshape(n, -1)
        backward_fn = mlp_backward_batch
    else:
        params = init_lstm(d, cfg.lstm_hidden, num_classes, rng)
        xt = x
        backward_fn = lstm_backward_batch

    x_eval = y_eval = None
    if eval_set:
        x_eval, y_eval = _dataset_arrays(eval_set)

    state = init_optimizer(params, cfg)
    history = TrainHistory()
    lr = cfg.learning_rate
    prev_loss = None
    for _epoch in range(cfg.epochs):
        order = rng.shuffle_indices(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            grads, batch_loss = backward_fn(params, xt[idx], y[idx])
            optimizer_step(params, grads, state, replace(cfg, learning_rate=lr))
            total += batch_loss * len(idx)
        epoch_loss = total / n
        preds, _ = predict_batch(params, x)
        history.loss.append(epoch_loss)
        history.train_accuracy.append(float(np.mean(preds == y)))
        if x_eval is not None:
            eval_preds, _ = predict_batch(params, x_eval)
            history.test_accuracy.append(float(np.mean(eval_preds == y_eval)))
        if cfg.halve_lr_on_loss_increase and prev_loss is not None and epoch_loss > prev_loss:
            lr *= 0.5
        prev_loss = epoch_loss
    return params, history


def _header_dims(params):
    if isinstance(params, MlpParams):
        return {"layer_sizes": params.layer_sizes}
    return {"input_dim": params.input_dim, "hidden_dim": params.hidden_dim}


def save_checkpoint(path, kind, params, cfg, extra=None):
    """Write header + parameter blob; byte-identical for identical inputs.

    extra, if given, is a dict of JSON-native values merged into the
    header (e.g. frames-per-clip or backend name for later eval runs).
    """
    header = {
        "format_version": CHECKPOINT_VERSION,
        "kind": kind,
        "num_classes": params.num_classes,
        "dims": _header_dims(params),
        "seed": cfg.seed,
        "train_config": asdict(cfg),
        "tensor_order": [name for name, _ in params.tensors()],
    }
    if extra:
        for key, value in extra.items():
            if key in header:
                raise ValueError(f"extra header key {key!r} collides with a core field")
            header[key] = value
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(arr, dtype="<f4").tobytes()
                       for _, arr in params.tensors())
    blob = (CHECKPOINT_MAGIC
            + struct.pack("<I", len(header_bytes))
            + header_bytes
            + payload
            + struct.pack("<Q", binio.u64_digest(payload)))
    binio.write_atomic(path, blob)
    return path


def load_checkpoint(path):
    """Read a checkpoint back into (kind, params, header)."""
    with open(path, "rb") as fh:
        data = fh.read()
    what = str(path)
    binio.check_magic(data, CHECKPOINT_MAGIC, what)
    off = len(CHECKPOINT_MAGIC)
    if len(data) < off + 4:
        raise binio.TruncatedFileError(f"{what}: missing header length")
    (header_len,) = struct.unpack_from("<I", data, off)
    off += 4
    if len(data) < off + header_len + 8:
        raise binio.TruncatedFileError(f"{what}: file shorter than declared header + checksum")
    try:
        header = json.loads(data[off:off + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise binio.FormatError(f"{what}: corrupt header JSON: {e}") from e
    off += header_len
    payload, (stored,) = data[off:-8], struct.unpack("<Q", data[-8:])

    kind = header.get("kind")
    k = header.get("num_classes")
    dims = header.get("dims", {})
    if kind == "mlp":
        sizes = dims["layer_sizes"]
        shapes = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            shapes.append((fan_out, fan_in))
            shapes.append((fan_out,))
    elif kind == "lstm":
        d, h = dims["input_dim"], dims["hidden_dim"]
        shapes = [(h, d)] * 4 + [(h, h)] * 4 + [(h,)] * 4 + [(k, h), (k,)]
    else:
        raise binio.FormatError(f"{what}: unknown head kind {kind!r}")
    expected = sum(int(np.prod(s)) for s in shapes) * 4
    if len(payload) != expected:
        if binio.u64_digest(payload) == stored:
            raise binio.FieldMismatchError(
                f"{what}: header dims need {expected} payload bytes, found {len(payload)}")
        raise binio.TruncatedFileError(
            f"{what}: payload has {len(payload)} bytes, header declares {expected}")
    binio.check_checksum(payload, stored, what)

    flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    arrays = []
    pos = 0
    for s in shapes:
        size = int(np.prod(s))
        arrays.append(flat[pos:pos + size].reshape(s))
        pos += size
    if kind == "mlp":
        params = MlpParams(weights=arrays[0::2], biases=arrays[1::2])
    else:
        params = LstmParams(*arrays)
    return kind, params, header

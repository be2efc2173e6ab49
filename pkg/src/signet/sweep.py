"""Grid sweep over frames-per-clip and head kinds, plus report emission.

Each (frames, head) cell trains from scratch with its own seed derived
from the master seed and the cell coordinates, so any single cell can be
reproduced in isolation. Cells run on a bounded thread pool and failures
are captured per cell without aborting the rest of the grid.

Reports contain only JSON-native values (no timings, no timestamps), so
two runs with identical inputs produce byte-identical report files and
emit -> load is the identity.
"""

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import binio, evaluate, manifest as manifest_mod, nets, pipeline, videoio
from .rng import derive_seed

REPORT_VERSION = 1
REPORT_FILENAME = "report.json"


@dataclass
class CellResult:
    backend: str
    head: str
    frames: int
    seed: int
    epochs_run: int = 0
    train_accuracy: float = None
    test_accuracy: float = None
    history: dict = field(default_factory=dict)   # loss / train_accuracy / test_accuracy lists
    confusion: list = None                        # test-split counts, K x K ints
    error: str = None


@dataclass
class SweepReport:
    backend: str
    frames_grid: list
    heads: list
    label_names: list
    seed: int
    cells: list
    format_version: int = REPORT_VERSION

    def cell(self, head, frames):
        for c in self.cells:
            if c.head == head and c.frames == frames:
                return c
        raise KeyError(f"no cell for head={head!r}, frames={frames}")


def cell_seed(master_seed, backend_name, head, frames):
    """Stable per-cell seed: digest of the master seed and cell coordinates."""
    return derive_seed(str(master_seed), backend_name, head, f"n{frames}")


def _run_cell(backend_name, head, frames, seed, feats_by_len, train_records,
              test_records, labels, cfg, n_source):
    train_set = pipeline.labeled_set(train_records, feats_by_len[n_source], labels, n=frames)
    test_set = pipeline.labeled_set(test_records, feats_by_len[n_source], labels, n=frames)
    cell_cfg = replace(cfg, seed=seed)
    params, history = nets.train(head, train_set, cell_cfg, labels.k, eval_set=test_set)
    x_test = np.stack([s.vectors for s, _ in test_set]).astype(np.float64)
    y_test = [y for _, y in test_set]
    preds, _ = nets.predict_batch(params, x_test)
    cm = evaluate.confusion(preds, y_test, labels)
    return CellResult(
        backend=backend_name, head=head, frames=frames, seed=seed,
        epochs_run=len(history.loss),
        train_accuracy=history.train_accuracy[-1],
        test_accuracy=history.test_accuracy[-1],
        history=asdict(history),
        confusion=cm.counts.tolist(),
    )


def run_sweep(manifest, root, extractor, spec, frames_grid, heads, cfg,
              subtractor=None, cache_dir=None, workers=1, progress=None):
    """Train and score every (frames, head) cell; returns a SweepReport.

    Features are provisioned up front at the largest grid entry (plus any
    grid entry that does not divide it) and sliced per cell. A cell that
    raises is recorded with its error message; the rest of the grid still
    runs.
    """
    frames_grid = list(frames_grid)
    heads = list(heads)
    if not frames_grid or not heads:
        raise ValueError("frames_grid and heads must be non-empty")
    for head in heads:
        if head not in nets.HEAD_KINDS:
            raise ValueError(f"unknown head kind {head!r}")
    train_records, test_records = manifest_mod.split(manifest)
    if not train_records or not test_records:
        raise ValueError("sweep needs non-empty train and test splits")

    n_max = max(frames_grid)
    sources = {pipeline.source_length(n, n_max) for n in frames_grid}
    feats_by_len = {}
    for n_source in sorted(sources):
        feats_by_len[n_source] = pipeline.provision_features(
            manifest.records, root, extractor, spec, n_source,
            subtractor=subtractor, cache_dir=cache_dir, progress=progress)

    cells_spec = [(n, head) for n in frames_grid for head in heads]
    results = [None] * len(cells_spec)

    def work(i):
        n, head = cells_spec[i]
        seed = cell_seed(cfg.seed, spec.name, head, n)
        try:
            return _run_cell(spec.name, head, n, seed, feats_by_len,
                             train_records, test_records, manifest.labels, cfg,
                             pipeline.source_length(n, n_max))
        except Exception as e:  # captured per cell by contract
            return CellResult(backend=spec.name, head=head, frames=n,
                              seed=seed, error=f"{type(e).__name__}: {e}")

    if workers <= 1:
        for i in range(len(cells_spec)):
            results[i] = work(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, res in enumerate(pool.map(work, range(len(cells_spec)))):
                results[i] = res

    return SweepReport(
        backend=spec.name,
        frames_grid=frames_grid,
        heads=heads,
        label_names=list(manifest.labels.names),
        seed=cfg.seed,
        cells=results,
    )


def write_history_csv(path, history):
    """Epoch metrics as CSV: epoch,loss,train_acc,test_acc (full precision)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "loss", "train_acc", "test_acc"])
        test = history.get("test_accuracy") or []
        for i, (loss, tr) in enumerate(zip(history["loss"], history["train_accuracy"])):
            row = [i + 1, repr(loss), repr(tr)]
            row.append(repr(test[i]) if i < len(test) else "")
            w.writerow(row)


def write_confusion_csv(path, counts, label_names):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["true_label"] + list(label_names))
        for name, row in zip(label_names, counts):
            w.writerow([name] + [int(v) for v in row])


def heatmap_u8(counts):
    """Row-normalized confusion as 8-bit intensities, round(255*value)."""
    norm, _ = evaluate.normalize_rows(np.asarray(counts))
    return np.floor(norm * 255.0 + 0.5).astype(np.uint8)


def emit_report(report, out_dir):
    """Write report.json plus per-cell history/confusion CSVs and PGM heatmaps.

    Returns the list of paths written. report.json alone round-trips the
    SweepReport exactly via load_report.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, REPORT_FILENAME)
    blob = json.dumps(asdict(report), sort_keys=True, indent=2) + "\n"
    binio.write_atomic(path, blob.encode("utf-8"))
    written.append(path)

    for cell in report.cells:
        if cell.error is not None:
            continue
        stem = f"{cell.head}_n{cell.frames}"
        p = os.path.join(out_dir, f"history_{stem}.csv")
        write_history_csv(p, cell.history)
        written.append(p)
        if cell.confusion is not None:
            p = os.path.join(out_dir, f"confusion_{stem}.csv")
            write_confusion_csv(p, cell.confusion, report.label_names)
            written.append(p)
            p = os.path.join(out_dir, f"confusion_{stem}.pgm")
            videoio.write_pgm(p, heatmap_u8(cell.confusion))
            written.append(p)
    return written


def load_report(path):
    """Parse report.json (or a directory containing one) back to a SweepReport."""
    if os.path.isdir(path):
        path = os.path.join(path, REPORT_FILENAME)
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    version = obj.get("format_version")
    if version != REPORT_VERSION:
        raise ValueError(f"{path}: unsupported report version {version!r}")
    cells = [CellResult(**c) for c in obj["cells"]]
    return SweepReport(
        backend=obj["backend"],
        frames_grid=obj["frames_grid"],
        heads=obj["heads"],
        label_names=obj["label_names"],
        seed=obj["seed"],
        cells=cells,
        format_version=version,
    )

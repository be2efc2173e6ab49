"""Command-line interface: argument handling, exit codes, artifacts."""

import json
import os

import numpy as np
import pytest

from signet import cli, sweep, videoio
from signet.nets import load_checkpoint


def run(argv, tmp_cache=None, monkeypatch=None):
    if tmp_cache is not None:
        monkeypatch.setenv("SIGNET_CACHE_DIR", str(tmp_cache))
    return cli.main(argv)


# --- parsing and exit codes -------------------------------------------------

@pytest.mark.parametrize("sub", ["featurize", "train", "eval", "sweep", "synth"])
def test_help_exits_zero(sub, capsys):
    with pytest.raises(SystemExit) as e:
        cli.main([sub, "--help"])
    assert e.value.code == 0
    assert "--" in capsys.readouterr().out


def test_no_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main([])
    assert e.value.code == 2


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["synth", "--out", "x", "--frobnicate"])
    assert e.value.code == 2


def test_missing_manifest_names_path(tmp_path, capsys):
    rc = cli.main(["train", "--manifest", str(tmp_path / "nope.jsonl"),
                   "--mock-features", "1:8", "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "nope.jsonl" in capsys.readouterr().err


def test_bad_mock_features_spec(tiny_dataset, tmp_path, capsys):
    path, _ = tiny_dataset
    rc = cli.main(["featurize", "--manifest", path, "--mock-features", "banana"])
    assert rc == 2
    assert "SEED:DIM" in capsys.readouterr().err


def test_missing_backend_is_config_error(tiny_dataset, capsys):
    path, _ = tiny_dataset
    rc = cli.main(["featurize", "--manifest", path])
    assert rc == 2
    assert "backend" in capsys.readouterr().err


def test_unknown_preset_backend(tiny_dataset, capsys):
    path, _ = tiny_dataset
    rc = cli.main(["featurize", "--manifest", path, "--backend", "mystery-net"])
    assert rc == 2


def test_synth_bad_size_is_config_error(tmp_path, capsys):
    rc = cli.main(["synth", "--out", str(tmp_path / "d"), "--size", "2"])
    assert rc == 2


# --- happy path: featurize / train / eval ----------------------------------

def test_featurize_fills_cache(tiny_dataset, tmp_path, monkeypatch, capsys):
    path, _ = tiny_dataset
    cache = tmp_path / "cache"
    rc = run(["featurize", "--manifest", path, "--mock-features", "5:8",
              "--frames", "3"], cache, monkeypatch)
    assert rc == 0
    files = sorted(p.name for p in (cache / "raw" / "n3").iterdir())
    assert files == ["point0.mock-5-8.feat", "point1.mock-5-8.feat",
                     "wave0.mock-5-8.feat", "wave1.mock-5-8.feat"]
    assert "4 clips" in capsys.readouterr().out


def test_featurize_preprocess_variant_dir(tiny_dataset, tmp_path, monkeypatch):
    path, _ = tiny_dataset
    cache = tmp_path / "cache"
    rc = run(["featurize", "--manifest", path, "--mock-features", "5:8",
              "--frames", "2", "--preprocess", "--threshold", "30",
              "--blur-kernel", "3"], cache, monkeypatch)
    assert rc == 0
    assert (cache / "pre-t30-k3" / "n2").is_dir()


def test_train_writes_checkpoint_and_history(tiny_dataset, tmp_path, monkeypatch):
    path, _ = tiny_dataset
    out = tmp_path / "run"
    rc = run(["train", "--manifest", path, "--mock-features", "5:8",
              "--frames", "2", "--heads", "mlp", "--epochs", "3",
              "--out", str(out)], tmp_path / "cache", monkeypatch)
    assert rc == 0
    kind, params, header = load_checkpoint(str(out / "model.ckpt"))
    assert kind == "mlp"
    assert header["backend"] == "mock-5-8"
    assert header["frames_per_clip"] == 2
    assert header["label_names"] == ["wave", "point"]
    assert header["variant"] == "raw"
    lines = (out / "history.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "epoch,loss,train_acc,test_acc"
    assert len(lines) == 4


def test_train_rejects_multiple_heads(tiny_dataset, tmp_path, capsys):
    path, _ = tiny_dataset
    rc = cli.main(["train", "--manifest", path, "--mock-features", "5:8",
                   "--heads", "mlp,lstm", "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "sweep" in capsys.readouterr().err


def test_train_then_eval_round_trip(tiny_dataset, tmp_path, monkeypatch, capsys):
    path, _ = tiny_dataset
    out = tmp_path / "run"
    run(["train", "--manifest", path, "--mock-features", "5:8",
         "--frames", "2", "--heads", "mlp", "--epochs", "3",
         "--out", str(out)], tmp_path / "cache", monkeypatch)
    evaldir = tmp_path / "eval"
    rc = run(["eval", "--manifest", path, "--checkpoint", str(out / "model.ckpt"),
              "--out", str(evaldir)], tmp_path / "cache", monkeypatch)
    assert rc == 0
    metrics = json.loads((evaldir / "metrics.json").read_text(encoding="utf-8"))
    assert metrics["head"] == "mlp"
    assert metrics["backend"] == "mock-5-8"
    assert 0.0 <= metrics["test_accuracy"] <= 1.0
    assert 0.0 <= metrics["train_accuracy"] <= 1.0
    assert isinstance(metrics["top_confusions"], list)
    assert (evaldir / "confusion.csv").is_file()
    hm = videoio.read_pgm(str(evaldir / "confusion.pgm"))
    assert hm.shape == (2, 2)
    assert "test accuracy" in capsys.readouterr().out


def test_eval_backend_mismatch_rejected(tiny_dataset, tmp_path, monkeypatch, capsys):
    path, _ = tiny_dataset
    out = tmp_path / "run"
    run(["train", "--manifest", path, "--mock-features", "5:8",
         "--frames", "2", "--heads", "mlp", "--epochs", "2",
         "--out", str(out)], tmp_path / "cache", monkeypatch)
    rc = cli.main(["eval", "--manifest", path,
                   "--checkpoint", str(out / "model.ckpt"),
                   "--mock-features", "6:8", "--out", str(tmp_path / "e")])
    assert rc == 2
    assert "mock-5-8" in capsys.readouterr().err


def test_eval_missing_checkpoint(tiny_dataset, tmp_path, capsys):
    path, _ = tiny_dataset
    rc = cli.main(["eval", "--manifest", path,
                   "--checkpoint", str(tmp_path / "none.ckpt"),
                   "--out", str(tmp_path / "e")])
    assert rc == 2


def test_eval_corrupt_checkpoint(tiny_dataset, tmp_path, capsys):
    path, _ = tiny_dataset
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"not a checkpoint at all")
    rc = cli.main(["eval", "--manifest", path, "--checkpoint", str(bad),
                   "--out", str(tmp_path / "e")])
    assert rc == 2
    assert "checkpoint" in capsys.readouterr().err


# --- sweep and synth --------------------------------------------------------

def test_sweep_writes_report(tiny_dataset, tmp_path, monkeypatch, capsys):
    path, _ = tiny_dataset
    out = tmp_path / "rep"
    rc = run(["sweep", "--manifest", path, "--mock-features", "5:8",
              "--frames", "2,4", "--heads", "mlp", "--epochs", "2",
              "--out", str(out)], tmp_path / "cache", monkeypatch)
    assert rc == 0
    rep = sweep.load_report(str(out))
    assert [(c.head, c.frames) for c in rep.cells] == [("mlp", 2), ("mlp", 4)]
    assert all(c.error is None for c in rep.cells)
    out_text = capsys.readouterr().out
    assert "N=2" in out_text and "N=4" in out_text


def test_sweep_bad_frames_list(tiny_dataset, tmp_path, capsys):
    path, _ = tiny_dataset
    rc = cli.main(["sweep", "--manifest", path, "--mock-features", "5:8",
                   "--frames", "2,zebra", "--out", str(tmp_path / "r")])
    assert rc == 2
    assert "--frames" in capsys.readouterr().err


def test_sweep_bad_workers(tiny_dataset, tmp_path, capsys):
    path, _ = tiny_dataset
    rc = cli.main(["sweep", "--manifest", path, "--mock-features", "5:8",
                   "--workers", "0", "--out", str(tmp_path / "r")])
    assert rc == 2


def test_synth_generates_loadable_dataset(tmp_path, capsys):
    out = tmp_path / "data"
    rc = cli.main(["synth", "--out", str(out), "--seed", "9", "--size", "16"])
    assert rc == 0
    assert (out / "manifest.jsonl").is_file()
    ppms = list(out.rglob("*.ppm"))
    assert len(ppms) == 150 * 25
    assert "manifest.jsonl" in capsys.readouterr().out


def test_cache_env_var_overrides_default(tiny_dataset, tmp_path, monkeypatch):
    path, root = tiny_dataset
    cache = tmp_path / "elsewhere"
    monkeypatch.setenv("SIGNET_CACHE_DIR", str(cache))
    rc = cli.main(["featurize", "--manifest", path, "--mock-features", "5:8",
                   "--frames", "2"])
    assert rc == 0
    assert cache.is_dir()
    assert not (tmp_path / ".feature-cache").exists()

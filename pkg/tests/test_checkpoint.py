import numpy as np
import pytest

from timesparse import (Tensor, WindowConfig, build_model, greedy_decode,
                        load_checkpoint, make_rng, read_checkpoint, save_checkpoint)
from timesparse.checkpoint import MAGIC
from timesparse.errors import CheckpointError


def _model(seed=0, hidden_dim=5, pred_kind="stateless", strategy="sa"):
    return build_model(vocab_size=4, input_dim=3, hidden_dim=hidden_dim, pred_dim=3,
                       joint_dim=4, window=WindowConfig(2, 2, strategy),
                       pred_kind=pred_kind, seed=seed)


def test_roundtrip_restores_every_parameter(tmp_path):
    path = str(tmp_path / "model.ckpt")
    source = _model(seed=1)
    save_checkpoint(path, source)
    target = _model(seed=2)
    assert any(not np.array_equal(p.data, source.named_parameters()[n].data)
               for n, p in target.named_parameters().items())
    load_checkpoint(path, target)
    for name, param in source.named_parameters().items():
        assert np.array_equal(param.data, target.named_parameters()[name].data), name
    hidden = Tensor(make_rng(0).normal(size=(6, 3)))
    a = greedy_decode(source.hidden_states(hidden), source)
    b = greedy_decode(target.hidden_states(hidden), target)
    assert a.labels == b.labels and a.log_score == b.log_score


def test_read_checkpoint_contents(tmp_path):
    path = str(tmp_path / "model.ckpt")
    model = _model(seed=3, pred_kind="recurrent")
    save_checkpoint(path, model)
    vocab, arrays = read_checkpoint(path)
    assert vocab == 4
    assert set(arrays) == set(model.named_parameters())
    assert arrays["prediction.w_rec"].shape == (3, 3)
    assert np.array_equal(arrays["joint.bias"], model.joint.bias.data)


def test_save_is_deterministic(tmp_path):
    a, b = str(tmp_path / "a.ckpt"), str(tmp_path / "b.ckpt")
    model = _model(seed=4)
    save_checkpoint(a, model)
    save_checkpoint(b, model)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_dimension_mismatch_rejected(tmp_path):
    path = str(tmp_path / "model.ckpt")
    save_checkpoint(path, _model(seed=5, hidden_dim=5))
    with pytest.raises(CheckpointError, match="shape"):
        load_checkpoint(path, _model(seed=5, hidden_dim=6))


def test_parameter_set_mismatch_rejected(tmp_path):
    path = str(tmp_path / "model.ckpt")
    save_checkpoint(path, _model(seed=6, pred_kind="stateless"))
    with pytest.raises(CheckpointError, match="names"):
        load_checkpoint(path, _model(seed=6, pred_kind="recurrent"))


def test_vocab_mismatch_rejected(tmp_path):
    path = str(tmp_path / "model.ckpt")
    model = build_model(vocab_size=4, input_dim=3, hidden_dim=5, pred_dim=3,
                        joint_dim=4, seed=0)
    save_checkpoint(path, model)
    other = build_model(vocab_size=5, input_dim=3, hidden_dim=5, pred_dim=3,
                        joint_dim=4, seed=0)
    with pytest.raises(CheckpointError, match="vocabulary"):
        load_checkpoint(path, other)


def test_corrupt_files_rejected(tmp_path):
    model = _model(seed=7)
    good = tmp_path / "good.ckpt"
    save_checkpoint(str(good), model)
    blob = good.read_bytes()

    bad_magic = tmp_path / "magic.ckpt"
    bad_magic.write_bytes(b"NOTMAGIC" + blob[8:])
    with pytest.raises(CheckpointError, match="magic"):
        read_checkpoint(str(bad_magic))

    bad_version = tmp_path / "version.ckpt"
    bad_version.write_bytes(MAGIC + b"\x63\x00\x00\x00" + blob[12:])
    with pytest.raises(CheckpointError, match="version"):
        read_checkpoint(str(bad_version))

    truncated = tmp_path / "trunc.ckpt"
    truncated.write_bytes(blob[:len(blob) - 17])
    with pytest.raises(CheckpointError, match="truncated"):
        read_checkpoint(str(truncated))

    empty = tmp_path / "empty.ckpt"
    empty.write_bytes(b"")
    with pytest.raises(CheckpointError):
        read_checkpoint(str(empty))

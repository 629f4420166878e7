import numpy as np
import pytest

from pinyintypo.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from pinyintypo.errors import CheckpointError
from pinyintypo.model import ModelConfig, Parameters

CFG = ModelConfig(
    embed_dim=6, hidden_dim=4, source_vocab_size=27, target_vocab_size=9,
    attention_dim=3, seed=77,
)


def test_round_trip_exact(tmp_path):
    params = Parameters.init(CFG)
    path = tmp_path / "m.ckpt"
    save_checkpoint(params, CFG, path)
    loaded, config = load_checkpoint(path)
    assert config == CFG
    for name, arr in params.tensors().items():
        assert (arr == loaded.tensors()[name]).all()


def test_save_load_save_is_byte_identical(tmp_path):
    params = Parameters.init(CFG)
    p1 = tmp_path / "a.ckpt"
    p2 = tmp_path / "b.ckpt"
    save_checkpoint(params, CFG, p1)
    loaded, config = load_checkpoint(p1)
    save_checkpoint(loaded, config, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_config_comes_from_file(tmp_path):
    params = Parameters.init(CFG)
    path = tmp_path / "m.ckpt"
    save_checkpoint(params, CFG, path)
    _, config = load_checkpoint(path)
    assert config.hidden_dim == 4  # not whatever the caller expected


def test_corrupted_magic(tmp_path):
    params = Parameters.init(CFG)
    path = tmp_path / "m.ckpt"
    save_checkpoint(params, CFG, path)
    data = bytearray(path.read_bytes())
    data[:6] = b"NOTACK"
    path.write_bytes(bytes(data))
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(path)
    assert MAGIC == b"KNPTC1"


def test_truncated_file(tmp_path):
    params = Parameters.init(CFG)
    path = tmp_path / "m.ckpt"
    save_checkpoint(params, CFG, path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) - 100])
    with pytest.raises(CheckpointError, match="truncated"):
        load_checkpoint(path)


def test_trailing_garbage(tmp_path):
    params = Parameters.init(CFG)
    path = tmp_path / "m.ckpt"
    save_checkpoint(params, CFG, path)
    path.write_bytes(path.read_bytes() + b"xx")
    with pytest.raises(CheckpointError, match="trailing"):
        load_checkpoint(path)


def test_manifest_shape_mismatch(tmp_path):
    params = Parameters.init(CFG)
    path = tmp_path / "m.ckpt"
    save_checkpoint(params, CFG, path)
    raw = path.read_bytes()
    # shrink a declared dimension in the JSON header
    broken = raw.replace(b'["src_embed",[27,6]]', b'["src_embed",[27,5]]', 1)
    assert broken != raw
    path.write_bytes(broken)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)

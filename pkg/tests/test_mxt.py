import struct

import numpy as np
import pytest

from boundaryscan.errors import BackendUnavailable, ConfigError
from boundaryscan.mxt import load_pool, read_tensor, save_pool, write_tensor


def test_golden_header_bytes(tmp_path):
    path = tmp_path / "t.mxt"
    write_tensor(path, np.arange(6, dtype=np.float32).reshape(2, 3))
    blob = path.read_bytes()
    expect = (
        b"MXT1"
        + bytes([1, 2, 0, 0])
        + struct.pack("<II", 2, 3)
        + np.arange(6, dtype="<f4").tobytes()
    )
    assert blob == expect


def test_round_trip_ranks(tmp_path):
    for shape in [(5,), (3, 4), (2, 3, 4)]:
        a = np.arange(int(np.prod(shape)), dtype=np.float32).reshape(shape) * 0.5
        p = tmp_path / f"r{len(shape)}.mxt"
        write_tensor(p, a)
        back = read_tensor(p)
        assert back.dtype == np.float32
        assert np.array_equal(back, a)


def test_float64_input_is_cast(tmp_path):
    p = tmp_path / "c.mxt"
    write_tensor(p, np.array([1.0, 2.5], dtype=np.float64))
    assert read_tensor(p).dtype == np.float32


def test_missing_file(tmp_path):
    with pytest.raises(BackendUnavailable):
        read_tensor(tmp_path / "absent.mxt")


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.mxt"
    p.write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(ConfigError):
        read_tensor(p)


def test_unknown_dtype_code(tmp_path):
    p = tmp_path / "bad.mxt"
    p.write_bytes(b"MXT1" + bytes([2, 1, 0, 0]) + struct.pack("<I", 1) + bytes(4))
    with pytest.raises(ConfigError):
        read_tensor(p)


def test_nonzero_padding(tmp_path):
    p = tmp_path / "bad.mxt"
    p.write_bytes(b"MXT1" + bytes([1, 1, 7, 0]) + struct.pack("<I", 1) + bytes(4))
    with pytest.raises(ConfigError):
        read_tensor(p)


def test_truncated_payload(tmp_path):
    p = tmp_path / "bad.mxt"
    p.write_bytes(b"MXT1" + bytes([1, 1, 0, 0]) + struct.pack("<I", 4) + bytes(8))
    with pytest.raises(ConfigError):
        read_tensor(p)


def test_pool_round_trip(tmp_path):
    samples = np.array(
        [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]], dtype=np.float32
    ).astype(np.float64)
    labels = np.array([1, 0, 1, 1])
    root = tmp_path / "pool"
    save_pool(root, samples, labels)

    assert (root / "labels.csv").is_file()
    assert (root / "class_0" / "sample_0.mxt").is_file()
    assert (root / "class_1" / "sample_2.mxt").is_file()

    got_s, got_l = load_pool(root)
    # labels.csv preserves the original sample order exactly
    assert np.array_equal(got_s, samples)
    assert np.array_equal(got_l, labels)


def test_pool_missing_index(tmp_path):
    with pytest.raises(BackendUnavailable):
        load_pool(tmp_path / "nowhere")


def test_pool_bad_header(tmp_path):
    root = tmp_path / "pool"
    root.mkdir()
    (root / "labels.csv").write_text("a,b\n")
    with pytest.raises(ConfigError):
        load_pool(root)


def test_pool_empty(tmp_path):
    root = tmp_path / "pool"
    root.mkdir()
    (root / "labels.csv").write_text("path,label\n")
    with pytest.raises(ConfigError):
        load_pool(root)

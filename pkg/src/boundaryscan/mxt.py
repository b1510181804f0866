"""MXT1 tensor files and the sample-pool directory layout.

MXT1 is a minimal binary tensor container:

    bytes 0-3   magic "MXT1"
    byte  4     dtype code (1 = 32-bit float; no other codes defined)
    byte  5     rank
    bytes 6-7   zero padding
    then        rank x u32 little-endian dims
    then        payload, little-endian, row-major

A sample pool is a directory of one MXT file per sample::

    {pool}/class_{m}/sample_{i}.mxt
    {pool}/labels.csv        # rows of "path,label", paths pool-relative

labels.csv fixes the sample order; readers must not rely on directory
listing order.
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import BackendUnavailable, ConfigError

MAGIC = b"MXT1"
DTYPE_F32 = 1


def write_tensor(path, array: np.ndarray) -> None:
    """Write a float32 tensor; other dtypes are cast."""
    a = np.ascontiguousarray(array, dtype="<f4")
    if a.ndim < 1 or a.ndim > 255:
        raise ConfigError(f"unsupported tensor rank {a.ndim}")
    header = MAGIC + bytes([DTYPE_F32, a.ndim, 0, 0])
    dims = b"".join(struct.pack("<I", d) for d in a.shape)
    Path(path).write_bytes(header + dims + a.tobytes())


def read_tensor(path) -> np.ndarray:
    """Read an MXT1 file back into a float32 array.

    Raises BackendUnavailable if the file is missing and ConfigError if the
    contents are not a valid MXT1 tensor.
    """
    p = Path(path)
    if not p.is_file():
        raise BackendUnavailable(f"tensor file not found: {p}")
    blob = p.read_bytes()
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise ConfigError(f"not an MXT1 file: {p}")
    dtype_code, rank, pad0, pad1 = blob[4], blob[5], blob[6], blob[7]
    if dtype_code != DTYPE_F32:
        raise ConfigError(f"unknown dtype code {dtype_code} in {p}")
    if pad0 or pad1:
        raise ConfigError(f"nonzero padding bytes in {p}")
    need = 8 + 4 * rank
    if len(blob) < need:
        raise ConfigError(f"truncated header in {p}")
    dims = struct.unpack("<" + "I" * rank, blob[8:need])
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    payload = blob[need:]
    if len(payload) != 4 * count:
        raise ConfigError(f"payload size mismatch in {p}")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def save_pool(root, samples: np.ndarray, labels: np.ndarray) -> None:
    """Write a labeled sample set as a pool directory."""
    root = Path(root)
    samples = np.asarray(samples)
    labels = np.asarray(labels, dtype=np.int64)
    if samples.ndim != 2 or len(samples) != len(labels):
        raise ConfigError("pool needs 2D samples and one label per sample")
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    counter: dict[int, int] = {}
    for x, lab in zip(samples, labels):
        m = int(lab)
        i = counter.get(m, 0)
        counter[m] = i + 1
        rel = f"class_{m}/sample_{i}.mxt"
        (root / f"class_{m}").mkdir(exist_ok=True)
        write_tensor(root / rel, x)
        rows.append((rel, m))
    with open(root / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label"])
        writer.writerows(rows)


def load_pool(root) -> tuple[np.ndarray, np.ndarray]:
    """Read a pool directory; returns (samples, labels) in labels.csv order.

    Samples come back as float64 (the values are exactly the stored float32
    values, so writing and re-reading a pool is lossless).
    """
    root = Path(root)
    index = root / "labels.csv"
    if not index.is_file():
        raise BackendUnavailable(f"pool index not found: {index}")
    samples = []
    labels = []
    with open(index, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["path", "label"]:
            raise ConfigError(f"unexpected labels.csv header in {root}")
        for row in reader:
            if len(row) != 2:
                raise ConfigError(f"malformed labels.csv row {row!r} in {root}")
            rel, lab = row
            vec = read_tensor(root / rel)
            if vec.ndim != 1:
                raise ConfigError(f"pool sample {rel} is not a vector")
            samples.append(vec.astype(np.float64))
            labels.append(int(lab))
    if not samples:
        raise ConfigError(f"pool {root} is empty")
    widths = {len(s) for s in samples}
    if len(widths) != 1:
        raise ConfigError(f"pool {root} mixes sample dimensions {sorted(widths)}")
    return np.stack(samples), np.asarray(labels, dtype=np.int64)

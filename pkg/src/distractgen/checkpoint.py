"""Flat binary checkpoint: name -> shape + row-major float64 values.

Layout: magic, config-hash line, parameter count, then per parameter a
length-prefixed name, the dims, and raw little-endian float64 bytes.
Round-trips are bit-exact (float32 models are stored upcast; the
f32 -> f64 -> f32 cycle is lossless).
"""

import struct
from collections import OrderedDict

import numpy as np

MAGIC = b"DGCKPT1\n"


def save_checkpoint(path, values_by_name, config_hash):
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(config_hash.encode("ascii") + b"\n")
        fh.write(struct.pack("<I", len(values_by_name)))
        for name, arr in values_by_name.items():
            data = np.ascontiguousarray(arr, dtype="<f8")
            name_b = name.encode("utf-8")
            fh.write(struct.pack("<H", len(name_b)))
            fh.write(name_b)
            fh.write(struct.pack("<B", data.ndim))
            for d in data.shape:
                fh.write(struct.pack("<I", d))
            fh.write(data.tobytes(order="C"))


def load_checkpoint(path):
    """Returns (OrderedDict name -> float64 array, config_hash)."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path} is not a checkpoint file")
        config_hash = fh.readline().strip().decode("ascii")
        (count,) = struct.unpack("<I", fh.read(4))
        values = OrderedDict()
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(ndim))
            n = int(np.prod(shape)) if shape else 1
            buf = fh.read(8 * n)
            if len(buf) != 8 * n:
                raise ValueError(f"{path}: truncated data for parameter {name!r}")
            values[name] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return values, config_hash

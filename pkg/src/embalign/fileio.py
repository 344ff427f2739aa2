"""Binary embedding files, CSV fallback, and the model container format.

All binary layouts are explicitly little-endian so files are portable
across platforms. Embedding payloads may be 32- or 64-bit floats; 32-bit
payloads are widened to 64-bit on load.

Embedding file ("EMB1"):
    magic       4 bytes  b"EMB1"
    dtype code  u8       0 = float32 LE, 1 = float64 LE
    n           u64 LE   row count
    d           u32 LE   dimension
    label len   u16 LE   followed by that many UTF-8 label bytes
    payload     n * d values, row major

Model file ("ALN1"):
    magic       4 bytes  b"ALN1"
    version     u8       currently 1
    header len  u32 LE   followed by a UTF-8 JSON header
    payload     w (d*d), mean_a (d), mean_b (d) as float64 LE
    checksum    u32 LE   CRC-32 of everything before it
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    ChecksumMismatchError,
    FileFormatError,
    NonFiniteValueError,
    NonRectangularCsvError,
    TruncatedPayloadError,
    VersionUnsupportedError,
)
from .types import AlignmentModel, EmbeddingMatrix, NormalizationStats, PipelineConfig
from .util import as_float_matrix

EMB_MAGIC = b"EMB1"
MODEL_MAGIC = b"ALN1"
MODEL_VERSION = 1

_EMB_HEADER = struct.Struct("<4sBQIH")
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {"f4": 0, "f8": 1}


def write_embeddings(path, x, dtype: str = "f8") -> None:
    """Write an embedding matrix; ``dtype`` is "f8" (default) or "f4".

    A path ending in .csv writes the CSV fallback format instead
    (header-less comma-separated rows, always full precision).
    """
    path = Path(path)
    data = as_float_matrix(x)
    label = getattr(x, "label", "")
    if path.suffix.lower() == ".csv":
        _write_csv(path, data)
        return
    if dtype not in _DTYPE_CODES:
        raise ValueError(f"dtype must be 'f4' or 'f8', got {dtype!r}")
    code = _DTYPE_CODES[dtype]
    label_bytes = label.encode("utf-8")
    if len(label_bytes) > 0xFFFF:
        label_bytes = label_bytes[:0xFFFF]
    header = _EMB_HEADER.pack(
        EMB_MAGIC, code, data.shape[0], data.shape[1], len(label_bytes)
    )
    payload = np.ascontiguousarray(data, dtype=_DTYPES[code]).tobytes()
    path.write_bytes(header + label_bytes + payload)


def read_embeddings(path) -> EmbeddingMatrix:
    """Read an embedding file written by :func:`write_embeddings`.

    Paths ending in .csv are parsed as the CSV fallback. 32-bit payloads
    are widened to 64-bit; non-finite stored values are rejected.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _read_csv(path)
    blob = path.read_bytes()
    if len(blob) < _EMB_HEADER.size:
        raise TruncatedPayloadError(f"{path}: file shorter than the header")
    magic, code, n, d, label_len = _EMB_HEADER.unpack_from(blob)
    if magic != EMB_MAGIC:
        raise BadMagicError(f"{path}: expected magic {EMB_MAGIC!r}, found {magic!r}")
    if code not in _DTYPES:
        raise FileFormatError(f"{path}: unknown dtype code {code}")
    offset = _EMB_HEADER.size
    if len(blob) < offset + label_len:
        raise TruncatedPayloadError(f"{path}: label is truncated")
    label = blob[offset : offset + label_len].decode("utf-8")
    offset += label_len
    expected = n * d * _DTYPES[code].itemsize
    if len(blob) - offset < expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {len(blob) - offset} bytes, expected {expected}"
        )
    if len(blob) - offset > expected:
        raise FileFormatError(f"{path}: {len(blob) - offset - expected} trailing bytes")
    data = np.frombuffer(blob, dtype=_DTYPES[code], count=n * d, offset=offset)
    data = data.astype(np.float64).reshape(n, d)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValueError(f"{path}: payload contains non-finite values")
    return EmbeddingMatrix(data, label=label)


def _write_csv(path: Path, data: np.ndarray) -> None:
    lines = [",".join(repr(v) for v in row) for row in data.tolist()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_csv(path: Path) -> EmbeddingMatrix:
    rows = []
    width = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise NonRectangularCsvError(
                f"{path}: line {lineno} has {len(cells)} cells, expected {width}"
            )
        try:
            row = [float(cell) for cell in cells]
        except ValueError as err:
            raise FileFormatError(f"{path}: line {lineno}: {err}") from None
        rows.append(row)
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    data = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValueError(f"{path}: contains non-finite values")
    return EmbeddingMatrix(data)


def save_model(path, model: AlignmentModel) -> None:
    """Serialize a fitted model; the map round-trips bitwise."""
    path = Path(path)
    d = model.d
    header = {
        "d": d,
        "config": model.config.to_dict(),
        "diagnostics": {k: list(map(float, v)) for k, v in model.diagnostics.items()},
        "mean_norm_share_a": model.stats_a.mean_norm_share,
        "mean_norm_share_b": model.stats_b.mean_norm_share,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes()
        for arr in (model.w, model.stats_a.mean, model.stats_b.mean)
    )
    body = (
        MODEL_MAGIC
        + struct.pack("<B", MODEL_VERSION)
        + struct.pack("<I", len(header_bytes))
        + header_bytes
        + payload
    )
    checksum = struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
    path.write_bytes(body + checksum)


def load_model(path) -> AlignmentModel:
    """Load a model file, verifying version and checksum."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 13:
        raise TruncatedPayloadError(f"{path}: file shorter than the header")
    if blob[:4] != MODEL_MAGIC:
        raise BadMagicError(f"{path}: expected magic {MODEL_MAGIC!r}, found {blob[:4]!r}")
    version = blob[4]
    if version != MODEL_VERSION:
        raise VersionUnsupportedError(
            f"{path}: format version {version} is not supported (expected {MODEL_VERSION})"
        )
    stored = struct.unpack("<I", blob[-4:])[0]
    actual = zlib.crc32(blob[:-4]) & 0xFFFFFFFF
    if stored != actual:
        raise ChecksumMismatchError(
            f"{path}: checksum mismatch (stored {stored:#010x}, computed {actual:#010x})"
        )

    header_len = struct.unpack_from("<I", blob, 5)[0]
    offset = 9
    if len(blob) - 4 < offset + header_len:
        raise TruncatedPayloadError(f"{path}: header is truncated")
    try:
        header = json.loads(blob[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise FileFormatError(f"{path}: bad header: {err}") from None
    offset += header_len

    d = int(header["d"])
    expected = (d * d + 2 * d) * 8
    if len(blob) - 4 - offset != expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {len(blob) - 4 - offset} bytes, expected {expected}"
        )
    values = np.frombuffer(blob, dtype="<f8", count=d * d + 2 * d, offset=offset)
    values = values.astype(np.float64)
    w = values[: d * d].reshape(d, d)
    mean_a = values[d * d : d * d + d]
    mean_b = values[d * d + d :]

    return AlignmentModel(
        w=w,
        stats_a=NormalizationStats(mean_a, header["mean_norm_share_a"]),
        stats_b=NormalizationStats(mean_b, header["mean_norm_share_b"]),
        diagnostics=header["diagnostics"],
        config=PipelineConfig.from_dict(header["config"]),
    )

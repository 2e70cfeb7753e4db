"""Binary store file: save/load an EmbeddingStore bit-exactly.

Layout (all integers little-endian):

    magic "CATL"                      4 bytes
    format version                    u16
    dimensionality                    u32
    count                             u64
    backend name                      u32 length + UTF-8 bytes
    matrix                            count*dim float32, row-major
    record table                      per record: u32 length + JSON line

load(save(s)) reproduces the matrix bytes, the record table, and the
row order exactly. Load never writes, so read-only files are fine.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .corpus import EmbeddingStore, ImageRecord
from .errors import CorruptStore

MAGIC = b"CATL"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHIQ")  # magic, version, dim, count


def save_store(store: EmbeddingStore, path: str | Path) -> None:
    path = Path(path)
    name_bytes = store.backend_name.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(MAGIC, FORMAT_VERSION, store.dimensionality, store.count)
        )
        fh.write(struct.pack("<I", len(name_bytes)))
        fh.write(name_bytes)
        fh.write(store.matrix.astype("<f4", copy=False).tobytes())
        for rec in store.records:
            line = json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True)
            data = line.encode("utf-8") + b"\n"
            fh.write(struct.pack("<I", len(data)))
            fh.write(data)


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    offset = fh.tell()
    data = fh.read(n)
    if len(data) != n:
        raise CorruptStore(offset, f"truncated while reading {what}")
    return data


def load_store(path: str | Path) -> EmbeddingStore:
    path = Path(path)
    with open(path, "rb") as fh:
        header = _read_exact(fh, _HEADER.size, "header")
        magic, version, dim, count = _HEADER.unpack(header)
        if magic != MAGIC:
            raise CorruptStore(0, f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != FORMAT_VERSION:
            raise CorruptStore(
                4, f"unsupported version {version}, expected {FORMAT_VERSION}"
            )
        (name_len,) = struct.unpack("<I", _read_exact(fh, 4, "backend name length"))
        backend_name = _read_exact(fh, name_len, "backend name").decode("utf-8")
        matrix_bytes = _read_exact(fh, count * dim * 4, "matrix")
        matrix = np.frombuffer(matrix_bytes, dtype="<f4").reshape(count, dim)
        records = []
        for i in range(count):
            (rec_len,) = struct.unpack(
                "<I", _read_exact(fh, 4, f"record {i} length")
            )
            offset = fh.tell()
            raw = _read_exact(fh, rec_len, f"record {i}")
            try:
                records.append(ImageRecord.from_json(json.loads(raw)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorruptStore(offset, f"record {i} unparsable: {exc}")
    return EmbeddingStore(
        matrix=matrix.astype(np.float32), records=records, backend_name=backend_name
    )

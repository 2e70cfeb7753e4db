"""Corpus ingestion: records, manifests, directory scans, batch embedding.

A corpus has one canonical order — manifest row order when a manifest is
given, lexicographic relative path for directory scans — and the store's
matrix rows follow it bit-for-bit regardless of batch size or worker
count.
"""

from __future__ import annotations

import csv
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .backends import EncoderBackend
from .embedding import normalize
from .errors import BackendError, DuplicateId, EmptyCorpus, ManifestError

GeoPoint = tuple[float, float]  # (lat, lon) in degrees


@dataclass(frozen=True)
class ImageRecord:
    """One corpus item: stable id, source uri, optional geo, metadata."""

    id: str
    uri: str
    geo: GeoPoint | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be nonempty")
        if self.geo is not None:
            lat, lon = self.geo
            if not (-90.0 <= lat <= 90.0):
                raise ValueError(f"latitude {lat} out of range for {self.id!r}")
            if not (-180.0 <= lon <= 180.0):
                raise ValueError(f"longitude {lon} out of range for {self.id!r}")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "uri": self.uri,
            "geo": list(self.geo) if self.geo is not None else None,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ImageRecord":
        geo = obj.get("geo")
        return cls(
            id=obj["id"],
            uri=obj["uri"],
            geo=(float(geo[0]), float(geo[1])) if geo is not None else None,
            metadata=dict(obj.get("metadata") or {}),
        )


class EmbeddingStore:
    """Immutable matrix of unit-norm embeddings plus the record table.

    Row i belongs to records[i]; the order is the canonical corpus order
    and save/load preserves it bit-exactly.
    """

    def __init__(
        self,
        matrix: np.ndarray,
        records: list[ImageRecord],
        backend_name: str,
    ):
        matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        if matrix.ndim != 2:
            raise ValueError(f"matrix must be 2-d, got shape {matrix.shape}")
        if matrix.shape[0] != len(records):
            raise ValueError(
                f"{matrix.shape[0]} rows for {len(records)} records"
            )
        if matrix.shape[0] > 0:
            norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
            bad = np.nonzero(np.abs(norms - 1.0) > 1e-5)[0]
            if bad.size:
                raise ValueError(
                    f"row {bad[0]} is not unit-norm (|v|={norms[bad[0]]:.8f})"
                )
        seen: set[str] = set()
        for rec in records:
            if rec.id in seen:
                raise DuplicateId(rec.id)
            seen.add(rec.id)
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.records = list(records)
        self.backend_name = backend_name
        self._by_id = {rec.id: i for i, rec in enumerate(self.records)}

    @property
    def count(self) -> int:
        return self.matrix.shape[0]

    @property
    def dimensionality(self) -> int:
        return self.matrix.shape[1]

    def row(self, record_id: str) -> np.ndarray:
        return self.matrix[self._by_id[record_id]]

    def get(self, record_id: str) -> ImageRecord | None:
        i = self._by_id.get(record_id)
        return self.records[i] if i is not None else None

    def ids(self) -> list[str]:
        return [rec.id for rec in self.records]


# ---------------------------------------------------------------------------
# Scanning


def scan_corpus(source: str | Path) -> list[ImageRecord]:
    """Build the record list from a directory or a CSV/JSONL manifest.

    Directory scans emit one record per file PIL can identify, with
    id = POSIX relative path, sorted by id so the result is a pure
    function of the file set. Manifest scans keep row order.
    """
    path = Path(source)
    if path.is_dir():
        return _scan_directory(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus source does not exist: {path}")
    if path.suffix.lower() == ".jsonl":
        return _scan_jsonl(path)
    return _scan_csv(path)


def _is_image(path: Path) -> bool:
    try:
        with Image.open(path):
            return True
    except (UnidentifiedImageError, OSError):
        return False


def _scan_directory(root: Path) -> list[ImageRecord]:
    records = []
    for p in root.rglob("*"):
        if not p.is_file() or not _is_image(p):
            continue
        rel = p.relative_to(root).as_posix()
        records.append(ImageRecord(id=rel, uri=str(p.resolve())))
    records.sort(key=lambda r: r.id)
    return records


def _resolve_uri(uri: str, base: Path) -> str:
    if uri.startswith(("http://", "https://")):
        return uri
    p = Path(uri)
    return str(p if p.is_absolute() else (base / p).resolve())


def _build_record(
    line_no: int,
    raw: dict[str, str],
    base: Path,
    seen: set[str],
) -> ImageRecord:
    rec_id = (raw.pop("id", "") or "").strip()
    uri = (raw.pop("uri", "") or "").strip()
    if not rec_id:
        raise ManifestError(line_no, "missing required field 'id'")
    if not uri:
        raise ManifestError(line_no, "missing required field 'uri'")
    if rec_id in seen:
        raise DuplicateId(rec_id)
    lat_s = raw.pop("lat", None)
    lon_s = raw.pop("lon", None)
    lat_s = lat_s.strip() if isinstance(lat_s, str) else lat_s
    lon_s = lon_s.strip() if isinstance(lon_s, str) else lon_s
    geo = None
    if lat_s not in (None, "") or lon_s not in (None, ""):
        if lat_s in (None, "") or lon_s in (None, ""):
            raise ManifestError(line_no, "lat and lon must be given together")
        try:
            geo = (float(lat_s), float(lon_s))
        except ValueError:
            raise ManifestError(line_no, f"non-numeric lat/lon: {lat_s!r}, {lon_s!r}")
        if not (-90.0 <= geo[0] <= 90.0):
            raise ManifestError(line_no, f"latitude {geo[0]} out of [-90, 90]")
        if not (-180.0 <= geo[1] <= 180.0):
            raise ManifestError(line_no, f"longitude {geo[1]} out of [-180, 180]")
    metadata = {k: str(v) for k, v in raw.items() if v is not None and v != ""}
    seen.add(rec_id)
    return ImageRecord(
        id=rec_id, uri=_resolve_uri(uri, base), geo=geo, metadata=metadata
    )


def _scan_csv(path: Path) -> list[ImageRecord]:
    base = path.resolve().parent
    records: list[ImageRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(1, "empty manifest")
        header = [h.strip() for h in header]
        for row in reader:
            line_no = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ManifestError(
                    line_no, f"expected {len(header)} fields, got {len(row)}"
                )
            records.append(
                _build_record(line_no, dict(zip(header, row)), base, seen)
            )
    return records


def _scan_jsonl(path: Path) -> list[ImageRecord]:
    base = path.resolve().parent
    records: list[ImageRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(line_no, f"invalid JSON: {exc}")
            if not isinstance(obj, dict):
                raise ManifestError(line_no, "row must be a JSON object")
            raw = {k: ("" if v is None else str(v)) for k, v in obj.items()}
            records.append(_build_record(line_no, raw, base, seen))
    return records


# ---------------------------------------------------------------------------
# Embedding


@dataclass(frozen=True)
class EmbedFailure:
    record_id: str
    uri: str
    reason: str


@dataclass
class EmbedResult:
    """Store plus the per-record failures that were dropped from it."""

    store: EmbeddingStore
    failures: list[EmbedFailure]


def _read_bytes(uri: str) -> bytes:
    if uri.startswith(("http://", "https://")):
        import requests

        resp = requests.get(uri, timeout=30)
        resp.raise_for_status()
        return resp.content
    return Path(uri).read_bytes()


def embed_corpus(
    records: list[ImageRecord],
    backend: EncoderBackend,
    batch_size: int = 32,
    workers: int = 1,
) -> EmbedResult:
    """Embed every record, one normalized row per record in record order.

    Records whose bytes cannot be read or decoded are dropped and listed
    in the result's failures, never silently. Output is bit-identical
    for any batch size and worker count: each vector depends only on its
    own input bytes.
    """
    if not records:
        raise EmptyCorpus("no records to embed")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")

    lock = threading.Lock() if (workers > 1 and not backend.thread_safe) else None

    def encode_one(rec: ImageRecord) -> np.ndarray:
        data = _read_bytes(rec.uri)
        if lock is not None:
            with lock:
                raw = backend.encode_image(data)
        else:
            raw = backend.encode_image(data)
        if raw.shape[0] != backend.dimensionality:
            raise BackendError(
                f"{backend.name} returned dim {raw.shape[0]}, "
                f"declared {backend.dimensionality}"
            )
        return normalize(raw)

    vectors: list[np.ndarray | None] = [None] * len(records)
    failures: list[EmbedFailure] = []

    for start in range(0, len(records), batch_size):
        stop = min(start + batch_size, len(records))
        batch = [(i, records[i]) for i in range(start, stop)]
        if workers == 1:
            outcomes = [_attempt(encode_one, rec) for _, rec in batch]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(lambda ir: _attempt(encode_one, ir[1]), batch))
        for (idx, rec), outcome in zip(batch, outcomes):
            if isinstance(outcome, np.ndarray):
                vectors[idx] = outcome
            else:
                failures.append(EmbedFailure(rec.id, rec.uri, outcome))

    kept = [(vec, rec) for vec, rec in zip(vectors, records) if vec is not None]
    if not kept:
        raise EmptyCorpus(
            f"all {len(records)} records failed to embed "
            f"(first: {failures[0].reason})"
        )
    matrix = np.stack([vec for vec, _ in kept]).astype(np.float32)
    store = EmbeddingStore(
        matrix=matrix,
        records=[rec for _, rec in kept],
        backend_name=backend.name,
    )
    return EmbedResult(store=store, failures=failures)


def _attempt(encode, rec: ImageRecord):
    """Run one encode; return the vector or a failure reason string."""
    try:
        return encode(rec)
    except BackendError:
        raise
    except Exception as exc:
        return f"{type(exc).__name__}: {exc}"

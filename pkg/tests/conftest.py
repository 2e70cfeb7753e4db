"""Shared fixtures: synthetic images, random stores, toy corpora."""

from __future__ import annotations

import io

import numpy as np
import pytest
from PIL import Image

from catlas import EmbeddingStore, ImageRecord, ToyEncoderBackend


def solid_png(rgb: tuple[int, int, int], size: int = 8) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (size, size), rgb).save(buf, format="PNG")
    return buf.getvalue()


def random_unit_rows(n: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, dim))
    return (raw / np.linalg.norm(raw, axis=1, keepdims=True)).astype(np.float32)


def make_store(
    matrix: np.ndarray,
    ids: list[str] | None = None,
    geos: list[tuple[float, float] | None] | None = None,
    backend_name: str = "toy",
) -> EmbeddingStore:
    n = matrix.shape[0]
    if ids is None:
        ids = [f"img-{i:05d}" for i in range(n)]
    records = [
        ImageRecord(
            id=ids[i],
            uri=f"mem://{ids[i]}",
            geo=geos[i] if geos is not None else None,
        )
        for i in range(n)
    ]
    return EmbeddingStore(matrix=matrix, records=records, backend_name=backend_name)


@pytest.fixture
def toy_backend() -> ToyEncoderBackend:
    return ToyEncoderBackend()


@pytest.fixture
def rgb_dir(tmp_path):
    """Directory with one solid image per primary color plus a text file."""
    colors = {"red": (255, 0, 0), "green": (0, 255, 0), "blue": (0, 0, 255)}
    root = tmp_path / "imgs"
    root.mkdir()
    for name, rgb in colors.items():
        (root / f"{name}.png").write_bytes(solid_png(rgb))
    (root / "notes.txt").write_text("not an image")
    return root

"""Two-axis concept scatter: a corpus measured against two prompts.

The residual is the signed perpendicular distance to the y = x diagonal,
(y - x) / sqrt(2): positive means the image leans toward the y-axis
concept, negative toward x. Raw cosines are the default axes; rank and
z-score normalization are available because raw cosine ranges differ
per prompt.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .backends import EncoderBackend
from .corpus import EmbeddingStore
from .embedding import Prompt, score_corpus, zscores
from .errors import DegenerateScores

SQRT2 = math.sqrt(2.0)

Normalization = Literal["none", "rank", "zscore"]


@dataclass(frozen=True)
class AxisSpec:
    prompt: Prompt
    normalization: Normalization = "none"

    def __post_init__(self):
        if self.normalization not in ("none", "rank", "zscore"):
            raise ValueError(f"unknown normalization {self.normalization!r}")


@dataclass(frozen=True)
class ScatterPoint:
    image_id: str
    x: float
    y: float
    residual: float


def rank_normalize(values: np.ndarray) -> np.ndarray:
    """Map scores to (rank - 1) / (n - 1) in [0, 1], averaging tied ranks.

    A single point has no spread; it maps to the midpoint 0.5, the limit
    of the all-ties case.
    """
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if n == 1:
        return np.array([0.5])
    order = np.argsort(values, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # 1-based average rank
        i = j + 1
    return (ranks - 1.0) / (n - 1.0)


def _normalize_axis(values: np.ndarray, normalization: str) -> np.ndarray:
    if normalization == "none":
        return np.asarray(values, dtype=np.float64)
    if normalization == "rank":
        return rank_normalize(values)
    if normalization == "zscore":
        return zscores(values)
    raise ValueError(f"unknown normalization {normalization!r}")


def sample_indices(count: int, sample: int | None, seed: int) -> list[int]:
    """Seeded uniform subsample, returned in store order."""
    if sample is None or sample >= count:
        return list(range(count))
    if sample < 1:
        raise ValueError("sample must be >= 1")
    rng = np.random.default_rng(seed)
    return sorted(rng.choice(count, size=sample, replace=False).tolist())


def scatter(
    store: EmbeddingStore,
    axis_x: AxisSpec,
    axis_y: AxisSpec,
    backend: EncoderBackend,
    sample: int | None = None,
    seed: int = 0,
) -> list[ScatterPoint]:
    """Score the corpus on both axes, normalize each, compute residuals.

    Point order follows store order. When sample is smaller than the
    corpus, a seeded uniform subsample is drawn first and normalization
    runs over the subsample (it is the plotted population).
    """
    xs_raw = np.array(
        [s.score for s in score_corpus(store, axis_x.prompt, backend)]
    )
    ys_raw = np.array(
        [s.score for s in score_corpus(store, axis_y.prompt, backend)]
    )
    idx = sample_indices(store.count, sample, seed)
    ids = [store.records[i].id for i in idx]
    xs = _normalize_axis(xs_raw[idx], axis_x.normalization)
    ys = _normalize_axis(ys_raw[idx], axis_y.normalization)
    return [
        ScatterPoint(
            image_id=rec_id,
            x=float(x),
            y=float(y),
            residual=float((y - x) / SQRT2),
        )
        for rec_id, x, y in zip(ids, xs, ys)
    ]


def correlation(points: list[ScatterPoint]) -> float:
    """Pearson correlation of the (x, y) pairs, in [-1, 1].

    Exact 1.0 for y == x: the numerator and both sum-of-squares terms
    are then the same float, and sqrt(s*s) == s in IEEE binary.
    """
    if len(points) < 2:
        raise DegenerateScores("correlation needs at least 2 points")
    xs = np.array([p.x for p in points], dtype=np.float64)
    ys = np.array([p.y for p in points], dtype=np.float64)
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    ssx = float(np.dot(xc, xc))
    ssy = float(np.dot(yc, yc))
    if ssx < 1e-24 or ssy < 1e-24:
        raise DegenerateScores("zero variance on an axis")
    r = float(np.dot(xc, yc)) / math.sqrt(ssx * ssy)
    return max(-1.0, min(1.0, r))


def residual_extremes(
    points: list[ScatterPoint], n: int
) -> tuple[list[ScatterPoint], list[ScatterPoint]]:
    """Most-above and most-below the diagonal; ties break by id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    above = sorted(points, key=lambda p: (-p.residual, p.image_id))[:n]
    below = sorted(points, key=lambda p: (p.residual, p.image_id))[:n]
    return above, below


def _f32_str(v: float) -> str:
    """Shortest decimal that round-trips at float32 precision."""
    return str(np.float32(v))


def export_scatter(
    points: list[ScatterPoint],
    path: str | Path,
    format: Literal["csv", "jsonl"] = "csv",
    meta: dict | None = None,
) -> Path:
    """Write points as CSV (header id,x,y,residual) or JSONL.

    Numbers are rendered as shortest float32-round-trip decimals. When
    meta is given, a <path>.meta.json sidecar records it (prompts,
    backend, normalization, seed) for reproducibility.
    """
    if not points:
        raise ValueError("no points to export")
    path = Path(path)
    lines = []
    if format == "csv":
        lines.append("id,x,y,residual")
        for p in points:
            pid = p.image_id
            if any(ch in pid for ch in ',"\n'):
                pid = '"' + pid.replace('"', '""') + '"'
            lines.append(
                f"{pid},{_f32_str(p.x)},{_f32_str(p.y)},{_f32_str(p.residual)}"
            )
    elif format == "jsonl":
        for p in points:
            lines.append(
                f'{{"id": {json.dumps(p.image_id, ensure_ascii=False)}, '
                f'"x": {_f32_str(p.x)}, "y": {_f32_str(p.y)}, '
                f'"residual": {_f32_str(p.residual)}}}'
            )
    else:
        raise ValueError(f"unknown format {format!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if meta is not None:
        sidecar = path.with_name(path.name + ".meta.json")
        sidecar.write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return path


def load_scatter(path: str | Path) -> list[ScatterPoint]:
    """Read back an exported scatter file (format from the content)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    points = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return points
    if lines[0].startswith("{"):
        for ln in lines:
            obj = json.loads(ln)
            points.append(
                ScatterPoint(obj["id"], obj["x"], obj["y"], obj["residual"])
            )
    else:
        import csv as _csv
        import io as _io

        reader = _csv.reader(_io.StringIO(text))
        header = next(reader)
        if header != ["id", "x", "y", "residual"]:
            raise ValueError(f"unexpected scatter header: {header}")
        for row in reader:
            if not row:
                continue
            points.append(
                ScatterPoint(row[0], float(row[1]), float(row[2]), float(row[3]))
            )
    return points

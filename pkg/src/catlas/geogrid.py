"""Concept heat maps: lattice sampling, grid binning, score aggregation.

Binning is plain equirectangular (degree) binning, not a projected grid;
at city scale the distortion is tolerable and the cells stay axis-aligned
for GeoJSON consumers. Cells are half-open [edge_i, edge_i+1) with the
maximum lat/lon edges inclusive, so every in-bbox point lands in exactly
one cell and cell counts conserve the in-bbox record count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .backends import EncoderBackend
from .corpus import EmbeddingStore
from .embedding import ConceptScore, Prompt, score_corpus, zscores
from .errors import BadInterval, EmptyRegion

DEFAULT_GRID_ROWS = 64
DEFAULT_GRID_COLS = 64
DEFAULT_MIN_COUNT = 3

# Members listed per cell in exports; counts above this are summarized.
MEMBERS_PER_CELL = 32

Stat = Literal["mean", "max"]


@dataclass(frozen=True)
class GeoBBox:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self):
        if not (-90.0 <= self.lat_min < self.lat_max <= 90.0):
            raise ValueError(
                f"bad latitude range [{self.lat_min}, {self.lat_max}]"
            )
        if not (-180.0 <= self.lon_min < self.lon_max <= 180.0):
            raise ValueError(
                f"bad longitude range [{self.lon_min}, {self.lon_max}] "
                f"(antimeridian-crossing boxes are not supported)"
            )

    @property
    def lat_span(self) -> float:
        return self.lat_max - self.lat_min

    @property
    def lon_span(self) -> float:
        return self.lon_max - self.lon_min

    def contains(self, lat: float, lon: float) -> bool:
        return (
            self.lat_min <= lat <= self.lat_max
            and self.lon_min <= lon <= self.lon_max
        )


@dataclass(frozen=True)
class GridSpec:
    bbox: GeoBBox
    rows: int = DEFAULT_GRID_ROWS
    cols: int = DEFAULT_GRID_COLS

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid needs at least 1 row and 1 column")


@dataclass
class HeatGrid:
    """Aggregated concept scores on a lat/lon grid.

    counts[r, c] is the number of in-bbox geo records in the cell.
    aggregates is NaN where a cell is empty; heats is NaN where the count
    is below the min_count floor. members maps (row, col) to the cell's
    (image_id, score) pairs, score-descending.
    """

    spec: GridSpec
    counts: np.ndarray
    aggregates: np.ndarray
    heats: np.ndarray
    members: dict[tuple[int, int], list[tuple[str, float]]]
    stat: str
    min_count: int

    @property
    def bbox(self) -> GeoBBox:
        return self.spec.bbox

    @property
    def rows(self) -> int:
        return self.spec.rows

    @property
    def cols(self) -> int:
        return self.spec.cols


def sample_points(bbox: GeoBBox, interval: float) -> list[tuple[float, float]]:
    """Regular lat/lon lattice over the bbox, row-major from the SW corner.

    The per-axis point count is floor(span/interval) + 1; a 1e-9 slack
    absorbs float noise when the interval divides the span exactly.
    """
    if interval <= 0:
        raise BadInterval(f"interval must be positive, got {interval}")
    if interval > min(bbox.lat_span, bbox.lon_span):
        raise BadInterval(
            f"interval {interval} exceeds the smaller bbox span "
            f"{min(bbox.lat_span, bbox.lon_span)}"
        )
    n_lat = int(math.floor(bbox.lat_span / interval + 1e-9))
    n_lon = int(math.floor(bbox.lon_span / interval + 1e-9))
    points = []
    for i in range(n_lat + 1):
        lat = min(bbox.lat_min + i * interval, bbox.lat_max)
        for j in range(n_lon + 1):
            lon = min(bbox.lon_min + j * interval, bbox.lon_max)
            points.append((lat, lon))
    return points


def _axis_index(value: float, lo: float, hi: float, n: int) -> int:
    if value >= hi:
        return n - 1  # max edge inclusive
    idx = int(math.floor((value - lo) / (hi - lo) * n))
    return min(max(idx, 0), n - 1)


def assign_cell(
    geo: tuple[float, float], spec: GridSpec
) -> tuple[int, int] | None:
    """Cell of a point, or None when it falls outside the bbox."""
    lat, lon = geo
    if not spec.bbox.contains(lat, lon):
        return None
    return (
        _axis_index(lat, spec.bbox.lat_min, spec.bbox.lat_max, spec.rows),
        _axis_index(lon, spec.bbox.lon_min, spec.bbox.lon_max, spec.cols),
    )


def _bin_scores(
    store: EmbeddingStore,
    scores: list[ConceptScore],
    spec: GridSpec,
    stat: Stat,
    min_count: int,
) -> HeatGrid:
    by_id = {s.image_id: s.score for s in scores}
    cell_scores: dict[tuple[int, int], list[tuple[str, float]]] = {}
    inside = 0
    for rec in store.records:
        if rec.geo is None:
            continue
        cell = assign_cell(rec.geo, spec)
        if cell is None:
            continue
        inside += 1
        cell_scores.setdefault(cell, []).append((rec.id, by_id[rec.id]))
    if inside == 0:
        raise EmptyRegion("no geo-tagged records inside the bounding box")

    counts = np.zeros((spec.rows, spec.cols), dtype=np.int64)
    aggregates = np.full((spec.rows, spec.cols), np.nan)
    for (r, c), pairs in cell_scores.items():
        counts[r, c] = len(pairs)
        values = np.array([s for _, s in pairs], dtype=np.float64)
        aggregates[r, c] = values.mean() if stat == "mean" else values.max()
        pairs.sort(key=lambda p: (-p[1], p[0]))

    heats = np.full((spec.rows, spec.cols), np.nan)
    eligible = counts >= min_count
    if eligible.any():
        vals = aggregates[eligible]
        lo, hi = vals.min(), vals.max()
        if hi - lo < 1e-15:
            heats[eligible] = 0.5  # degenerate range
        else:
            heats[eligible] = (aggregates[eligible] - lo) / (hi - lo)
    return HeatGrid(
        spec=spec,
        counts=counts,
        aggregates=aggregates,
        heats=heats,
        members=cell_scores,
        stat=stat,
        min_count=min_count,
    )


def aggregate_map(
    store: EmbeddingStore,
    prompt: Prompt,
    backend: EncoderBackend,
    spec: GridSpec,
    stat: Stat = "mean",
    min_count: int = DEFAULT_MIN_COUNT,
) -> HeatGrid:
    """Heat map of one prompt: score the corpus, bin by cell, min-max
    normalize the per-cell aggregates of cells that pass min_count."""
    if stat not in ("mean", "max"):
        raise ValueError(f"stat must be 'mean' or 'max', got {stat!r}")
    scores = score_corpus(store, prompt, backend)
    return _bin_scores(store, scores, spec, stat, min_count)


def contrast_scores(
    store: EmbeddingStore,
    prompt_a: Prompt,
    prompt_b: Prompt,
    backend: EncoderBackend,
) -> list[ConceptScore]:
    """Per-image contrast: z-score of prompt_a minus z-score of prompt_b.

    z-scores run over the whole corpus so the two prompts' differing raw
    cosine ranges cannot skew the comparison. Antisymmetric by
    construction: contrast(a, b) == -contrast(b, a) per image.
    """
    scores_a = score_corpus(store, prompt_a, backend)
    scores_b = score_corpus(store, prompt_b, backend)
    za = zscores(np.array([s.score for s in scores_a]))
    zb = zscores(np.array([s.score for s in scores_b]))
    return [
        ConceptScore(rec.id, float(a - b))
        for rec, a, b in zip(store.records, za, zb)
    ]


def contrast_map(
    store: EmbeddingStore,
    prompt_a: Prompt,
    prompt_b: Prompt,
    backend: EncoderBackend,
    spec: GridSpec,
    stat: Stat = "mean",
    min_count: int = DEFAULT_MIN_COUNT,
) -> HeatGrid:
    """Heat map of z(prompt_a) - z(prompt_b), binned like aggregate_map."""
    if stat not in ("mean", "max"):
        raise ValueError(f"stat must be 'mean' or 'max', got {stat!r}")
    contrasts = contrast_scores(store, prompt_a, prompt_b, backend)
    return _bin_scores(store, contrasts, spec, stat, min_count)


def extremes(
    scores: list[ConceptScore], n: int
) -> tuple[list[ConceptScore], list[ConceptScore]]:
    """Highest-n and lowest-n scores; ties break by ascending id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    top = sorted(scores, key=lambda s: (-s.score, s.image_id))[:n]
    bottom = sorted(scores, key=lambda s: (s.score, s.image_id))[:n]
    return top, bottom


# ---------------------------------------------------------------------------
# Export


def _nan_to_none(x: float) -> float | None:
    return None if math.isnan(x) else float(x)


def heat_to_geojson(grid: HeatGrid, meta: dict | None = None) -> dict:
    """GeoJSON FeatureCollection of cell polygons, coordinates lon-lat.

    Properties carry count/aggregate/heat plus the cell's top members
    (capped at MEMBERS_PER_CELL) so map clients can list images per cell.
    """
    bbox = grid.bbox
    lat_step = bbox.lat_span / grid.rows
    lon_step = bbox.lon_span / grid.cols
    features = []
    for r in range(grid.rows):
        lat0 = bbox.lat_min + r * lat_step
        lat1 = bbox.lat_min + (r + 1) * lat_step
        for c in range(grid.cols):
            lon0 = bbox.lon_min + c * lon_step
            lon1 = bbox.lon_min + (c + 1) * lon_step
            members = grid.members.get((r, c), [])
            features.append(
                {
                    "type": "Feature",
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [
                            [
                                [lon0, lat0],
                                [lon1, lat0],
                                [lon1, lat1],
                                [lon0, lat1],
                                [lon0, lat0],
                            ]
                        ],
                    },
                    "properties": {
                        "row": r,
                        "col": c,
                        "count": int(grid.counts[r, c]),
                        "aggregate": _nan_to_none(grid.aggregates[r, c]),
                        "heat": _nan_to_none(grid.heats[r, c]),
                        "members": [
                            {"id": i, "score": s}
                            for i, s in members[:MEMBERS_PER_CELL]
                        ],
                    },
                }
            )
    collection = {
        "type": "FeatureCollection",
        "bbox": [bbox.lon_min, bbox.lat_min, bbox.lon_max, bbox.lat_max],
        "features": features,
    }
    if meta is not None:
        collection["meta"] = meta
    return collection


def heat_to_matrix(grid: HeatGrid, meta: dict | None = None) -> dict:
    """Plain JSON matrix dump of the grid (counts, aggregates, heats)."""
    out = {
        "bbox": {
            "lat_min": grid.bbox.lat_min,
            "lat_max": grid.bbox.lat_max,
            "lon_min": grid.bbox.lon_min,
            "lon_max": grid.bbox.lon_max,
        },
        "rows": grid.rows,
        "cols": grid.cols,
        "stat": grid.stat,
        "min_count": grid.min_count,
        "counts": grid.counts.tolist(),
        "aggregates": [
            [_nan_to_none(v) for v in row] for row in grid.aggregates
        ],
        "heats": [[_nan_to_none(v) for v in row] for row in grid.heats],
    }
    if meta is not None:
        out["meta"] = meta
    return out

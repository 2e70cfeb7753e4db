"""Canonical analysis payloads shared by the CLI and the HTTP service.

Both surfaces serialize through canonical_json, so for identical inputs
they emit byte-identical documents. Floats are Python floats carrying
float32-precision values; json renders their shortest round-trip form.
"""

from __future__ import annotations

import json

from .backends import EncoderBackend
from .corpus import EmbeddingStore
from .embedding import Prompt, score_corpus
from .errors import EmptyRegion
from .geogrid import (
    DEFAULT_MIN_COUNT,
    GeoBBox,
    GridSpec,
    aggregate_map,
    contrast_map,
    extremes,
    heat_to_geojson,
)
from .index import search_text
from .scatter import AxisSpec, residual_extremes, scatter

DEFAULT_K = 10


def canonical_json(payload: dict) -> bytes:
    """Stable, compact serialization: sorted keys, no whitespace."""
    return json.dumps(
        payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def corpus_bbox(store: EmbeddingStore) -> GeoBBox:
    """Tight bounds of the store's geo records, padded when degenerate."""
    lats = [rec.geo[0] for rec in store.records if rec.geo is not None]
    lons = [rec.geo[1] for rec in store.records if rec.geo is not None]
    if not lats:
        raise EmptyRegion("corpus has no geo-tagged records")
    pad = 5e-4
    lat_min, lat_max = min(lats), max(lats)
    lon_min, lon_max = min(lons), max(lons)
    if lat_max - lat_min < pad:
        lat_min, lat_max = lat_min - pad, lat_max + pad
    if lon_max - lon_min < pad:
        lon_min, lon_max = lon_min - pad, lon_max + pad
    return GeoBBox(
        lat_min=max(lat_min, -90.0),
        lat_max=min(lat_max, 90.0),
        lon_min=max(lon_min, -180.0),
        lon_max=min(lon_max, 180.0),
    )


def build_search(
    store: EmbeddingStore,
    backend: EncoderBackend,
    query: str,
    k: int = DEFAULT_K,
    template: str = "{}",
) -> dict:
    hits = search_text(store, Prompt(query, template=template), backend, k)
    return {
        "hits": [
            {"id": h.image_id, "score": h.score, "rank": h.rank} for h in hits
        ],
        "meta": {
            "prompt": query,
            "template": template,
            "backend": backend.name,
            "k": k,
            "corpus_count": store.count,
        },
    }


def build_scatter(
    store: EmbeddingStore,
    backend: EncoderBackend,
    x: str,
    y: str,
    norm: str = "none",
    sample: int | None = None,
    seed: int = 0,
    template: str = "{}",
    extremes_n: int = 5,
) -> dict:
    points = scatter(
        store,
        AxisSpec(Prompt(x, template=template), normalization=norm),
        AxisSpec(Prompt(y, template=template), normalization=norm),
        backend,
        sample=sample,
        seed=seed,
    )
    above, below = residual_extremes(points, min(extremes_n, len(points)))
    return {
        "points": [
            {"id": p.image_id, "x": p.x, "y": p.y, "residual": p.residual}
            for p in points
        ],
        "extremes": {
            "above": [p.image_id for p in above],
            "below": [p.image_id for p in below],
        },
        "meta": {
            "x_prompt": x,
            "y_prompt": y,
            "template": template,
            "normalization": norm,
            "backend": backend.name,
            "sample": sample,
            "seed": seed,
            "corpus_count": store.count,
            "point_count": len(points),
        },
    }


def _grid_spec(
    store: EmbeddingStore, bbox: GeoBBox | None, rows: int, cols: int
) -> GridSpec:
    return GridSpec(
        bbox=bbox if bbox is not None else corpus_bbox(store),
        rows=rows,
        cols=cols,
    )


def build_map(
    store: EmbeddingStore,
    backend: EncoderBackend,
    prompt: str,
    bbox: GeoBBox | None = None,
    rows: int = 64,
    cols: int = 64,
    stat: str = "mean",
    min_count: int = DEFAULT_MIN_COUNT,
    template: str = "{}",
    extremes_n: int = 5,
) -> dict:
    spec = _grid_spec(store, bbox, rows, cols)
    grid = aggregate_map(
        store, Prompt(prompt, template=template), backend, spec,
        stat=stat, min_count=min_count,
    )
    scores = score_corpus(store, Prompt(prompt, template=template), backend)
    top, bottom = extremes(scores, min(extremes_n, len(scores)))
    meta = {
        "prompt": prompt,
        "template": template,
        "backend": backend.name,
        "stat": stat,
        "min_count": min_count,
        "rows": rows,
        "cols": cols,
        "extremes": {
            "top": [{"id": s.image_id, "score": s.score} for s in top],
            "bottom": [{"id": s.image_id, "score": s.score} for s in bottom],
        },
    }
    return heat_to_geojson(grid, meta=meta)


def build_contrast(
    store: EmbeddingStore,
    backend: EncoderBackend,
    prompt_a: str,
    prompt_b: str,
    bbox: GeoBBox | None = None,
    rows: int = 64,
    cols: int = 64,
    stat: str = "mean",
    min_count: int = DEFAULT_MIN_COUNT,
    template: str = "{}",
) -> dict:
    spec = _grid_spec(store, bbox, rows, cols)
    grid = contrast_map(
        store,
        Prompt(prompt_a, template=template),
        Prompt(prompt_b, template=template),
        backend,
        spec,
        stat=stat,
        min_count=min_count,
    )
    meta = {
        "prompt_a": prompt_a,
        "prompt_b": prompt_b,
        "template": template,
        "backend": backend.name,
        "stat": stat,
        "min_count": min_count,
        "rows": rows,
        "cols": cols,
    }
    return heat_to_geojson(grid, meta=meta)


def build_extremes(
    store: EmbeddingStore,
    backend: EncoderBackend,
    prompt: str,
    n: int = 5,
    template: str = "{}",
) -> dict:
    scores = score_corpus(store, Prompt(prompt, template=template), backend)
    top, bottom = extremes(scores, n)
    return {
        "top": [{"id": s.image_id, "score": s.score} for s in top],
        "bottom": [{"id": s.image_id, "score": s.score} for s in bottom],
        "meta": {
            "prompt": prompt,
            "template": template,
            "backend": backend.name,
            "n": n,
            "corpus_count": store.count,
        },
    }

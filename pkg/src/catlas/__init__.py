"""catlas: concept analysis over image corpora via text-image embeddings.

Free-text concept retrieval, geospatial concept heat maps, and two-axis
concept scatter plots over a persisted store of unit-norm embeddings.
"""

from .backends import (
    EncoderBackend,
    HttpEncoderBackend,
    ToyEncoderBackend,
    get_backend,
    register_backend,
)
from .corpus import (
    EmbedResult,
    EmbeddingStore,
    ImageRecord,
    embed_corpus,
    scan_corpus,
)
from .embedding import (
    ConceptScore,
    Prompt,
    cosine_similarity,
    normalize,
    score_corpus,
    zero_shot_classify,
)
from .geogrid import (
    GeoBBox,
    GridSpec,
    HeatGrid,
    aggregate_map,
    assign_cell,
    contrast_map,
    extremes,
    heat_to_geojson,
    heat_to_matrix,
    sample_points,
)
from .index import SearchHit, build_ann_index, search_text, top_k, top_k_ann
from .scatter import (
    AxisSpec,
    ScatterPoint,
    correlation,
    export_scatter,
    residual_extremes,
    scatter,
)
from .storefile import load_store, save_store
from .streetview import (
    FetchReport,
    RetryPolicy,
    StreetImageryClient,
    StubStreetImageryClient,
    fetch_panoramas,
)

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "ConceptScore",
    "EmbedResult",
    "EmbeddingStore",
    "EncoderBackend",
    "FetchReport",
    "GeoBBox",
    "GridSpec",
    "HeatGrid",
    "HttpEncoderBackend",
    "ImageRecord",
    "Prompt",
    "RetryPolicy",
    "ScatterPoint",
    "SearchHit",
    "StreetImageryClient",
    "StubStreetImageryClient",
    "ToyEncoderBackend",
    "aggregate_map",
    "assign_cell",
    "build_ann_index",
    "contrast_map",
    "correlation",
    "cosine_similarity",
    "embed_corpus",
    "export_scatter",
    "extremes",
    "fetch_panoramas",
    "get_backend",
    "heat_to_geojson",
    "heat_to_matrix",
    "load_store",
    "normalize",
    "register_backend",
    "sample_points",
    "save_store",
    "scan_corpus",
    "scatter",
    "score_corpus",
    "search_text",
    "top_k",
    "top_k_ann",
    "zero_shot_classify",
]

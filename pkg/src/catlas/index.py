"""Ranked retrieval over an embedding store.

Exact full-scan search is the default and the correctness reference; the
IVF index is an opt-in accelerator for corpora where a full scan gets
slow. Ties always break by ascending id so results are a total order,
reproducible across store rebuilds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backends import EncoderBackend
from .corpus import EmbeddingStore
from .embedding import Prompt, encode_prompt, score_matrix
from .errors import DimMismatch, EmptyCorpus


@dataclass(frozen=True)
class SearchHit:
    image_id: str
    score: float
    rank: int  # 1-based


def _rank_hits(
    store: EmbeddingStore, scored: list[tuple[int, float]], k: int
) -> list[SearchHit]:
    """Order (row index, score) pairs by (score desc, id asc), keep k."""
    order = sorted(
        scored, key=lambda pair: (-pair[1], store.records[pair[0]].id)
    )[:k]
    return [
        SearchHit(image_id=store.records[i].id, score=float(s), rank=r)
        for r, (i, s) in enumerate(order, start=1)
    ]


def top_k(store: EmbeddingStore, query: np.ndarray, k: int) -> list[SearchHit]:
    """The k highest-cosine records, exact, fewer if the corpus is smaller."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if store.count == 0:
        raise EmptyCorpus("store holds no images")
    query = np.asarray(query, dtype=np.float32)
    if query.shape != (store.dimensionality,):
        raise DimMismatch(
            f"query shape {query.shape} vs store dim {store.dimensionality}"
        )
    scores = score_matrix(store.matrix, query)
    k = min(k, store.count)
    if k < store.count:
        # argpartition narrows the field; the tie margin widens the cut so
        # equal scores at the boundary still reach the deterministic sort.
        cut = np.argpartition(scores, -k)[-k:]
        threshold = scores[cut].min()
        candidates = np.nonzero(scores >= threshold)[0]
    else:
        candidates = np.arange(store.count)
    return _rank_hits(store, [(i, float(scores[i])) for i in candidates], k)


def search_text(
    store: EmbeddingStore, prompt: Prompt, backend: EncoderBackend, k: int
) -> list[SearchHit]:
    """Encode the rendered prompt, then top_k. Exactly that composition."""
    return top_k(store, encode_prompt(prompt, backend), k)


class IvfIndex:
    """Inverted-file index: k-means cells, query probes the nearest few.

    Approximate; recall grows with nprobe and reaches 1.0 at
    nprobe == nlist (which degenerates to a full scan). Build is
    deterministic for a fixed seed.
    """

    def __init__(
        self,
        store: EmbeddingStore,
        centroids: np.ndarray,
        cells: list[np.ndarray],
        nprobe: int,
    ):
        self.store = store
        self.centroids = centroids
        self.cells = cells
        self.nprobe = nprobe

    @property
    def nlist(self) -> int:
        return self.centroids.shape[0]


def build_ann_index(
    store: EmbeddingStore,
    nlist: int | None = None,
    nprobe: int | None = None,
    seed: int = 0,
    kmeans_iters: int = 10,
) -> IvfIndex:
    """Cluster the store into nlist cells.

    Defaults (documented in the README config reference): nlist =
    min(count, 64), nprobe = max(1, nlist // 2). The wide default nprobe
    keeps recall@10 above 0.9 even on unclustered random data, the worst
    case for an inverted file; real image corpora cluster and get away
    with far fewer probes.
    """
    if store.count < 1:
        raise EmptyCorpus("cannot index an empty store")
    if nlist is None:
        nlist = min(store.count, 64)
    nlist = max(1, min(nlist, store.count))
    if nprobe is None:
        nprobe = max(1, nlist // 2)
    nprobe = max(1, min(nprobe, nlist))

    rng = np.random.default_rng(seed)
    data = store.matrix.astype(np.float64)
    centroids = data[rng.choice(store.count, size=nlist, replace=False)].copy()
    for _ in range(kmeans_iters):
        assign = (data @ centroids.T).argmax(axis=1)
        for c in range(nlist):
            members = np.nonzero(assign == c)[0]
            if members.size:
                mean = data[members].mean(axis=0)
                norm = np.linalg.norm(mean)
                if norm > 1e-12:
                    centroids[c] = mean / norm
    assign = (data @ centroids.T).argmax(axis=1)
    cells = [np.nonzero(assign == c)[0] for c in range(nlist)]
    return IvfIndex(store, centroids, cells, nprobe)


def top_k_ann(
    index: IvfIndex, query: np.ndarray, k: int, nprobe: int | None = None
) -> list[SearchHit]:
    """Approximate top-k: scan only the nprobe cells nearest the query."""
    if k < 1:
        raise ValueError("k must be >= 1")
    store = index.store
    query = np.asarray(query, dtype=np.float32)
    if query.shape != (store.dimensionality,):
        raise DimMismatch(
            f"query shape {query.shape} vs store dim {store.dimensionality}"
        )
    nprobe = index.nprobe if nprobe is None else max(1, min(nprobe, index.nlist))
    q64 = query.astype(np.float64)
    cell_order = np.argsort(-(index.centroids @ q64))[:nprobe]
    candidate_idx = np.concatenate([index.cells[c] for c in cell_order])
    if candidate_idx.size == 0:
        return []
    sub_scores = np.clip(
        store.matrix[candidate_idx].astype(np.float64) @ q64, -1.0, 1.0
    ).astype(np.float32)
    scored = [(int(i), float(s)) for i, s in zip(candidate_idx, sub_scores)]
    return _rank_hits(store, scored, min(k, candidate_idx.size))

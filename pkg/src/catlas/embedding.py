"""Embedding space primitives: normalization, cosine scoring, zero-shot.

Every similarity number anywhere in the engine comes out of this module.
The heat-map and scatter modules call :func:`score_corpus`; the search
index computes the same dot products over the same unit-norm vectors.

Conventions: vectors are float32, accumulations run in float64, scores
are cosines of unit-norm vectors clamped to [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import (
    BackendError,
    DimMismatch,
    EmptyCorpus,
    InsufficientClasses,
    ZeroVector,
)

if TYPE_CHECKING:
    from .backends import EncoderBackend
    from .corpus import EmbeddingStore

# Norm this close to 1 counts as already normalized; makes normalize()
# exactly idempotent on its own output.
_UNIT_TOL = 1e-7

DEFAULT_TEMPLATE = "a photo of {}"
DEFAULT_LOGIT_SCALE = 100.0


@dataclass(frozen=True)
class Prompt:
    """A free-text concept plus the template that wraps it.

    The default template mirrors common usage for contrastive encoders;
    pass template="{}" to send the text verbatim.
    """

    text: str
    template: str = DEFAULT_TEMPLATE

    def rendered(self) -> str:
        return self.template.format(self.text)


@dataclass(frozen=True)
class ConceptScore:
    image_id: str
    score: float  # cosine in [-1, 1], float32 precision


def normalize(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return ``v`` scaled to unit Euclidean norm, as float32.

    Already-unit inputs (norm within 1e-7 of 1) are returned unchanged so
    that normalize(normalize(v)) == normalize(v) bit-exactly.

    Raises ZeroVector when the norm is below 1e-12.
    """
    arr = np.asarray(v, dtype=np.float32)
    if arr.ndim != 1:
        raise DimMismatch(f"expected a 1-d vector, got shape {arr.shape}")
    norm = float(np.linalg.norm(arr.astype(np.float64)))
    if norm < 1e-12:
        raise ZeroVector("cannot normalize a zero vector")
    if abs(norm - 1.0) <= _UNIT_TOL:
        return arr
    return (arr.astype(np.float64) / norm).astype(np.float32)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit-norm vectors, clamped to [-1, 1]."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimMismatch(f"dimensionality mismatch: {a.shape} vs {b.shape}")
    dot = float(np.dot(a.astype(np.float64), b.astype(np.float64)))
    return max(-1.0, min(1.0, dot))


def encode_prompt(prompt: Prompt, backend: "EncoderBackend") -> np.ndarray:
    """Encode a rendered prompt through ``backend`` and unit-normalize."""
    try:
        raw = backend.encode_text(prompt.rendered())
    except Exception as exc:
        raise BackendError(f"{backend.name}: {exc}") from exc
    return normalize(raw)


def score_matrix(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine of every unit-norm row of ``matrix`` against ``query``.

    float64 accumulation, float32 result, clamped to [-1, 1].
    """
    if matrix.shape[1] != query.shape[0]:
        raise DimMismatch(
            f"store dimensionality {matrix.shape[1]} != query {query.shape[0]}"
        )
    scores = matrix.astype(np.float64) @ query.astype(np.float64)
    return np.clip(scores, -1.0, 1.0).astype(np.float32)


def score_corpus(
    store: "EmbeddingStore", prompt: Prompt, backend: "EncoderBackend"
) -> list[ConceptScore]:
    """Score every image in the store against one prompt, in store order.

    This is the single scoring path: the heat map and the scatter both
    call it, so their numbers are identical by construction.
    """
    if store.count == 0:
        raise EmptyCorpus("store holds no images")
    query = encode_prompt(prompt, backend)
    scores = score_matrix(store.matrix, query)
    return [
        ConceptScore(image_id=rec.id, score=float(s))
        for rec, s in zip(store.records, scores)
    ]


def zero_shot_classify(
    image: np.ndarray,
    prompts: Sequence[Prompt],
    backend: "EncoderBackend",
    logit_scale: float = DEFAULT_LOGIT_SCALE,
) -> np.ndarray:
    """Softmax of scaled cosine similarities between an image and prompts.

    Returns one probability per prompt (float64, sums to 1 within 1e-6).
    The argmax always matches the argmax of the raw similarities since
    softmax with a positive scale is order-preserving.
    """
    if len(prompts) < 2:
        raise InsufficientClasses("zero-shot needs at least 2 prompts")
    if logit_scale <= 0:
        raise ValueError("logit_scale must be positive")
    sims = np.array(
        [cosine_similarity(image, encode_prompt(p, backend)) for p in prompts],
        dtype=np.float64,
    )
    return softmax(logit_scale * sims)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax in float64."""
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    return exp / exp.sum()


def zscores(values: np.ndarray) -> np.ndarray:
    """Population z-scores (ddof=0) in float64.

    Raises DegenerateScores when the standard deviation is below 1e-12,
    which for cosine-range inputs means the set is constant.
    """
    from .errors import DegenerateScores

    values = np.asarray(values, dtype=np.float64)
    std = float(values.std())
    if std < 1e-12:
        raise DegenerateScores("score set has zero variance")
    return (values - values.mean()) / std

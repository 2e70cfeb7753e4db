"""Encoder backends: pluggable image/text-to-vector implementations.

The engine never assumes neural weights are present. The built-in toy
encoder is a pure function over pixels and bytes so the whole pipeline is
testable offline; real encoders attach through the same interface, either
out of process over HTTP or by registering a factory.
"""

from __future__ import annotations

import io
import json
from abc import ABC, abstractmethod
from typing import Callable

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import BackendError, DecodeError
from .embedding import normalize

TOY_DIM = 16

# Anchor hues (degrees) defining the 8 hue bins, in hue-wheel order. A
# pixel falls in the bin of its circularly nearest anchor, so a solid
# swatch of any named color lands exactly in that color's bin.
_HUE_ANCHORS = (
    ("red", 0.0),
    ("orange", 30.0),
    ("yellow", 60.0),
    ("green", 120.0),
    ("cyan", 180.0),
    ("blue", 240.0),
    ("purple", 270.0),
    ("magenta", 300.0),
)

_COLOR_BIN = {word: i for i, (word, _) in enumerate(_HUE_ANCHORS)}


def _hue_bin_lut() -> np.ndarray:
    """Map each PIL hue byte (0-255) to its nearest-anchor bin index."""
    degrees = np.arange(256, dtype=np.float64) * (360.0 / 256.0)
    anchors = np.array([deg for _, deg in _HUE_ANCHORS])
    diff = np.abs(degrees[:, None] - anchors[None, :])
    circular = np.minimum(diff, 360.0 - diff)
    return circular.argmin(axis=1).astype(np.uint8)


_LUT = _hue_bin_lut()


class EncoderBackend(ABC):
    """Contract every encoder implements.

    Implementations must be deterministic (identical bytes/text in,
    identical vector out) and report a fixed dimensionality. Backends
    that are not safe for concurrent calls set ``thread_safe = False``
    and the engine serializes access.
    """

    name: str
    dimensionality: int
    thread_safe: bool = True

    @abstractmethod
    def encode_image(self, data: bytes) -> np.ndarray:
        """Embed raw image bytes."""

    @abstractmethod
    def encode_text(self, text: str) -> np.ndarray:
        """Embed a rendered prompt string."""


class ToyEncoderBackend(EncoderBackend):
    """Deterministic 16-dim encoder with no learned weights.

    Images map to the unit-norm 8-bin hue histogram of their pixels,
    zero-padded to 16 dims. The eight color words (red, orange, yellow,
    green, cyan, blue, purple, magenta) map to the matching hue-bin basis
    vector, so cosine(solid red image, "red") == 1. Any other text maps
    to the unit-norm histogram of its UTF-8 bytes folded into 16 bins.

    Achromatic pixels carry hue byte 0 in PIL's HSV mode and therefore
    count toward the red bin; a toy quirk, but a deterministic one.
    """

    name = "toy"
    dimensionality = TOY_DIM

    def encode_image(self, data: bytes) -> np.ndarray:
        try:
            with Image.open(io.BytesIO(data)) as img:
                hsv = img.convert("RGB").convert("HSV")
                hue = np.asarray(hsv, dtype=np.uint8)[..., 0]
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            raise DecodeError(f"cannot decode image: {exc}") from exc
        bins = _LUT[hue.ravel()]
        hist = np.bincount(bins, minlength=8).astype(np.float64)
        vec = np.zeros(TOY_DIM, dtype=np.float64)
        vec[:8] = hist
        return normalize(vec)

    def encode_text(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("text must be nonempty")
        word = text.strip().lower()
        if word in _COLOR_BIN:
            vec = np.zeros(TOY_DIM, dtype=np.float32)
            vec[_COLOR_BIN[word]] = 1.0
            return vec
        raw = np.frombuffer(text.encode("utf-8"), dtype=np.uint8)
        hist = np.bincount(raw % TOY_DIM, minlength=TOY_DIM).astype(np.float64)
        return normalize(hist)


class HttpEncoderBackend(EncoderBackend):
    """Out-of-process encoder reached over a local HTTP endpoint.

    Text goes up as ``{"text": ...}`` JSON, images as raw bytes; the
    endpoint answers with a JSON float array. Dimensionality is probed
    from the first response and enforced afterwards.
    """

    thread_safe = True

    def __init__(self, endpoint: str, name: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        # default name is the endpoint URL itself, so a store stamped with
        # it resolves back to this backend through get_backend()
        self.name = name or self.endpoint
        self.timeout = timeout
        self.dimensionality = 0  # set on first encode

    def _post(self, payload: bytes, content_type: str) -> np.ndarray:
        import requests

        try:
            resp = requests.post(
                self.endpoint,
                data=payload,
                headers={"Content-Type": content_type},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            values = resp.json()
        except Exception as exc:
            raise BackendError(f"{self.name}: {exc}") from exc
        vec = np.asarray(values, dtype=np.float32)
        if vec.ndim != 1:
            raise BackendError(f"{self.name}: expected a flat float array")
        if self.dimensionality == 0:
            self.dimensionality = int(vec.shape[0])
        elif vec.shape[0] != self.dimensionality:
            raise BackendError(
                f"{self.name}: dimensionality changed mid-run "
                f"({self.dimensionality} -> {vec.shape[0]})"
            )
        return vec

    def encode_image(self, data: bytes) -> np.ndarray:
        return self._post(data, "application/octet-stream")

    def encode_text(self, text: str) -> np.ndarray:
        body = json.dumps({"text": text}).encode("utf-8")
        return self._post(body, "application/json")


_REGISTRY: dict[str, Callable[[], EncoderBackend]] = {
    "toy": ToyEncoderBackend,
}


def register_backend(name: str, factory: Callable[[], EncoderBackend]) -> None:
    """Register a named backend factory (plugin hook)."""
    _REGISTRY[name] = factory


def get_backend(spec: str) -> EncoderBackend:
    """Resolve a backend from a name or an http(s) endpoint URL."""
    if spec in _REGISTRY:
        return _REGISTRY[spec]()
    if spec.startswith("http://") or spec.startswith("https://"):
        return HttpEncoderBackend(spec)
    raise BackendError(
        f"unknown backend {spec!r}; use 'toy', an http(s) endpoint URL, "
        f"or a registered name"
    )

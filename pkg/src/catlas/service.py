"""HTTP service over registered corpora.

Read-only except corpus registration: every analysis endpoint recomputes
from the immutable in-memory store (behind a small keyed LRU cache) and
never touches the store file after load. Thumbnails are generated lazily
into a per-corpus cache directory next to nothing the store owns.
"""

from __future__ import annotations

import hashlib
import io
import mimetypes
import tempfile
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse, RedirectResponse
from PIL import Image
from pydantic import BaseModel

from . import payloads
from .backends import EncoderBackend, get_backend
from .config import Config
from .corpus import EmbeddingStore
from .errors import (
    BadInterval,
    BackendError,
    CorruptStore,
    DegenerateScores,
    DimMismatch,
    EmptyCorpus,
    EmptyRegion,
    EngineError,
    UnknownCorpus,
    UnknownImage,
)
from .geogrid import GeoBBox

# analysis failures the client can fix by changing parameters
_UNPROCESSABLE = (DegenerateScores, EmptyRegion, EmptyCorpus, BadInterval)


class _LruCache:
    """Tiny synchronized LRU for rendered payload bytes."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._data: OrderedDict[tuple, bytes] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: tuple) -> bytes | None:
        with self._lock:
            if key not in self._data:
                return None
            self._data.move_to_end(key)
            return self._data[key]

    def put(self, key: tuple, value: bytes) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.capacity:
                self._data.popitem(last=False)


@dataclass
class CorpusHandle:
    """One registered corpus: immutable store plus its thumbnail cache."""

    name: str
    store_path: str
    store: EmbeddingStore
    thumb_dir: Path
    _backend: EncoderBackend | None = field(default=None, repr=False)
    _backend_lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False
    )

    def backend(self) -> EncoderBackend:
        with self._backend_lock:
            if self._backend is None:
                self._backend = get_backend(self.store.backend_name)
            return self._backend


class ServiceState:
    def __init__(self, config: Config):
        self.config = config
        self.corpora: dict[str, CorpusHandle] = {}
        self.cache = _LruCache(config.service.cache_capacity)
        self.registry_lock = threading.Lock()
        self.thumb_root = Path(tempfile.gettempdir()) / "catlas-thumbs"

    def register(self, name: str, store_path: str) -> CorpusHandle:
        from .storefile import load_store

        with self.registry_lock:
            if name in self.corpora:
                raise ValueError(f"corpus {name!r} already registered")
            store = load_store(store_path)
            digest = hashlib.sha256(
                f"{name}:{store_path}".encode()
            ).hexdigest()[:16]
            handle = CorpusHandle(
                name=name,
                store_path=str(store_path),
                store=store,
                thumb_dir=self.thumb_root / digest,
            )
            self.corpora[name] = handle
            return handle

    def handle(self, name: str) -> CorpusHandle:
        try:
            return self.corpora[name]
        except KeyError:
            raise UnknownCorpus(f"no corpus named {name!r}")


class RegisterBody(BaseModel):
    name: str
    store_path: str


def _error_response(status: int, name: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": name, "message": message}
    )


def _json_bytes_response(payload: bytes, media_type: str) -> Response:
    return Response(content=payload, media_type=media_type)


def create_app(config: Config | None = None) -> FastAPI:
    config = config or Config()
    app = FastAPI(title="catlas", version="0.1.0")
    state = ServiceState(config)
    app.state.engine = state

    @app.exception_handler(EngineError)
    def engine_error_handler(request: Request, exc: EngineError):
        if isinstance(exc, (UnknownCorpus, UnknownImage)):
            return _error_response(404, exc.name, str(exc))
        if isinstance(exc, _UNPROCESSABLE):
            return _error_response(422, exc.name, str(exc))
        if isinstance(exc, (CorruptStore, DimMismatch)):
            return _error_response(400, exc.name, str(exc))
        if isinstance(exc, BackendError):
            return _error_response(502, exc.name, str(exc))
        return _error_response(500, exc.name, str(exc))

    @app.exception_handler(ValueError)
    def value_error_handler(request: Request, exc: ValueError):
        return _error_response(400, "BadQuery", str(exc))

    @app.exception_handler(RequestValidationError)
    def validation_handler(request: Request, exc: RequestValidationError):
        return _error_response(400, "BadQuery", str(exc.errors()))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/corpora")
    def list_corpora():
        out = []
        for name in sorted(state.corpora):
            handle = state.corpora[name]
            store = handle.store
            out.append(
                {
                    "name": name,
                    "count": store.count,
                    "dimensionality": store.dimensionality,
                    "backend": store.backend_name,
                    "geo_count": sum(
                        1 for r in store.records if r.geo is not None
                    ),
                }
            )
        return {"corpora": out}

    @app.post("/corpora", status_code=201)
    def register_corpus(body: RegisterBody):
        if not Path(body.store_path).exists():
            raise ValueError(f"store file not found: {body.store_path}")
        try:
            handle = state.register(body.name, body.store_path)
        except ValueError as exc:
            return _error_response(409, "DuplicateCorpus", str(exc))
        return {
            "name": handle.name,
            "count": handle.store.count,
            "dimensionality": handle.store.dimensionality,
        }

    def _cached(handle: CorpusHandle, op: str, params: tuple, build) -> bytes:
        key = (handle.name, op, params)
        hit = state.cache.get(key)
        if hit is not None:
            return hit
        payload = payloads.canonical_json(build())
        state.cache.put(key, payload)
        return payload

    def _parse_bbox(raw: str | None) -> GeoBBox | None:
        if raw is None:
            return None
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 4:
            raise ValueError("bbox must be 'lon_min,lat_min,lon_max,lat_max'")
        try:
            w, s, e, n = (float(p) for p in parts)
        except ValueError:
            raise ValueError(f"non-numeric bbox: {raw!r}")
        return GeoBBox(lat_min=s, lat_max=n, lon_min=w, lon_max=e)

    @app.get("/corpora/{name}/search")
    def search(
        name: str, q: str = "", k: int = payloads.DEFAULT_K, template: str = "{}"
    ):
        handle = state.handle(name)
        if not q:
            raise ValueError("missing prompt: pass ?q=")
        if k < 1:
            raise ValueError("k must be >= 1")
        body = _cached(
            handle,
            "search",
            (q, k, template),
            lambda: payloads.build_search(
                handle.store, handle.backend(), q, k, template
            ),
        )
        return _json_bytes_response(body, "application/json")

    @app.get("/corpora/{name}/scatter")
    def scatter_endpoint(
        name: str,
        x: str = "",
        y: str = "",
        norm: str = "none",
        sample: int | None = None,
        seed: int = 0,
        template: str = "{}",
    ):
        handle = state.handle(name)
        if not x or not y:
            raise ValueError("missing prompts: pass ?x= and ?y=")
        if norm not in ("none", "rank", "zscore"):
            raise ValueError(f"unknown normalization {norm!r}")
        if sample is not None and sample < 1:
            raise ValueError("sample must be >= 1")
        body = _cached(
            handle,
            "scatter",
            (x, y, norm, sample, seed, template),
            lambda: payloads.build_scatter(
                handle.store, handle.backend(), x, y, norm, sample, seed, template
            ),
        )
        return _json_bytes_response(body, "application/json")

    @app.get("/corpora/{name}/map")
    def map_endpoint(
        name: str,
        prompt: str = "",
        rows: int = 64,
        cols: int = 64,
        stat: str = "mean",
        min_count: int = 3,
        bbox: str | None = None,
        template: str = "{}",
    ):
        handle = state.handle(name)
        if not prompt:
            raise ValueError("missing prompt: pass ?prompt=")
        if rows < 1 or cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if stat not in ("mean", "max"):
            raise ValueError(f"stat must be 'mean' or 'max', got {stat!r}")
        box = _parse_bbox(bbox)
        body = _cached(
            handle,
            "map",
            (prompt, rows, cols, stat, min_count, bbox, template),
            lambda: payloads.build_map(
                handle.store, handle.backend(), prompt,
                bbox=box, rows=rows, cols=cols,
                stat=stat, min_count=min_count, template=template,
            ),
        )
        return _json_bytes_response(body, "application/geo+json")

    @app.get("/corpora/{name}/contrast")
    def contrast_endpoint(
        name: str,
        a: str = "",
        b: str = "",
        rows: int = 64,
        cols: int = 64,
        stat: str = "mean",
        min_count: int = 3,
        bbox: str | None = None,
        template: str = "{}",
    ):
        handle = state.handle(name)
        if not a or not b:
            raise ValueError("missing prompts: pass ?a= and ?b=")
        if rows < 1 or cols < 1:
            raise ValueError("rows and cols must be >= 1")
        box = _parse_bbox(bbox)
        body = _cached(
            handle,
            "contrast",
            (a, b, rows, cols, stat, min_count, bbox, template),
            lambda: payloads.build_contrast(
                handle.store, handle.backend(), a, b,
                bbox=box, rows=rows, cols=cols,
                stat=stat, min_count=min_count, template=template,
            ),
        )
        return _json_bytes_response(body, "application/geo+json")

    @app.get("/corpora/{name}/extremes")
    def extremes_endpoint(
        name: str, prompt: str = "", n: int = 5, template: str = "{}"
    ):
        handle = state.handle(name)
        if not prompt:
            raise ValueError("missing prompt: pass ?prompt=")
        if n < 1:
            raise ValueError("n must be >= 1")
        body = _cached(
            handle,
            "extremes",
            (prompt, n, template),
            lambda: payloads.build_extremes(
                handle.store, handle.backend(), prompt, n, template
            ),
        )
        return _json_bytes_response(body, "application/json")

    def _record_for(handle: CorpusHandle, image_id: str):
        rec = handle.store.get(image_id)
        if rec is None:
            raise UnknownImage(f"no image {image_id!r} in corpus {handle.name!r}")
        return rec

    @app.get("/corpora/{name}/records/{image_id:path}")
    def record_endpoint(name: str, image_id: str):
        handle = state.handle(name)
        rec = _record_for(handle, image_id)
        return {
            "id": rec.id,
            "uri": rec.uri,
            "geo": list(rec.geo) if rec.geo is not None else None,
            "metadata": rec.metadata,
        }

    @app.get("/corpora/{name}/images/{image_id:path}")
    def image_endpoint(name: str, image_id: str):
        handle = state.handle(name)
        rec = _record_for(handle, image_id)
        if rec.uri.startswith(("http://", "https://")):
            return RedirectResponse(rec.uri)
        path = Path(rec.uri)
        if not path.exists():
            raise UnknownImage(f"source file missing for {image_id!r}")
        media = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return FileResponse(path, media_type=media)

    @app.get("/corpora/{name}/thumbs/{image_id:path}")
    def thumb_endpoint(name: str, image_id: str):
        handle = state.handle(name)
        rec = _record_for(handle, image_id)
        max_px = state.config.service.thumb_max_px
        cache_name = (
            hashlib.sha256(f"{image_id}:{max_px}".encode()).hexdigest()[:24]
            + ".jpg"
        )
        cache_path = handle.thumb_dir / cache_name
        if not cache_path.exists():
            if rec.uri.startswith(("http://", "https://")):
                import requests

                resp = requests.get(rec.uri, timeout=30)
                resp.raise_for_status()
                data = resp.content
            else:
                src = Path(rec.uri)
                if not src.exists():
                    raise UnknownImage(f"source file missing for {image_id!r}")
                data = src.read_bytes()
            img = Image.open(io.BytesIO(data)).convert("RGB")
            img.thumbnail((max_px, max_px))
            handle.thumb_dir.mkdir(parents=True, exist_ok=True)
            img.save(cache_path, format="JPEG", quality=88)
        return FileResponse(cache_path, media_type="image/jpeg")

    return app


def run_service(
    config: Config,
    corpora: list[tuple[str, str]],
    host: str | None = None,
    port: int | None = None,
) -> None:
    """Start uvicorn with the given (name, store_path) corpora registered."""
    import uvicorn

    if not corpora:
        raise EmptyCorpus("serve needs at least one registered corpus")
    app = create_app(config)
    for name, store_path in corpora:
        app.state.engine.register(name, store_path)
    uvicorn.run(
        app,
        host=host if host is not None else config.service.host,
        port=port if port is not None else config.service.port,
        log_level="info",
    )

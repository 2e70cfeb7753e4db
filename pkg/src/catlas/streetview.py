"""Street-level imagery acquisition for lattice-sampled corpora.

The client is an interface with an offline stub; the HTTP client speaks
the common static street-view API shape (metadata probe, then image
fetch) and is never exercised in CI — quotas and terms of service make
live calls a deliberate, configured act.
"""

from __future__ import annotations

import hashlib
import os
import re
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .corpus import ImageRecord
from .errors import ClientError, EmptyCorpus, QuotaExceeded


@dataclass(frozen=True)
class StreetImage:
    """One fetched panorama: bytes plus the imagery-reported location."""

    data: bytes
    lat: float
    lon: float
    pano_id: str | None = None
    metadata: dict[str, str] = field(default_factory=dict)


class StreetImageryClient(ABC):
    """Fetch imagery near a lattice point.

    Returns None when no imagery exists at the point. Transient
    transport trouble raises ClientError (retried); QuotaExceeded
    aborts the whole run.
    """

    @abstractmethod
    def fetch(self, lat: float, lon: float) -> StreetImage | None: ...


class StubStreetImageryClient(StreetImageryClient):
    """Deterministic in-memory client for tests and dry runs."""

    def __init__(self, handler: Callable[[float, float], StreetImage | None]):
        self._handler = handler

    def fetch(self, lat: float, lon: float) -> StreetImage | None:
        return self._handler(lat, lon)


class HttpStreetImageryClient(StreetImageryClient):
    """Static street-view API client: metadata probe, then image fetch.

    The API key comes from the environment (api_key_env) so it never
    lands in config files or shell history.
    """

    def __init__(
        self,
        endpoint: str,
        api_key_env: str = "ATLAS_STREETVIEW_KEY",
        image_size: str = "640x640",
        timeout: float = 30.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.api_key = os.environ.get(api_key_env, "")
        self.image_size = image_size
        self.timeout = timeout
        if not self.api_key:
            raise ClientError(f"missing API key: set ${api_key_env}")

    def fetch(self, lat: float, lon: float) -> StreetImage | None:
        import requests

        try:
            meta_resp = requests.get(
                f"{self.endpoint}/metadata",
                params={"location": f"{lat},{lon}", "key": self.api_key},
                timeout=self.timeout,
            )
            meta_resp.raise_for_status()
            meta = meta_resp.json()
        except Exception as exc:
            raise ClientError(f"metadata request failed: {exc}") from exc
        status = meta.get("status", "")
        if status in ("ZERO_RESULTS", "NOT_FOUND"):
            return None
        if status == "OVER_QUERY_LIMIT":
            raise QuotaExceeded("street imagery quota exhausted")
        if status != "OK":
            raise ClientError(f"metadata status {status!r}")
        loc = meta.get("location", {})
        pano_id = meta.get("pano_id")
        try:
            img_resp = requests.get(
                self.endpoint,
                params={
                    "pano": pano_id,
                    "size": self.image_size,
                    "key": self.api_key,
                },
                timeout=self.timeout,
            )
            img_resp.raise_for_status()
        except Exception as exc:
            raise ClientError(f"image request failed: {exc}") from exc
        return StreetImage(
            data=img_resp.content,
            lat=float(loc.get("lat", lat)),
            lon=float(loc.get("lng", lon)),
            pano_id=pano_id,
        )


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    initial_delay: float = 1.0
    multiplier: float = 2.0

    def delays(self) -> list[float]:
        return [
            self.initial_delay * self.multiplier**i
            for i in range(self.attempts - 1)
        ]


@dataclass
class PointFailure:
    index: int
    lat: float
    lon: float
    reason: str


@dataclass
class FetchReport:
    records: list[ImageRecord]
    missing: int = 0
    duplicates: int = 0
    failures: list[PointFailure] = field(default_factory=list)


_SAFE_ID = re.compile(r"[^A-Za-z0-9_.-]")


def _image_filename(img: StreetImage) -> str:
    if img.pano_id:
        return _SAFE_ID.sub("_", img.pano_id) + ".jpg"
    return hashlib.sha256(img.data).hexdigest()[:32] + ".jpg"


def fetch_panoramas(
    points: list[tuple[float, float]],
    client: StreetImageryClient,
    out_dir: str | Path,
    retry: RetryPolicy = RetryPolicy(),
    parallelism: int = 4,
    sleep: Callable[[float], None] = time.sleep,
) -> FetchReport:
    """Fetch at most one panorama per lattice point, saving bytes to disk.

    Points with no imagery are counted as missing; points that fail all
    retry attempts land in the failure list and the run continues.
    QuotaExceeded aborts, with the partial report attached to the
    exception. Output order follows lattice index regardless of the
    degree of parallelism. Record ids are the imagery's pano id, or the
    hex digest of the image bytes when the client reports none.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def fetch_with_retry(pt: tuple[float, float]):
        delays = retry.delays()
        for attempt in range(retry.attempts):
            try:
                return client.fetch(pt[0], pt[1])
            except QuotaExceeded:
                raise
            except Exception as exc:
                if attempt == retry.attempts - 1:
                    raise ClientError(
                        f"gave up after {retry.attempts} attempts: {exc}"
                    ) from exc
                sleep(delays[attempt])
        raise AssertionError("unreachable")

    report = FetchReport(records=[])
    seen_ids: set[str] = set()

    def finish(idx: int, pt: tuple[float, float], outcome) -> None:
        if isinstance(outcome, ClientError):
            report.failures.append(
                PointFailure(idx, pt[0], pt[1], str(outcome))
            )
            return
        if outcome is None:
            report.missing += 1
            return
        img: StreetImage = outcome
        rec_id = img.pano_id or hashlib.sha256(img.data).hexdigest()
        if rec_id in seen_ids:
            report.duplicates += 1
            return
        seen_ids.add(rec_id)
        path = out_dir / _image_filename(img)
        path.write_bytes(img.data)
        report.records.append(
            ImageRecord(
                id=rec_id,
                uri=str(path),
                geo=(img.lat, img.lon),
                metadata=dict(img.metadata),
            )
        )

    def attempt(pt):
        try:
            return fetch_with_retry(pt)
        except QuotaExceeded:
            raise
        except ClientError as exc:
            return exc

    if parallelism <= 1:
        for idx, pt in enumerate(points):
            try:
                outcome = attempt(pt)
            except QuotaExceeded as quota:
                quota.partial = report
                raise
            finish(idx, pt, outcome)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(attempt, pt) for pt in points]
            quota_hit: QuotaExceeded | None = None
            for idx, (pt, fut) in enumerate(zip(points, futures)):
                try:
                    outcome = fut.result()
                except QuotaExceeded as quota:
                    quota_hit = quota
                    for pending in futures[idx + 1 :]:
                        pending.cancel()
                    break
                finish(idx, pt, outcome)
            if quota_hit is not None:
                quota_hit.partial = report
                raise quota_hit

    if not report.records:
        raise EmptyCorpus(
            f"no panoramas fetched: {report.missing} points without imagery, "
            f"{len(report.failures)} failed"
        )
    return report

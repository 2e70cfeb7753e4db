"""Acceptance suite: one test per release criterion, stated tolerances.

Each test prints an `ACCEPTANCE PASS` line on success (visible with
pytest -s); a failing criterion fails its test. Run:

    pytest tests/test_acceptance.py -v -s
"""

from __future__ import annotations

import hashlib
import json
import os
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from catlas import (
    AxisSpec,
    GeoBBox,
    GridSpec,
    Prompt,
    ToyEncoderBackend,
    aggregate_map,
    assign_cell,
    correlation,
    cosine_similarity,
    embed_corpus,
    load_store,
    normalize,
    save_store,
    scan_corpus,
    scatter,
    top_k,
    zero_shot_classify,
)
from catlas.backends import EncoderBackend
from catlas.cli import main as cli_main
from catlas.config import Config
from catlas.embedding import softmax
from catlas.errors import DegenerateScores
from catlas.service import create_app

from conftest import make_store, random_unit_rows, solid_png


def _ok(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE PASS: {name}{suffix}")


# ---------------------------------------------------------------------------
# Oracle equivalence


def test_oracle_equivalence_topk_vs_full_sort():
    t0 = time.perf_counter()
    mismatches = 0
    corpora = 100
    k = 10
    for c in range(corpora):
        rng = np.random.default_rng(1000 + c)
        if c == 0:
            n, d = 16, 8
        elif c == 1:
            n, d = 2048, 512
        else:
            n = int(rng.integers(16, 2049))
            d = int(rng.integers(8, 513))
        matrix = rng.standard_normal((n, d))
        matrix = (matrix / np.linalg.norm(matrix, axis=1, keepdims=True)).astype(
            np.float32
        )
        store = make_store(matrix)
        ids = store.ids()
        queries = rng.standard_normal((20, d))
        queries = (
            queries / np.linalg.norm(queries, axis=1, keepdims=True)
        ).astype(np.float32)
        for q in queries:
            hits = top_k(store, q, k=k)
            # independent oracle: per-row float64 dots, full sort with tie-break
            q64 = q.astype(np.float64)
            scores = [
                float(np.float32(np.dot(row.astype(np.float64), q64)))
                for row in matrix
            ]
            order = sorted(range(n), key=lambda i: (-scores[i], ids[i]))[:k]
            expected = [(ids[i], scores[i]) for i in order]
            got = [(h.image_id, h.score) for h in hits]
            if got != expected:
                mismatches += 1
    elapsed = time.perf_counter() - t0
    assert mismatches == 0
    assert elapsed < 60.0
    _ok(
        "oracle equivalence",
        f"100 corpora x 20 queries, 0 mismatches, {elapsed:.1f}s < 60s",
    )


# ---------------------------------------------------------------------------
# Scoring laws


def test_scoring_laws_over_10k_vectors():
    rng = np.random.default_rng(77)
    raw = rng.standard_normal((10_000, 16))
    normed = np.stack([normalize(v) for v in raw])
    norms = np.linalg.norm(normed.astype(np.float64), axis=1)
    assert np.all(np.abs(norms - 1.0) <= 1e-6)

    # cosine symmetry and bounds on sampled pairs
    for i in range(0, 2000, 2):
        ab = cosine_similarity(normed[i], normed[i + 1])
        ba = cosine_similarity(normed[i + 1], normed[i])
        assert ab == ba
        assert -1.0 <= ab <= 1.0

    # zero-shot: probabilities sum to 1, ordering invariant across scales
    backend = ToyEncoderBackend()
    prompts = [
        Prompt(w, template="{}")
        for w in ("red", "orange", "yellow", "green", "cyan", "blue", "purple",
                  "magenta")
    ]
    for vec in normed[:2000]:
        reference = None
        for scale in (0.5, 1.0, 100.0):
            probs = zero_shot_classify(vec, prompts, backend, logit_scale=scale)
            assert abs(float(probs.sum()) - 1.0) <= 1e-6
            ordering = np.argsort(-probs, kind="stable").tolist()
            if reference is None:
                reference = ordering
            else:
                assert ordering == reference
    # softmax-level check over the rest: sums stay within tolerance
    sims = normed[2000:] @ normed[0]
    for s in sims[:1000]:
        probs = softmax(np.array([100.0 * s, -100.0 * s]))
        assert abs(float(probs.sum()) - 1.0) <= 1e-6
    _ok("scoring laws", "10,000 vectors; scales {0.5, 1, 100}")


# ---------------------------------------------------------------------------
# Count conservation


def _planted_geo_store(rng, n):
    xs = rng.uniform(-0.6, 0.6, n)
    matrix = np.zeros((n, 16), dtype=np.float64)
    matrix[:, 0] = xs
    matrix[:, 2] = np.sqrt(1.0 - xs * xs)
    geos = [
        (float(rng.uniform(-1.0, 2.0)), float(rng.uniform(-1.0, 2.0)))
        for _ in range(n)
    ]
    return make_store(matrix.astype(np.float32), geos=geos), geos


def test_count_conservation_on_seeded_geo_corpora():
    backend = ToyEncoderBackend()
    prompt = Prompt("red", template="{}")
    bbox = GeoBBox(lat_min=0.0, lat_max=1.0, lon_min=0.0, lon_max=1.0)
    total_checked = 0
    for c in range(50):
        rng = np.random.default_rng(3000 + c)
        n = int(rng.integers(50, 10_001)) if c else 10_000
        store, geos = _planted_geo_store(rng, n)
        rows = int(rng.integers(1, 65))
        cols = int(rng.integers(1, 65))
        spec = GridSpec(bbox=bbox, rows=rows, cols=cols)
        inside = sum(1 for g in geos if bbox.contains(*g))
        grid = aggregate_map(store, prompt, backend, spec, min_count=1)
        assert int(grid.counts.sum()) == inside
        defined = grid.heats[~np.isnan(grid.heats)]
        assert defined.size > 0
        assert defined.min() >= 0.0 and defined.max() <= 1.0
        if defined.size > 1 and float(defined.max() - defined.min()) > 0.0:
            assert float(defined.min()) == 0.0
            assert float(defined.max()) == 1.0
        total_checked += inside

    # boundary rule on exactly-representable edges: half-open cells,
    # maximum edges inclusive
    spec = GridSpec(bbox=bbox, rows=4, cols=4)
    assert assign_cell((0.0, 0.0), spec) == (0, 0)
    assert assign_cell((0.25, 0.25), spec) == (1, 1)
    assert assign_cell((0.75, 0.5), spec) == (3, 2)
    assert assign_cell((1.0, 1.0), spec) == (3, 3)
    assert assign_cell((1.0, 0.0), spec) == (3, 0)
    assert assign_cell((0.999999, 1.0), spec) == (3, 3)
    _ok("count conservation", f"50 corpora, {total_checked} in-bbox records")


# ---------------------------------------------------------------------------
# Diagonal laws


def _planted_xy_store(n, seed):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-0.6, 0.6, n)
    ys = rng.uniform(-0.6, 0.6, n)
    matrix = np.zeros((n, 16), dtype=np.float64)
    matrix[:, 0] = xs
    matrix[:, 5] = ys
    matrix[:, 2] = np.sqrt(1.0 - xs * xs - ys * ys)
    return make_store(matrix.astype(np.float32))


def test_diagonal_laws():
    backend = ToyEncoderBackend()
    red = AxisSpec(Prompt("red", template="{}"))
    blue = AxisSpec(Prompt("blue", template="{}"))
    store = _planted_xy_store(10_000, seed=42)

    fwd = scatter(store, red, blue, backend)
    assert len(fwd) == 10_000
    for p in fwd:
        assert (p.residual > 0) == (p.y > p.x)
        assert (p.residual < 0) == (p.y < p.x)

    rev = scatter(store, blue, red, backend)
    for p, q in zip(fwd, rev):
        assert p.residual == -q.residual

    # same-prompt scatter: all residuals exactly 0; with score variance the
    # points sit on y = x and correlate to exactly 1.0
    same = scatter(store, red, red, backend)
    assert all(p.residual == 0.0 for p in same)
    assert correlation(same) == 1.0

    # same-prompt scatter on a zero-variance corpus: correlation undefined
    flat = make_store(np.tile(normalize(np.ones(16)), (8, 1)))
    flat_points = scatter(flat, red, red, backend)
    assert all(p.residual == 0.0 for p in flat_points)
    with pytest.raises(DegenerateScores):
        correlation(flat_points)
    _ok("diagonal laws", "10,000 points; swap negation; exact r=1.0")


# ---------------------------------------------------------------------------
# Determinism & persistence


def _write_color_corpus(root, n):
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(11)
    for i in range(n):
        rgb = tuple(int(v) for v in rng.integers(0, 256, size=3))
        (root / f"img{i:04d}.png").write_bytes(solid_png(rgb))
    return root


def test_determinism_and_persistence(tmp_path):
    backend = ToyEncoderBackend()
    corpus = _write_color_corpus(tmp_path / "imgs", 100)
    records = scan_corpus(corpus)

    stores = {}
    for batch_size in (1, 7, 64):
        for workers in (1, 4):
            result = embed_corpus(
                records, backend, batch_size=batch_size, workers=workers
            )
            stores[(batch_size, workers)] = result.store
    reference = stores[(1, 1)]
    for key, store in stores.items():
        assert store.matrix.tobytes() == reference.matrix.tobytes(), key
        assert store.records == reference.records, key

    store_path = tmp_path / "corpus.catl"
    save_store(reference, store_path)
    loaded = load_store(store_path)
    assert loaded.matrix.tobytes() == reference.matrix.tobytes()
    assert loaded.records == reference.records

    # CLI and HTTP must produce byte-identical payloads
    app = create_app(Config())
    app.state.engine.register("c", str(store_path))
    client = TestClient(app)
    runner = CliRunner()

    cli_search = runner.invoke(
        cli_main,
        ["search", "--store", str(store_path), "--prompt", "red", "-k", "7"],
    )
    assert cli_search.exit_code == 0
    http_search = client.get("/corpora/c/search", params={"q": "red", "k": 7})
    assert cli_search.stdout_bytes.rstrip(b"\n") == http_search.content

    cli_scatter = runner.invoke(
        cli_main,
        ["scatter", "--store", str(store_path), "--x", "red", "--y", "blue"],
    )
    http_scatter = client.get(
        "/corpora/c/scatter", params={"x": "red", "y": "blue"}
    )
    assert cli_scatter.stdout_bytes.rstrip(b"\n") == http_scatter.content
    _ok(
        "determinism & persistence",
        "batch {1,7,64} x workers {1,4} bit-identical; round-trip exact; "
        "CLI/HTTP parity",
    )


# ---------------------------------------------------------------------------
# Toy end-to-end


def test_toy_end_to_end(tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    img_dir = tmp_path / "imgs"
    img_dir.mkdir()
    rows = ["id,uri,lat,lon"]
    expected_color = {}
    for i in range(300):
        color = ("red", "green", "blue")[i % 3]
        rgb = {"red": (255, 0, 0), "green": (0, 255, 0), "blue": (0, 0, 255)}[color]
        path = img_dir / f"{color}{i:03d}.png"
        path.write_bytes(solid_png(rgb))
        rec_id = path.name
        expected_color[rec_id] = color
        # reds cluster north, blues south, greens everywhere
        if color == "red":
            lat = float(rng.uniform(0.75, 1.0))
        elif color == "blue":
            lat = float(rng.uniform(0.0, 0.25))
        else:
            lat = float(rng.uniform(0.0, 1.0))
        lon = float(rng.uniform(0.0, 1.0))
        rows.append(f"{rec_id},{path},{lat},{lon}")
    manifest = tmp_path / "m.csv"
    manifest.write_text("\n".join(rows) + "\n")

    runner = CliRunner()
    store_path = tmp_path / "corpus.catl"
    result = runner.invoke(
        cli_main,
        ["ingest", "--manifest", str(manifest), "--backend", "toy",
         "--out", str(store_path)],
    )
    assert result.exit_code == 0, result.output

    # search: every red image above every non-red
    result = runner.invoke(
        cli_main,
        ["search", "--store", str(store_path), "--prompt", "red", "-k", "300"],
    )
    assert result.exit_code == 0
    hits = json.loads(result.output)["hits"]
    assert len(hits) == 300
    first_non_red = next(
        i for i, h in enumerate(hits) if expected_color[h["id"]] != "red"
    )
    assert first_non_red == 100
    assert all(expected_color[h["id"]] == "red" for h in hits[:100])

    # scatter red vs blue: clusters separate by residual sign
    result = runner.invoke(
        cli_main,
        ["scatter", "--store", str(store_path), "--x", "red", "--y", "blue"],
    )
    assert result.exit_code == 0
    points = json.loads(result.output)["points"]
    for p in points:
        color = expected_color[p["id"]]
        if color == "red":
            assert p["residual"] < 0
        elif color == "blue":
            assert p["residual"] > 0
        else:
            assert p["residual"] == 0

    # map: counts conserve; the hottest cell sits in the red north half
    result = runner.invoke(
        cli_main,
        ["map", "--store", str(store_path), "--prompt", "red",
         "--bbox", "0,0,1,1", "--rows", "4", "--cols", "4", "--min-count", "1"],
    )
    assert result.exit_code == 0
    fc = json.loads(result.output)
    total = sum(f["properties"]["count"] for f in fc["features"])
    assert total == 300
    hottest = max(
        (f for f in fc["features"] if f["properties"]["heat"] is not None),
        key=lambda f: f["properties"]["heat"],
    )
    assert hottest["properties"]["row"] == 3  # top latitude band

    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _ok("toy end-to-end", f"300 images in {elapsed:.1f}s < 30s")


# ---------------------------------------------------------------------------
# Paper-scale throughput


class _Dim512Backend(EncoderBackend):
    """Deterministic 512-dim stub: hashed byte histogram of the text."""

    name = "stub512"
    dimensionality = 512

    def encode_image(self, data: bytes) -> np.ndarray:
        return self.encode_text(hashlib.sha256(data).hexdigest())

    def encode_text(self, text: str) -> np.ndarray:
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        return rng.standard_normal(512).astype(np.float32)


def test_paper_scale_throughput():
    rng = np.random.default_rng(123)
    matrix = rng.standard_normal((10_000, 512))
    matrix = (matrix / np.linalg.norm(matrix, axis=1, keepdims=True)).astype(
        np.float32
    )
    geos = [
        (float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
        for _ in range(10_000)
    ]
    store = make_store(matrix, geos=geos, backend_name="stub512")
    backend = _Dim512Backend()
    spec = GridSpec(
        bbox=GeoBBox(lat_min=0.0, lat_max=1.0, lon_min=0.0, lon_max=1.0),
        rows=64,
        cols=64,
    )
    t0 = time.perf_counter()
    grid = aggregate_map(store, Prompt("a photo of Paris"), backend, spec)
    elapsed = time.perf_counter() - t0
    assert int(grid.counts.sum()) == 10_000
    assert elapsed < 5.0
    _ok("paper-scale throughput", f"10,000x512 scored+binned in {elapsed:.2f}s < 5s")


# ---------------------------------------------------------------------------
# Real-model smoke (manual)


@pytest.mark.skipif(
    "ATLAS_REAL_ENCODER" not in os.environ or "ATLAS_EIFFEL_IMAGE" not in os.environ,
    reason="manual: set ATLAS_REAL_ENCODER (http endpoint) and "
    "ATLAS_EIFFEL_IMAGE (photo path) to run",
)
def test_real_model_smoke():
    from catlas import HttpEncoderBackend
    from catlas.embedding import encode_prompt
    from pathlib import Path

    backend = HttpEncoderBackend(os.environ["ATLAS_REAL_ENCODER"])
    prompt_vec = encode_prompt(Prompt("Paris"), backend)
    eiffel = normalize(
        backend.encode_image(Path(os.environ["ATLAS_EIFFEL_IMAGE"]).read_bytes())
    )
    rng = np.random.default_rng(0)
    noise_png = solid_png((127, 127, 127))
    from PIL import Image
    import io

    noise = Image.fromarray(
        rng.integers(0, 256, size=(256, 256, 3), dtype=np.uint8), "RGB"
    )
    buf = io.BytesIO()
    noise.save(buf, format="PNG")
    noise_vec = normalize(backend.encode_image(buf.getvalue()))
    assert cosine_similarity(prompt_vec, eiffel) > cosine_similarity(
        prompt_vec, noise_vec
    )
    _ok("real-model smoke")

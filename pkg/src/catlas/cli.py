"""Command-line surface for the full pipeline.

Subcommands compose the library operations one to one; analysis output
goes through the same canonical payload builders as the HTTP service, so
piping `catlas search ...` and GETting /corpora/{n}/search produce
byte-identical documents. Failures print one machine-parsable JSON line
to stderr and exit nonzero.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import payloads
from .backends import get_backend
from .config import Config, load_config
from .corpus import embed_corpus, scan_corpus
from .errors import EngineError
from .geogrid import GeoBBox
from .scatter import AxisSpec, export_scatter, scatter
from .embedding import Prompt
from .storefile import load_store, save_store


def _fail(exc: Exception) -> None:
    name = exc.name if isinstance(exc, EngineError) else type(exc).__name__
    line = json.dumps({"error": name, "message": str(exc)}, ensure_ascii=False)
    click.echo(line, err=True)
    sys.exit(1)


def _parse_bbox(raw: str | None) -> GeoBBox | None:
    if raw is None:
        return None
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 4:
        raise click.BadParameter("expected 'lon_min,lat_min,lon_max,lat_max'")
    w, s, e, n = (float(p) for p in parts)
    return GeoBBox(lat_min=s, lat_max=n, lon_min=w, lon_max=e)


def _emit(payload: dict, out: str | None) -> None:
    data = payloads.canonical_json(payload)
    if out is None or out == "-":
        click.echo(data.decode("utf-8"))
    else:
        Path(out).write_bytes(data + b"\n")


class _Context:
    def __init__(self, config: Config, backend_flag: str | None, seed: int | None):
        self.config = config
        self.backend_flag = backend_flag
        self.seed = seed if seed is not None else config.seed

    def backend_for(self, store=None, override: str | None = None):
        spec = override or self.backend_flag or (
            store.backend_name if store is not None else self.config.backend
        )
        return get_backend(spec)


# accepted both as a global flag (before the subcommand) and per command
_backend_option = click.option(
    "--backend", "backend_override", default=None,
    help="Encoder: 'toy' or an http(s) URL.",
)


@click.group()
@click.option("--seed", type=int, default=None, help="Seed for any sampling.")
@click.option("--backend", default=None, help="Encoder: 'toy' or an http(s) URL.")
@click.option(
    "--config", "config_path", type=click.Path(exists=True), default=None,
    help="TOML config file (env ATLAS_* overrides apply on top).",
)
@click.pass_context
def main(ctx, seed, backend, config_path):
    """Concept analysis over image corpora: ingest, search, map, scatter."""
    config = load_config(config_path)
    ctx.obj = _Context(config, backend, seed)


def _ingest_impl(ctx_obj, manifest, directory, out, batch_size, workers,
                 backend_override=None):
    source = manifest or directory
    if source is None:
        raise click.UsageError("pass --manifest or --dir")
    backend = ctx_obj.backend_for(override=backend_override)
    records = scan_corpus(source)
    result = embed_corpus(records, backend, batch_size=batch_size, workers=workers)
    for failure in result.failures:
        click.echo(
            f"warning: dropped {failure.record_id!r}: {failure.reason}", err=True
        )
    save_store(result.store, out)
    click.echo(
        f"embedded {result.store.count} of {len(records)} records "
        f"(dim {result.store.dimensionality}, backend {backend.name}) -> {out}"
    )


@main.command()
@click.option("--manifest", type=click.Path(exists=True), default=None)
@click.option("--dir", "directory", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path())
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@_backend_option
@click.pass_obj
def ingest(obj, manifest, directory, out, batch_size, workers, backend_override):
    """Scan a directory or manifest and embed it into a store file."""
    try:
        _ingest_impl(obj, manifest, directory, out, batch_size, workers,
                     backend_override)
    except EngineError as exc:
        _fail(exc)


@main.command()
@click.option("--manifest", type=click.Path(exists=True), default=None)
@click.option("--dir", "directory", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path())
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@_backend_option
@click.pass_obj
def embed(obj, manifest, directory, out, batch_size, workers, backend_override):
    """Alias for ingest."""
    try:
        _ingest_impl(obj, manifest, directory, out, batch_size, workers,
                     backend_override)
    except EngineError as exc:
        _fail(exc)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--prompt", required=True)
@click.option("-k", type=int, default=10, show_default=True)
@click.option("--template", default="{}", show_default=True)
@click.option("--out", default=None, help="File for the JSON payload; stdout if omitted.")
@_backend_option
@click.pass_obj
def search(obj, store_path, prompt, k, template, out, backend_override):
    """Ranked retrieval of the k best matches for a prompt."""
    try:
        store = load_store(store_path)
        backend = obj.backend_for(store, backend_override)
        payload = payloads.build_search(store, backend, prompt, k, template)
        _emit(payload, out)
    except EngineError as exc:
        _fail(exc)


@main.command(name="map")
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--prompt", required=True)
@click.option("--bbox", default=None, help="lon_min,lat_min,lon_max,lat_max (corpus extent if omitted).")
@click.option("--rows", type=int, default=64, show_default=True)
@click.option("--cols", type=int, default=64, show_default=True)
@click.option("--stat", type=click.Choice(["mean", "max"]), default="mean", show_default=True)
@click.option("--min-count", type=int, default=3, show_default=True)
@click.option("--contrast-with", "contrast_prompt", default=None,
              help="Second prompt: map z(prompt) - z(contrast) instead.")
@click.option("--template", default="{}", show_default=True)
@click.option("--out", default=None, help="GeoJSON output path; stdout if omitted.")
@_backend_option
@click.pass_obj
def map_cmd(obj, store_path, prompt, bbox, rows, cols, stat, min_count,
            contrast_prompt, template, out, backend_override):
    """Concept heat map over a geo-tagged corpus, as GeoJSON."""
    try:
        store = load_store(store_path)
        backend = obj.backend_for(store, backend_override)
        box = _parse_bbox(bbox)
        if contrast_prompt is None:
            payload = payloads.build_map(
                store, backend, prompt, bbox=box, rows=rows, cols=cols,
                stat=stat, min_count=min_count, template=template,
            )
        else:
            payload = payloads.build_contrast(
                store, backend, prompt, contrast_prompt, bbox=box,
                rows=rows, cols=cols, stat=stat, min_count=min_count,
                template=template,
            )
        _emit(payload, out)
    except EngineError as exc:
        _fail(exc)


@main.command(name="scatter")
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--x", "x_prompt", required=True)
@click.option("--y", "y_prompt", required=True)
@click.option("--norm", type=click.Choice(["none", "rank", "zscore"]),
              default="none", show_default=True)
@click.option("--sample", type=int, default=None,
              help="Seeded uniform subsample size.")
@click.option("--template", default="{}", show_default=True)
@click.option("--out", default=None,
              help=".csv or .jsonl point table; JSON payload to stdout if omitted.")
@_backend_option
@click.pass_obj
def scatter_cmd(obj, store_path, x_prompt, y_prompt, norm, sample, template, out,
                backend_override):
    """Two-axis concept scatter with diagonal residuals."""
    try:
        store = load_store(store_path)
        backend = obj.backend_for(store, backend_override)
        if out is not None and out != "-":
            points = scatter(
                store,
                AxisSpec(Prompt(x_prompt, template=template), normalization=norm),
                AxisSpec(Prompt(y_prompt, template=template), normalization=norm),
                backend,
                sample=sample,
                seed=obj.seed,
            )
            fmt = "jsonl" if out.endswith(".jsonl") else "csv"
            meta = {
                "x_prompt": x_prompt,
                "y_prompt": y_prompt,
                "template": template,
                "normalization": norm,
                "backend": backend.name,
                "sample": sample,
                "seed": obj.seed,
            }
            export_scatter(points, out, format=fmt, meta=meta)
            click.echo(f"wrote {len(points)} points -> {out}")
        else:
            payload = payloads.build_scatter(
                store, backend, x_prompt, y_prompt, norm=norm,
                sample=sample, seed=obj.seed, template=template,
            )
            _emit(payload, None)
    except EngineError as exc:
        _fail(exc)


@main.command(name="extremes")
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--prompt", required=True)
@click.option("-n", type=int, default=5, show_default=True)
@click.option("--template", default="{}", show_default=True)
@click.option("--out", default=None)
@_backend_option
@click.pass_obj
def extremes_cmd(obj, store_path, prompt, n, template, out, backend_override):
    """Most and least prompt-like images in the corpus."""
    try:
        store = load_store(store_path)
        backend = obj.backend_for(store, backend_override)
        payload = payloads.build_extremes(store, backend, prompt, n, template)
        _emit(payload, out)
    except EngineError as exc:
        _fail(exc)


@main.command()
@click.option("--store", "stores", multiple=True, type=click.Path(exists=True),
              help="Store file to register (repeatable).")
@click.option("--name", "names", multiple=True,
              help="Corpus name per --store (defaults to the file stem).")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_obj
def serve(obj, stores, names, host, port):
    """Run the HTTP service over one or more registered corpora."""
    from .service import run_service

    try:
        if not stores:
            raise click.UsageError("pass at least one --store")
        if names and len(names) != len(stores):
            raise click.UsageError("--name count must match --store count")
        corpora = [
            (names[i] if names else Path(s).stem, s)
            for i, s in enumerate(stores)
        ]
        run_service(obj.config, corpora, host=host, port=port)
    except EngineError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()

"""Operator command line: pipeline stages, analyses, and the API server.

Stages communicate through the NDJSON store on disk, so any stage can be
re-run in isolation.  Exit codes: 2 for configuration problems, 1 for data
problems, 0 on success.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from filelock import FileLock

from . import active_learn, density as density_mod, embed as embed_mod, stats as stats_mod, synth
from .annotate import (
    DEFAULT_THRESHOLD_KM2,
    DeriveCounters,
    IntegrityError,
    derive_annotations,
    roi_postfilter,
)
from .geo import GeometryError, default_roi, roi_from_file
from .geocode import BASE_URL_ENV, GeocodeClient
from .ingest import IngestReport, parse_ndjson
from .store import Store, load_snapshot
from .stats import StatsError

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


def _load_roi(path):
    try:
        return roi_from_file(path) if path else default_roi()
    except (OSError, GeometryError, json.JSONDecodeError, ValueError) as e:
        raise ConfigError(f"cannot load RoI from {path}: {e}") from e


def _store_lock(store: Store) -> FileLock:
    store.ensure()
    return FileLock(str(store.lock_path))


def _open_input(path: str):
    if path == "-":
        return sys.stdin
    return open(path, encoding="utf-8")


# --------------------------------------------------------------------------
# Subcommands


def cmd_synth(args) -> int:
    mix = synth.load_mix(args.mix) if args.mix else synth.default_mix()
    roi = _load_roi(args.roi)
    if args.fixture_out:
        from .geocode import save_fixture
        save_fixture(synth.build_fixture(mix, args.seed, roi), args.fixture_out)
        print(f"wrote geocoder fixture to {args.fixture_out}", file=sys.stderr)
    n = synth.main_write(args.n, mix, args.seed, args.out, roi)
    print(f"generated {n} tweets (seed={args.seed})", file=sys.stderr)
    return EXIT_OK


def cmd_ingest(args) -> int:
    store = Store(args.store)
    with _store_lock(store):
        report = IngestReport()

        def records():
            for path in args.input:
                with _open_input(path) as fh:
                    yield from parse_ndjson(fh, report)

        n = store.write_tweets(records())
        store.write_report("ingest", {
            "lines_read": report.lines_read,
            "parsed": report.parsed,
            "blank": report.blank,
            "errors": report.error_count,
            "first_errors": report.errors[:20],
        })
    for lineno, message in report.errors[:20]:
        print(f"line {lineno}: {message}", file=sys.stderr)
    print(f"ingested {n} tweets ({report.error_count} bad lines)", file=sys.stderr)
    return EXIT_OK


def cmd_annotate(args) -> int:
    if args.live and args.fixture:
        raise ConfigError("--live and --fixture are mutually exclusive")
    if not args.live and not args.fixture:
        raise ConfigError("annotate needs --fixture FILE or --live")
    try:
        geocoder = (GeocodeClient(base_url=args.base_url) if args.live
                    else GeocodeClient(fixture_path=args.fixture))
    except (OSError, ValueError, KeyError) as e:
        raise ConfigError(f"cannot set up geocoder: {e}") from e

    store = Store(args.store)
    with _store_lock(store):
        counters = DeriveCounters()
        annotations = []
        places = {}
        for record in store.read_tweets():
            for annotation, place in derive_annotations(record, geocoder, counters):
                annotations.append(annotation)
                if place is not None:
                    places[place.place_id] = place
        store.write_annotations(annotations)
        store.write_places(places.values())
        store.write_report("derive", counters.to_json())
    print(
        f"derived {len(annotations)} annotations over {len(places)} places "
        f"(recovery_failed={counters.recovery_failed}, unmatched={counters.recovery_unmatched})",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_postfilter(args) -> int:
    roi = _load_roi(args.roi)
    store = Store(args.store)
    with _store_lock(store):
        annotations = store.read_annotations()
        places = store.read_places()
        kept, kept_places, report = roi_postfilter(annotations, places, roi)
        store.write_annotations(kept)
        store.write_places(kept_places.values())
        store.write_report("postfilter", report.to_json())
    print(
        f"kept {len(kept)}/{len(annotations)} annotations, "
        f"{len(kept_places)}/{len(places)} places",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_stats(args) -> int:
    snapshot = load_snapshot(args.store)
    rows = stats_mod.place_frequencies(snapshot.annotations, snapshot.places, args.kind)
    if args.csv:
        Path(args.csv).write_text(stats_mod.scatter_csv(rows), encoding="utf-8")
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(stats_mod.scatter_rows(rows), indent=1), encoding="utf-8"
        )
    report = stats_mod.correlate_loglog(rows, use_log=not args.raw)
    print(json.dumps(report.to_json(), indent=1, sort_keys=True))
    return EXIT_OK


def cmd_density(args) -> int:
    snapshot = load_snapshot(args.store)
    roi = _load_roi(args.roi)
    tweet_ids = None
    if args.keywords:
        words = [w for w in args.keywords.split(",") if w.strip()]
        tweet_ids = density_mod.keyword_filter(snapshot.tweets.values(), words)
    grid = density_mod.density_grid(
        snapshot.annotations, snapshot.places, roi,
        cell_deg=args.cell,
        subtypes=tuple(args.subtypes.split(",")),
        threshold_km2=args.threshold,
        tweet_ids=tweet_ids,
    )
    if args.geojson:
        Path(args.geojson).write_text(json.dumps(density_mod.grid_to_geojson(grid)), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(density_mod.grid_to_csv(grid), encoding="utf-8")
    print(json.dumps({
        "cells": len(grid.cells), "aggregated": grid.aggregated,
        "selected": grid.selected, "dropped": grid.dropped,
    }))
    return EXIT_OK


def cmd_embed(args) -> int:
    snapshot = load_snapshot(args.store)
    rows = (
        (tweet_id, embed_mod.embed_char_ngram(t.text, d=args.dim, seed=args.seed))
        for tweet_id, t in sorted(snapshot.tweets.items())
    )
    n = embed_mod.write_vectors(rows, args.out)
    print(f"embedded {n} tweets into {args.out} (d={args.dim})", file=sys.stderr)
    return EXIT_OK


def cmd_al_run(args) -> int:
    labels = active_learn.load_labels(args.labels)
    provider = embed_mod.load_precomputed(args.vectors)
    samples = [
        active_learn.LabeledSample(tweet_id, provider.vector(tweet_id), label)
        for tweet_id, label in sorted(labels.items())
        if tweet_id in provider
    ]
    missing = len(labels) - len(samples)
    if missing:
        print(f"warning: {missing} labeled ids missing from vectors", file=sys.stderr)
    train_pool, test_set = active_learn.split_train_test(samples, seed=args.seed, train_size=args.train_size)
    curve = active_learn.run_curve(
        train_pool, test_set, args.strategy,
        batch_size=args.batch, budget=args.budget or len(train_pool), seed=args.seed,
    )
    csv_text = active_learn.curve_to_csv(curve)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    final = curve[-1]
    print(
        f"strategy={args.strategy} final n_labeled={final.n_labeled} "
        f"macro_precision={final.macro_precision:.4f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"--bind must be host:port, got {args.bind!r}")
    app = create_app(args.store, roi_path=args.roi, threshold_km2=args.threshold)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return EXIT_OK


def cmd_report(args) -> int:
    snapshot = load_snapshot(args.store)
    store = Store(args.store)
    by_kind = {k: 0 for k in ("geotag", "bbox", "pbbox")}
    for a in snapshot.annotations:
        by_kind[a.kind] += 1
    total = snapshot.annotation_count
    cross = stats_mod.cross_distribution(
        snapshot.annotations, snapshot.places, snapshot.tweets, args.threshold
    )
    payload = {
        "tweets": len(snapshot.tweets),
        "annotations_total": total,
        "annotations_by_kind": by_kind,
        "distinct_places": len(snapshot.places),
        "geotag_share": by_kind["geotag"] / total if total else 0.0,
        "usable_fraction": stats_mod.usable_fraction(cross) if total else 0.0,
        "threshold_km2": args.threshold,
        "derive": store.read_report("derive"),
        "postfilter": store.read_report("postfilter"),
    }
    print(json.dumps(payload, indent=1, sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geocorpus",
        description="Geographic annotation pipeline for social-media flood corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    p.add_argument("--n", type=int, required=True, help="number of tweets to generate")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--mix", help="TOML/JSON mix config (defaults to calibrated mix)")
    p.add_argument("--out", default="-", help="output NDJSON file, '-' for stdout")
    p.add_argument("--fixture-out", help="also write the matching geocoder fixture")
    p.add_argument("--roi", help="RoI file (defaults to built-in region)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse raw NDJSON into the store")
    p.add_argument("--input", nargs="+", required=True, help="NDJSON files, '-' for stdin")
    p.add_argument("--store", required=True, help="store directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("annotate", help="derive geotag/bbox/pbbox annotations")
    p.add_argument("--store", required=True)
    p.add_argument("--fixture", help="geocoder replay fixture (fixture mode)")
    p.add_argument("--live", action="store_true", help="use a live geocoder endpoint")
    p.add_argument("--base-url", help=f"geocoder base URL (or ${BASE_URL_ENV})")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("postfilter", help="drop annotations outside the RoI")
    p.add_argument("--store", required=True)
    p.add_argument("--roi", help="RoI file (defaults to built-in region)")
    p.set_defaults(func=cmd_postfilter)

    p = sub.add_parser("stats", help="surface/frequency scatter and correlations")
    p.add_argument("--store", required=True)
    p.add_argument("--kind", choices=("bbox", "pbbox"), required=True)
    p.add_argument("--csv", help="write scatter rows as CSV")
    p.add_argument("--json", dest="json_out", help="write scatter rows as JSON")
    p.add_argument("--raw", action="store_true", help="correlate raw values instead of log10")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("density", help="keyword-filtered density grid")
    p.add_argument("--store", required=True)
    p.add_argument("--roi", help="RoI file (defaults to built-in region)")
    p.add_argument("--cell", type=float, default=density_mod.DEFAULT_CELL_DEG)
    p.add_argument("--keywords", help="comma-separated, case-insensitive substrings")
    p.add_argument("--subtypes", default="geotag,s_bbox")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD_KM2)
    p.add_argument("--geojson", help="write nonzero cells as GeoJSON")
    p.add_argument("--csv", help="write nonzero cells as CSV")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("embed", help="character-n-gram hash embeddings for all tweets")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True, help="output TSV (tweet_id<TAB>f1,...,fd)")
    p.add_argument("--dim", type=int, default=embed_mod.DEFAULT_DIM)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("al-run", help="active-learning precision curve")
    p.add_argument("--labels", required=True, help="CSV tweet_id,label")
    p.add_argument("--vectors", required=True, help="TSV embedding file")
    p.add_argument("--strategy", choices=("random", "uncertainty", "hierarchical"), required=True)
    p.add_argument("--batch", type=int, default=20)
    p.add_argument("--budget", type=int, default=0, help="0 = whole train pool")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-size", type=int, default=None,
                   help="override the default 316/105-style split")
    p.add_argument("--out", help="write the curve CSV here instead of stdout")
    p.set_defaults(func=cmd_al_run)

    p = sub.add_parser("serve", help="run the read-only HTTP JSON API")
    p.add_argument("--store", required=True)
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.add_argument("--roi", help="RoI file (defaults to built-in region)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD_KM2)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="headline aggregates for the processed store")
    p.add_argument("--store", required=True)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD_KM2)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (synth.MixConfigError, GeometryError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"missing input: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrityError, StatsError, DataError, ValueError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

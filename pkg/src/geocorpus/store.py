"""On-disk NDJSON store shared by the pipeline stages.

Layout under a store directory:

    tweets.ndjson        canonical serialized tweet records
    annotations.ndjson   one annotation per line
    places.ndjson        one place document per line
    reports/*.json       stage reports (derive, post-filter)

Single writer at a time (the CLI takes a lock); readers load an immutable
snapshot.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .annotate import Annotation, IntegrityError, PlaceDoc, check_integrity
from .geo import BBox, GeoPoint
from .ingest import IngestReport, TweetRecord, parse_ndjson, serialize_tweet

TWEETS_FILE = "tweets.ndjson"
ANNOTATIONS_FILE = "annotations.ndjson"
PLACES_FILE = "places.ndjson"
REPORTS_DIR = "reports"
LOCK_FILE = ".geocorpus.lock"


def annotation_to_json(a: Annotation) -> dict:
    obj = {"tweet_id": a.tweet_id, "kind": a.kind}
    if a.point is not None:
        obj["point"] = [a.point.lon, a.point.lat]
    if a.place_id is not None:
        obj["place_id"] = a.place_id
    return obj


def annotation_from_json(obj: dict) -> Annotation:
    point = obj.get("point")
    return Annotation(
        tweet_id=obj["tweet_id"],
        kind=obj["kind"],
        point=GeoPoint(*point) if point is not None else None,
        place_id=obj.get("place_id"),
    )


def place_to_json(p: PlaceDoc) -> dict:
    return {"place_id": p.place_id, "name": p.name, "bbox": p.bbox.as_list(), "origin": p.origin}


def place_from_json(obj: dict) -> PlaceDoc:
    return PlaceDoc(
        place_id=obj["place_id"],
        name=obj["name"],
        bbox=BBox(*obj["bbox"]),
        origin=obj["origin"],
    )


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def lock_path(self) -> Path:
        return self.root / LOCK_FILE

    def path(self, name: str) -> Path:
        return self.root / name

    def ensure(self) -> "Store":
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / REPORTS_DIR).mkdir(exist_ok=True)
        return self

    # -- tweets ------------------------------------------------------------

    def write_tweets(self, records: Iterable[TweetRecord]) -> int:
        n = 0
        with open(self.path(TWEETS_FILE), "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(serialize_tweet(r) + "\n")
                n += 1
        return n

    def read_tweets(self, report: Optional[IngestReport] = None):
        with open(self.path(TWEETS_FILE), encoding="utf-8") as fh:
            yield from parse_ndjson(fh, report)

    # -- annotations and places ---------------------------------------------

    def write_annotations(self, annotations: Iterable[Annotation]) -> int:
        n = 0
        with open(self.path(ANNOTATIONS_FILE), "w", encoding="utf-8") as fh:
            for a in annotations:
                fh.write(json.dumps(annotation_to_json(a), sort_keys=True, separators=(",", ":")) + "\n")
                n += 1
        return n

    def read_annotations(self) -> list[Annotation]:
        out = []
        with open(self.path(ANNOTATIONS_FILE), encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(annotation_from_json(json.loads(line)))
        return out

    def write_places(self, places: Iterable[PlaceDoc]) -> int:
        n = 0
        with open(self.path(PLACES_FILE), "w", encoding="utf-8") as fh:
            for p in places:
                fh.write(json.dumps(place_to_json(p), sort_keys=True, separators=(",", ":")) + "\n")
                n += 1
        return n

    def read_places(self) -> dict[str, PlaceDoc]:
        out: dict[str, PlaceDoc] = {}
        with open(self.path(PLACES_FILE), encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    p = place_from_json(json.loads(line))
                    out[p.place_id] = p
        return out

    # -- reports -------------------------------------------------------------

    def write_report(self, name: str, payload: dict) -> Path:
        path = self.root / REPORTS_DIR / f"{name}.json"
        path.parent.mkdir(exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
        return path

    def read_report(self, name: str) -> Optional[dict]:
        path = self.root / REPORTS_DIR / f"{name}.json"
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)


@dataclass(frozen=True)
class StoreSnapshot:
    """Immutable in-memory view used by the statistics stages and the API."""

    tweets: dict            # tweet_id -> TweetRecord
    annotations: tuple      # tuple[Annotation, ...]
    places: dict            # place_id -> PlaceDoc

    @property
    def annotation_count(self) -> int:
        return len(self.annotations)


def load_snapshot(root: str | Path, require_tweets: bool = True) -> StoreSnapshot:
    """Load and integrity-check a processed store."""
    store = Store(root)
    tweets: dict[str, TweetRecord] = {}
    if store.path(TWEETS_FILE).exists():
        report = IngestReport()
        for r in store.read_tweets(report):
            tweets[r.id] = r
        if report.error_count:
            raise IntegrityError(f"{report.error_count} unparseable lines in {TWEETS_FILE}")
    elif require_tweets:
        raise FileNotFoundError(store.path(TWEETS_FILE))
    annotations = tuple(store.read_annotations()) if store.path(ANNOTATIONS_FILE).exists() else ()
    places = store.read_places() if store.path(PLACES_FILE).exists() else {}
    check_integrity(annotations, places)
    return StoreSnapshot(tweets=tweets, annotations=annotations, places=places)
